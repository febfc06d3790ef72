#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "rispace/phi.hpp"

namespace rispace {

/// One named check with its parameters, as read from a suite file.
struct CheckConfig {
  std::string name;
  /// Report name; defaults to `name` and must be unique in a suite.
  std::string id;
  nlohmann::json params = nlohmann::json::object();
};

struct SuiteConfig {
  std::vector<CheckConfig> checks;
  EvaluationGrid grid;
  std::uint64_t seed = 7;
};

enum class Verdict { Pass, Fail, CorrectlyRejected, Error };

std::string to_string(Verdict v);

struct CheckReport {
  std::string check;
  std::string id;
  /// The formula the check exercises.
  std::string paper_ref;
  EvaluationGrid grid;
  double band_min = 0.0;
  double band_max = 0.0;
  Verdict verdict = Verdict::Error;
  nlohmann::json details = nlohmann::json::object();

  bool ok() const { return verdict == Verdict::Pass || verdict == Verdict::CorrectlyRejected; }
};

/// Names accepted in a suite file.
std::vector<std::string> check_names();

/// {"grid": {...}, "seed": n, "checks": [{"name", "id"?, "params"?}]}.
/// Throws Error(InvalidInput) for unknown names, duplicate ids or bad shapes.
SuiteConfig parse_suite(const nlohmann::json& j);
/// "paper-examples" or "empty"; throws Error(InvalidInput) otherwise.
SuiteConfig builtin_suite(const std::string& name);

/// Runs one check; library errors become verdict Error with the message in
/// details. Throws Error(InvalidInput) for malformed parameters.
CheckReport run_check(const CheckConfig& c, const EvaluationGrid& grid, std::uint64_t seed);
/// Reports in config order.
std::vector<CheckReport> run_suite(const SuiteConfig& config);

/// 0 when every verdict is pass or correctly-rejected, else 1.
int suite_status(const std::vector<CheckReport>& reports);

/// id,check,verdict,band_min,band_max rows.
std::string summary_csv(const std::vector<CheckReport>& reports);

void to_json(nlohmann::json& j, const CheckReport& r);

/// Columns of values over a grid, for plotting.
struct Tabulation {
  std::vector<std::string> columns;
  std::vector<double> t;
  /// rows[i][k] is column k at t[i].
  std::vector<std::vector<double>> rows;
};

/// kind is phi, tilde, psi, psi_lorentz, W or bracket. `params` holds "phi"
/// (phi, tilde, psi, psi_lorentz) or "space" (W, bracket; bracket also takes
/// "of": range | domain | functor_DX | functor_RX, default range).
Tabulation tabulate(const std::string& kind, const nlohmann::json& params, const EvaluationGrid& grid);
/// Header row then one row per grid point, 17 significant digits.
std::string to_csv(const Tabulation& tab);

}  // namespace rispace
