#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

namespace rispace {

/// Value and first derivative, propagated through expression evaluation.
struct Dual {
  double value = 0.0;
  double derivative = 0.0;
};

/// Immutable expression tree for quasiconcave candidate functions of t > 0.
///
/// Leaves are the variable t, positive constants, the named built-ins
/// (phi_alpha, max1t, psi_helper) and opaque computed functions (tabulated or
/// quadrature-backed). Interior nodes are +, *, /, pow, log1p, min, max and
/// composition. Evaluation carries the derivative along (forward mode), which
/// the Lorentz norm needs for its Stieltjes integrals.
class PhiExpr {
 public:
  struct Node;

  /// Defaults to the variable t.
  PhiExpr();

  static PhiExpr variable();
  static PhiExpr constant(double c);
  /// t * log^alpha(1 + t^{-1/alpha}).
  static PhiExpr phi_alpha(double alpha);
  /// max(1, t).
  static PhiExpr max1t();
  /// (1 + t) log(1 + 1/t).
  static PhiExpr psi_helper();
  /// Opaque leaf; without a derivative a central difference is used.
  static PhiExpr computed(std::string name, std::function<double(double)> value,
                          std::function<double(double)> derivative = {});

  friend PhiExpr operator+(const PhiExpr& a, const PhiExpr& b);
  friend PhiExpr operator*(const PhiExpr& a, const PhiExpr& b);
  friend PhiExpr operator/(const PhiExpr& a, const PhiExpr& b);
  friend PhiExpr pow(const PhiExpr& base, double exponent);
  friend PhiExpr log1p(const PhiExpr& arg);
  friend PhiExpr min(const PhiExpr& a, const PhiExpr& b);
  friend PhiExpr max(const PhiExpr& a, const PhiExpr& b);

  /// this(inner(t)).
  PhiExpr compose(const PhiExpr& inner) const;

  /// Throws Error(InvalidInput) for t <= 0 and Error(Evaluation) at a
  /// singularity, naming the offending subexpression.
  double operator()(double t) const;
  Dual eval_dual(double t) const;
  double derivative(double t) const { return eval_dual(t).derivative; }

  std::string to_string() const;
  const Node& node() const { return *node_; }

 private:
  explicit PhiExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

void to_json(nlohmann::json& j, const PhiExpr& phi);
void from_json(const nlohmann::json& j, PhiExpr& phi);
/// Accepts the JSON tree, a bare built-in name ("phi_alpha:2", "max1t",
/// "psi_helper", "t") or a number.
PhiExpr parse_phi(const nlohmann::json& j);

/// Log-spaced evaluation grid, endpoints included.
struct EvaluationGrid {
  double t_min = 1e-6;
  double t_max = 1e6;
  int count = 200;

  std::vector<double> points() const;
  void validate() const;
  friend bool operator==(const EvaluationGrid&, const EvaluationGrid&) = default;
};

void to_json(nlohmann::json& j, const EvaluationGrid& g);

struct EquivalenceReport {
  double ratio_min = 0.0;
  double ratio_max = 0.0;
  double t_at_min = 0.0;
  double t_at_max = 0.0;
  EvaluationGrid grid;
  double band_lo = 0.0;
  double band_hi = 0.0;
  bool pass = false;

  /// ratio_max / ratio_min.
  double spread() const { return ratio_max / ratio_min; }
};

void to_json(nlohmann::json& j, const EquivalenceReport& r);

using ScalarFunction = std::function<double(double)>;

/// Ratios a(t)/b(t) over the grid; pass iff [ratio_min, ratio_max] lies in
/// [band_lo, band_hi].
EquivalenceReport compare_equivalence(const ScalarFunction& a, const ScalarFunction& b, const EvaluationGrid& grid,
                                      double band_lo = 0.0, double band_hi = std::numeric_limits<double>::infinity());
EquivalenceReport compare_equivalence(const PhiExpr& a, const PhiExpr& b, const EvaluationGrid& grid,
                                      double band_lo = 0.0, double band_hi = std::numeric_limits<double>::infinity());

struct QuasiconcavityReport {
  bool pass = true;
  /// First grid point where a condition fails, and which one.
  double t_violation = 0.0;
  std::string reason;
};

/// phi nondecreasing and phi(t)/t nonincreasing between consecutive points,
/// with relative slack `rel_tol`.
QuasiconcavityReport is_quasiconcave(const std::vector<double>& t, const std::vector<double>& values,
                                     double rel_tol = 1e-12);
QuasiconcavityReport is_quasiconcave(const PhiExpr& phi, const EvaluationGrid& grid, double rel_tol = 1e-12);

/// t / phi(t).
PhiExpr associate_fun(const PhiExpr& phi);

struct TildeOptions {
  double bracket_decades = 8.0;
  int starts = 32;
  double rel_tol = 1e-9;
};

struct TildeResult {
  double value = 0.0;
  double minimizer = 0.0;
  /// True when the infimum sits at the search boundary (approached, not attained).
  bool at_boundary = false;
};

/// inf_{r>0} t phi(r) / (r log(1 + t/r)). Throws Error(DegenerateInfimum)
/// when the objective vanishes as r -> 0.
TildeResult tilde(const PhiExpr& phi, double t, const TildeOptions& options = {});

/// t -> tilde(phi, t), tabulated on [1e-290, 1e290] and interpolated there.
PhiExpr tilde_function(const PhiExpr& phi, int per_decade = 8);

struct LocalIntegral {
  double value = 0.0;
  bool converged = false;
  int panels = 0;
};

/// int_0^t ds / phi(s) on geometric panels toward 0.
LocalIntegral inverse_integral(const PhiExpr& phi, double t);

/// t / int_0^t ds/phi(s). Throws Error(NotLocallyIntegrable) on divergence.
double psi_marcinkiewicz(const PhiExpr& phi, double t);

/// Psi as a reusable expression (precomputed running integral of 1/phi).
PhiExpr psi_marcinkiewicz_function(const PhiExpr& phi);
/// Psi interpolated from a log table on [1e-290, 1e290]; cheap to evaluate,
/// for chained constructions.
PhiExpr psi_marcinkiewicz_table(const PhiExpr& phi, int per_decade = 8);

/// inf over the grid of phi(t) / (t log(1 + 1/t)).
double logc_constant(const PhiExpr& phi, const EvaluationGrid& grid);

/// Limit phi(0+): 0 when phi(1e-300) < phi(1e-150) / 4, else phi(1e-300)
/// extrapolated in 1/log(1/t) when still moving.
struct ZeroLimit {
  double value = 0.0;
  bool settled = true;
};
ZeroLimit phi_at_zero(const PhiExpr& phi);

}  // namespace rispace
