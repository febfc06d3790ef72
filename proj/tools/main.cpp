#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rispace/classh.hpp"
#include "rispace/error.hpp"
#include "rispace/optimal.hpp"
#include "rispace/spaces.hpp"
#include "rispace/suite.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rispace;

namespace {

constexpr int kInvalid = 2;

struct InvalidArgs : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A file path, inline JSON, or a bare word taken as a JSON string.
json load_json(const std::string& arg) {
  if (fs::is_regular_file(arg)) {
    std::ifstream in(arg);
    try {
      return json::parse(in);
    } catch (const json::exception& e) {
      throw InvalidArgs(arg + ": " + e.what());
    }
  }
  try {
    return json::parse(arg);
  } catch (const json::exception&) {
    return json(arg);
  }
}

EvaluationGrid parse_grid(const std::string& spec) {
  EvaluationGrid g;
  if (spec.empty()) return g;
  std::stringstream ss(spec);
  std::string a, b, n;
  if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, n)) {
    throw InvalidArgs("--grid expects tmin,tmax,n");
  }
  try {
    g.t_min = std::stod(a);
    g.t_max = std::stod(b);
    g.count = std::stoi(n);
  } catch (const std::exception&) {
    throw InvalidArgs("--grid expects tmin,tmax,n, got \"" + spec + "\"");
  }
  g.validate();
  return g;
}

// Writes next to the target and renames, so readers never see a partial file.
void write_atomic(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
  }
  fs::rename(tmp, path);
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_atomic(out, text);
  }
}

std::string bracket_csv(const FundamentalBracket& b) {
  Tabulation tab;
  tab.columns = {"lower", "upper"};
  tab.t = b.t;
  for (std::size_t i = 0; i < b.t.size(); ++i) tab.rows.push_back({b.lower[i], b.upper[i]});
  return to_csv(tab);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal ranges and domains of the Hardy operator on rearrangement-invariant spaces"};
  app.require_subcommand(1);

  std::string grid_spec;
  std::uint64_t seed = 7;
  std::string out;
  std::string format;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--grid", grid_spec, "Evaluation grid tmin,tmax,n (log-spaced)");
    sub->add_option("--seed", seed, "Random seed");
    sub->add_option("--out", out, "Output file (directory for check)");
    sub->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  };

  CLI::App* check = app.add_subcommand("check", "Run a check suite");
  std::string suite_name;
  std::string config_path;
  bool print_config = false;
  check->add_option("--suite", suite_name, "Built-in suite: paper-examples or empty");
  check->add_option("--config", config_path, "Suite file (JSON)");
  check->add_flag("--print-config", print_config, "Print the suite as JSON and exit");
  common(check);

  CLI::App* tab = app.add_subcommand("tabulate", "Tabulate a function on the grid");
  std::string kind;
  std::string phi_arg;
  std::string space_arg;
  std::string of = "range";
  tab->add_option("--kind", kind, "phi, tilde, psi, psi_lorentz, W or bracket")->required();
  tab->add_option("--phi", phi_arg, "phi as JSON, a file, or a built-in name");
  tab->add_option("--space", space_arg, "Space as JSON or a file");
  tab->add_option("--of", of, "For bracket: range, domain, functor_DX or functor_RX");
  common(tab);

  CLI::App* classh = app.add_subcommand("classh", "Class H verification");
  CLI::App* verify = classh->add_subcommand("verify", "Check the three axioms on a seeded corpus");
  classh->require_subcommand(1);
  std::string op_arg;
  int corpus = 200;
  verify->add_option("--operator", op_arg, "Operator as JSON, a file, or S / Sprime")->required();
  verify->add_option("--corpus", corpus, "Corpus size");
  common(verify);

  CLI::App* range = app.add_subcommand("range", "Optimal range of S on a space");
  CLI::App* dom = app.add_subcommand("domain", "Optimal domain of S into a space");
  CLI::App* functor = app.add_subcommand("functor", "Composite functors D_X and R_X");
  std::string which = "DX";
  for (CLI::App* sub : {range, dom, functor}) {
    sub->add_option("--space", space_arg, "Space as JSON or a file")->required();
    common(sub);
  }
  functor->add_option("--which", which, "DX or RX")->check(CLI::IsMember({"DX", "RX"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kInvalid;
  }
  try {
    const EvaluationGrid grid = parse_grid(grid_spec);

    if (check->parsed()) {
      if (suite_name.empty() == config_path.empty()) throw InvalidArgs("check needs exactly one of --suite or --config");
      SuiteConfig config = suite_name.empty() ? parse_suite(load_json(config_path)) : builtin_suite(suite_name);
      if (check->count("--grid")) config.grid = grid;
      if (check->count("--seed")) config.seed = seed;
      if (print_config) {
        json j = {{"grid", config.grid}, {"seed", config.seed}, {"checks", json::array()}};
        for (const auto& c : config.checks) j["checks"].push_back({{"name", c.name}, {"id", c.id}, {"params", c.params}});
        std::cout << j.dump(2) << '\n';
        return 0;
      }
      const std::vector<CheckReport> reports = run_suite(config);
      if (!out.empty()) {
        for (const auto& r : reports) write_atomic(fs::path(out) / (r.id + ".json"), json(r).dump(2) + "\n");
        write_atomic(fs::path(out) / "summary.csv", summary_csv(reports));
      }
      if (format == "json") {
        std::cout << json(reports).dump(2) << '\n';
      } else {
        std::cout << summary_csv(reports);
      }
      return suite_status(reports);
    }

    if (tab->parsed()) {
      json params = json::object();
      if (!phi_arg.empty()) params["phi"] = load_json(phi_arg);
      if (!space_arg.empty()) params["space"] = load_json(space_arg);
      params["of"] = of;
      const Tabulation t = tabulate(kind, params, grid);
      if (format == "json") {
        json j = {{"kind", kind}, {"grid", grid}, {"columns", t.columns}, {"t", t.t}, {"rows", t.rows}};
        emit(out, j.dump(2) + "\n");
      } else {
        emit(out, to_csv(t));
      }
      return 0;
    }

    if (verify->parsed()) {
      const OperatorSpec op = parse_operator(load_json(op_arg));
      const ClassHReport r = verify_class_h(op, corpus, seed);
      emit(out, json(r).dump(2) + "\n");
      return r.pass() ? 0 : 1;
    }

    const SpaceSpec x = parse_space(load_json(space_arg));
    const bool csv = format == "csv";
    if (range->parsed()) {
      const RangeResult r = optimal_range(x, grid);
      emit(out, csv ? bracket_csv(r.fundamental) : json(r).dump(2) + "\n");
    } else if (dom->parsed()) {
      const DomainResult d = domain(x, grid);
      emit(out, csv ? bracket_csv(d.fundamental) : json(d).dump(2) + "\n");
    } else if (which == "DX") {
      const DomainResult d = functor_DX(x, grid);
      emit(out, csv ? bracket_csv(d.fundamental) : json(d).dump(2) + "\n");
    } else {
      const RangeResult r = functor_RX(x, grid);
      emit(out, csv ? bracket_csv(r.fundamental) : json(r).dump(2) + "\n");
    }
    return 0;
  } catch (const InvalidArgs& e) {
    std::cerr << "rispace: " << e.what() << '\n';
    return kInvalid;
  } catch (const Error& e) {
    std::cerr << "rispace: " << e.what() << '\n';
    return e.kind() == ErrorKind::InvalidInput || e.kind() == ErrorKind::InvalidOperator ? kInvalid : 1;
  } catch (const json::exception& e) {
    std::cerr << "rispace: malformed JSON: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "rispace: " << e.what() << '\n';
    return 1;
  }
}
