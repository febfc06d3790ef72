#include "rispace/phi.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rispace/error.hpp"
#include "rispace/format.hpp"
#include "rispace/numerics.hpp"

namespace rispace {

struct PhiExpr::Node {
  enum class Kind { Var, Const, Add, Mul, Div, Pow, Log1p, Min, Max, Compose, PhiAlpha, Max1t, PsiHelper, Computed };
  Kind kind = Kind::Var;
  double param = 0.0;
  std::shared_ptr<const Node> a;
  std::shared_ptr<const Node> b;
  std::string name;
  std::function<double(double)> fn;
  std::function<double(double)> dfn;
};

namespace {

using Node = PhiExpr::Node;
using Kind = Node::Kind;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make(Kind kind, double param = 0.0, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->param = param;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

std::string str(const Node& n) {
  switch (n.kind) {
    case Kind::Var: return "t";
    case Kind::Const: return format_number(n.param);
    case Kind::Add: return "(" + str(*n.a) + " + " + str(*n.b) + ")";
    case Kind::Mul: return "(" + str(*n.a) + " * " + str(*n.b) + ")";
    case Kind::Div: return "(" + str(*n.a) + " / " + str(*n.b) + ")";
    case Kind::Pow: return "pow(" + str(*n.a) + ", " + format_number(n.param) + ")";
    case Kind::Log1p: return "log1p(" + str(*n.a) + ")";
    case Kind::Min: return "min(" + str(*n.a) + ", " + str(*n.b) + ")";
    case Kind::Max: return "max(" + str(*n.a) + ", " + str(*n.b) + ")";
    case Kind::Compose: return "compose(" + str(*n.a) + ", " + str(*n.b) + ")";
    case Kind::PhiAlpha: return "phi_alpha:" + format_number(n.param);
    case Kind::Max1t: return "max1t";
    case Kind::PsiHelper: return "psi_helper";
    case Kind::Computed: return n.name;
  }
  return "?";
}

[[noreturn]] void singular(const Node& n, double t, const std::string& what) {
  std::ostringstream os;
  os << what << " in " << str(n) << " at t = " << format_number(t);
  fail(ErrorKind::Evaluation, os.str());
}

double phi_alpha_value(double alpha, double x) {
  return x * std::pow(std::log1p(std::pow(x, -1.0 / alpha)), alpha);
}

// log1p(u) - u/(1+u), by its series for small u where the difference cancels.
double log1p_gap(double u) {
  if (u >= 0.1) return std::log1p(u) - u / (1.0 + u);
  double sum = 0.0;
  double p = u;
  for (int k = 2; k < 30; ++k) {
    p *= -u;
    sum -= p * (k - 1.0) / k;
  }
  return sum;
}

// log1p(v) - v, likewise.
double log1p_excess(double v) {
  if (v >= 0.1) return std::log1p(v) - v;
  double sum = 0.0;
  double p = v;
  for (int k = 2; k < 30; ++k) {
    p *= -v;
    sum += p / k;
  }
  return sum;
}

double phi_alpha_derivative(double alpha, double x) {
  const double u = std::pow(x, -1.0 / alpha);
  return std::pow(std::log1p(u), alpha - 1.0) * log1p_gap(u);
}

Dual eval(const Node& n, Dual x, double t) {
  switch (n.kind) {
    case Kind::Var: return x;
    case Kind::Const: return {n.param, 0.0};
    case Kind::Add: {
      const Dual a = eval(*n.a, x, t);
      const Dual b = eval(*n.b, x, t);
      return {a.value + b.value, a.derivative + b.derivative};
    }
    case Kind::Mul: {
      const Dual a = eval(*n.a, x, t);
      const Dual b = eval(*n.b, x, t);
      return {a.value * b.value, a.derivative * b.value + a.value * b.derivative};
    }
    case Kind::Div: {
      const Dual a = eval(*n.a, x, t);
      const Dual b = eval(*n.b, x, t);
      if (b.value == 0.0) singular(n, t, "division by zero");
      const double q = a.value / b.value;
      return {q, (a.derivative - q * b.derivative) / b.value};
    }
    case Kind::Pow: {
      const Dual a = eval(*n.a, x, t);
      const double p = n.param;
      if (a.value < 0.0 && p != std::floor(p)) singular(n, t, "fractional power of a negative value");
      if (a.value == 0.0 && p < 0.0) singular(n, t, "negative power of zero");
      const double v = std::pow(a.value, p);
      const double d = a.derivative == 0.0 ? 0.0 : p * std::pow(a.value, p - 1.0) * a.derivative;
      return {v, d};
    }
    case Kind::Log1p: {
      const Dual a = eval(*n.a, x, t);
      if (a.value <= -1.0) singular(n, t, "log of a nonpositive value");
      return {std::log1p(a.value), a.derivative / (1.0 + a.value)};
    }
    case Kind::Min: {
      const Dual a = eval(*n.a, x, t);
      const Dual b = eval(*n.b, x, t);
      return a.value <= b.value ? a : b;
    }
    case Kind::Max: {
      const Dual a = eval(*n.a, x, t);
      const Dual b = eval(*n.b, x, t);
      return a.value >= b.value ? a : b;
    }
    case Kind::Compose: {
      const Dual inner = eval(*n.b, x, t);
      if (!(inner.value > 0.0)) singular(n, t, "composition argument is not positive");
      return eval(*n.a, inner, t);
    }
    case Kind::PhiAlpha: {
      if (!(x.value > 0.0)) singular(n, t, "argument is not positive");
      return {phi_alpha_value(n.param, x.value), phi_alpha_derivative(n.param, x.value) * x.derivative};
    }
    case Kind::Max1t: return x.value >= 1.0 ? x : Dual{1.0, 0.0};
    case Kind::PsiHelper: {
      if (!(x.value > 0.0)) singular(n, t, "argument is not positive");
      const double L = std::log1p(1.0 / x.value);
      return {(1.0 + x.value) * L, log1p_excess(1.0 / x.value) * x.derivative};
    }
    case Kind::Computed: {
      if (!(x.value > 0.0)) singular(n, t, "argument is not positive");
      const double v = n.fn(x.value);
      double d = 0.0;
      if (x.derivative != 0.0) {
        if (n.dfn) {
          d = n.dfn(x.value);
        } else {
          const double h = 1e-6 * x.value;
          d = (n.fn(x.value + h) - n.fn(x.value - h)) / (2.0 * h);
        }
        d *= x.derivative;
      }
      return {v, d};
    }
  }
  return {};
}

void check_positive_param(double c, const char* what) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    fail(ErrorKind::InvalidInput, std::string(what) + " must be finite and positive, got " + format_number(c));
  }
}

}  // namespace

PhiExpr::PhiExpr() : node_(make(Kind::Var)) {}

PhiExpr PhiExpr::variable() { return PhiExpr(make(Kind::Var)); }

PhiExpr PhiExpr::constant(double c) {
  check_positive_param(c, "constant");
  return PhiExpr(make(Kind::Const, c));
}

PhiExpr PhiExpr::phi_alpha(double alpha) {
  check_positive_param(alpha, "phi_alpha exponent");
  return PhiExpr(make(Kind::PhiAlpha, alpha));
}

PhiExpr PhiExpr::max1t() { return PhiExpr(make(Kind::Max1t)); }
PhiExpr PhiExpr::psi_helper() { return PhiExpr(make(Kind::PsiHelper)); }

PhiExpr PhiExpr::computed(std::string name, std::function<double(double)> value,
                          std::function<double(double)> derivative) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Computed;
  n->name = std::move(name);
  n->fn = std::move(value);
  n->dfn = std::move(derivative);
  return PhiExpr(std::move(n));
}

PhiExpr operator+(const PhiExpr& a, const PhiExpr& b) { return PhiExpr(make(Kind::Add, 0.0, a.node_, b.node_)); }
PhiExpr operator*(const PhiExpr& a, const PhiExpr& b) { return PhiExpr(make(Kind::Mul, 0.0, a.node_, b.node_)); }
PhiExpr operator/(const PhiExpr& a, const PhiExpr& b) { return PhiExpr(make(Kind::Div, 0.0, a.node_, b.node_)); }
PhiExpr min(const PhiExpr& a, const PhiExpr& b) { return PhiExpr(make(Kind::Min, 0.0, a.node_, b.node_)); }
PhiExpr max(const PhiExpr& a, const PhiExpr& b) { return PhiExpr(make(Kind::Max, 0.0, a.node_, b.node_)); }
PhiExpr log1p(const PhiExpr& arg) { return PhiExpr(make(Kind::Log1p, 0.0, arg.node_)); }

PhiExpr pow(const PhiExpr& base, double exponent) {
  if (!std::isfinite(exponent)) fail(ErrorKind::InvalidInput, "pow: exponent must be finite");
  return PhiExpr(make(Kind::Pow, exponent, base.node_));
}

PhiExpr PhiExpr::compose(const PhiExpr& inner) const { return PhiExpr(make(Kind::Compose, 0.0, node_, inner.node_)); }

Dual PhiExpr::eval_dual(double t) const {
  if (!(t > 0.0) || !std::isfinite(t)) {
    fail(ErrorKind::InvalidInput, "phi evaluation needs finite t > 0, got " + format_number(t));
  }
  const Dual d = eval(*node_, Dual{t, 1.0}, t);
  if (!std::isfinite(d.value)) singular(*node_, t, "non-finite value");
  return d;
}

double PhiExpr::operator()(double t) const { return eval_dual(t).value; }

std::string PhiExpr::to_string() const { return str(*node_); }

namespace {

nlohmann::json encode(const Node& n) {
  using nlohmann::json;
  auto binary = [&](const char* op) { return json{{"op", op}, {"args", {encode(*n.a), encode(*n.b)}}}; };
  switch (n.kind) {
    case Kind::Var: return json{{"op", "t"}};
    case Kind::Const: return json{{"op", "const"}, {"value", n.param}};
    case Kind::Add: return binary("add");
    case Kind::Mul: return binary("mul");
    case Kind::Div: return binary("div");
    case Kind::Min: return binary("min");
    case Kind::Max: return binary("max");
    case Kind::Pow: return json{{"op", "pow"}, {"arg", encode(*n.a)}, {"exponent", n.param}};
    case Kind::Log1p: return json{{"op", "log1p"}, {"arg", encode(*n.a)}};
    case Kind::Compose: return json{{"op", "compose"}, {"outer", encode(*n.a)}, {"inner", encode(*n.b)}};
    case Kind::PhiAlpha:
    case Kind::Max1t:
    case Kind::PsiHelper: return json{{"op", "builtin"}, {"name", str(n)}};
    case Kind::Computed: return json{{"op", "computed"}, {"name", n.name}};
  }
  return {};
}

PhiExpr builtin(const std::string& name) {
  if (name == "t") return PhiExpr::variable();
  if (name == "max1t") return PhiExpr::max1t();
  if (name == "psi_helper") return PhiExpr::psi_helper();
  const std::string prefix = "phi_alpha:";
  if (name.rfind(prefix, 0) == 0) {
    const std::string rest = name.substr(prefix.size());
    std::size_t used = 0;
    double alpha = 0.0;
    try {
      alpha = std::stod(rest, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != rest.size()) fail(ErrorKind::InvalidInput, "bad phi_alpha exponent in \"" + name + "\"");
    return PhiExpr::phi_alpha(alpha);
  }
  fail(ErrorKind::InvalidInput, "unknown built-in \"" + name + "\"");
}

const nlohmann::json& field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) fail(ErrorKind::InvalidInput, "phi JSON: missing \"" + std::string(key) + "\" in " + j.dump());
  return j.at(key);
}

double number(const nlohmann::json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number()) fail(ErrorKind::InvalidInput, "phi JSON: \"" + std::string(key) + "\" must be a number");
  return v.get<double>();
}

}  // namespace

PhiExpr parse_phi(const nlohmann::json& j) {
  if (j.is_number()) return PhiExpr::constant(j.get<double>());
  if (j.is_string()) return builtin(j.get<std::string>());
  if (!j.is_object()) fail(ErrorKind::InvalidInput, "phi JSON: expected object, string or number");
  const std::string op = field(j, "op").get<std::string>();
  if (op == "t" || op == "var") return PhiExpr::variable();
  if (op == "const") return PhiExpr::constant(number(j, "value"));
  if (op == "builtin") return builtin(field(j, "name").get<std::string>());
  if (op == "phi_alpha") return PhiExpr::phi_alpha(number(j, "alpha"));
  if (op == "max1t" || op == "psi_helper") return builtin(op);
  if (op == "pow" || op == "power") return pow(parse_phi(field(j, "arg")), number(j, "exponent"));
  if (op == "log1p") return log1p(parse_phi(field(j, "arg")));
  if (op == "compose") return parse_phi(field(j, "outer")).compose(parse_phi(field(j, "inner")));
  if (op == "computed") fail(ErrorKind::Unsupported, "phi JSON: computed functions cannot be decoded");
  const auto& args = field(j, "args");
  if (!args.is_array() || args.size() < 2) fail(ErrorKind::InvalidInput, "phi JSON: \"" + op + "\" needs >= 2 args");
  PhiExpr acc = parse_phi(args[0]);
  for (std::size_t i = 1; i < args.size(); ++i) {
    const PhiExpr next = parse_phi(args[i]);
    if (op == "add") {
      acc = acc + next;
    } else if (op == "mul" || op == "multiply") {
      acc = acc * next;
    } else if (op == "div" || op == "divide") {
      if (args.size() != 2) fail(ErrorKind::InvalidInput, "phi JSON: div takes exactly 2 args");
      acc = acc / next;
    } else if (op == "min") {
      acc = min(acc, next);
    } else if (op == "max") {
      acc = max(acc, next);
    } else {
      fail(ErrorKind::InvalidInput, "phi JSON: unknown op \"" + op + "\"");
    }
  }
  return acc;
}

void to_json(nlohmann::json& j, const PhiExpr& phi) { j = encode(phi.node()); }
void from_json(const nlohmann::json& j, PhiExpr& phi) { phi = parse_phi(j); }

std::vector<double> EvaluationGrid::points() const {
  validate();
  return numerics::log_space(t_min, t_max, count);
}

void EvaluationGrid::validate() const {
  if (!(t_min > 0.0) || !std::isfinite(t_max) || !(t_max > t_min) || count < 2) {
    std::ostringstream os;
    os << "grid needs 0 < t_min < t_max < inf and count >= 2, got [" << t_min << ", " << t_max << "] x " << count;
    fail(ErrorKind::InvalidInput, os.str());
  }
}

void to_json(nlohmann::json& j, const EvaluationGrid& g) {
  j = nlohmann::json{{"t_min", g.t_min}, {"t_max", g.t_max}, {"count", g.count}, {"spacing", "log"}};
}

void to_json(nlohmann::json& j, const EquivalenceReport& r) {
  j = nlohmann::json{{"ratio_min", r.ratio_min}, {"ratio_max", r.ratio_max}, {"t_at_min", r.t_at_min},
                     {"t_at_max", r.t_at_max},   {"grid", r.grid},           {"band", {r.band_lo, json_number(r.band_hi)}},
                     {"pass", r.pass}};
}

EquivalenceReport compare_equivalence(const ScalarFunction& a, const ScalarFunction& b, const EvaluationGrid& grid,
                                      double band_lo, double band_hi) {
  EquivalenceReport r;
  r.grid = grid;
  r.band_lo = band_lo;
  r.band_hi = band_hi;
  r.ratio_min = std::numeric_limits<double>::infinity();
  r.ratio_max = -std::numeric_limits<double>::infinity();
  for (double t : grid.points()) {
    const double va = a(t);
    const double vb = b(t);
    if (!(va > 0.0) || !(vb > 0.0) || !std::isfinite(va) || !std::isfinite(vb)) {
      std::ostringstream os;
      os << "equivalence: values at t = " << format_number(t) << " are not positive and finite (" << va << ", " << vb
         << ")";
      fail(ErrorKind::Evaluation, os.str());
    }
    const double q = va / vb;
    if (q < r.ratio_min) {
      r.ratio_min = q;
      r.t_at_min = t;
    }
    if (q > r.ratio_max) {
      r.ratio_max = q;
      r.t_at_max = t;
    }
  }
  r.pass = r.ratio_min >= band_lo && r.ratio_max <= band_hi;
  return r;
}

EquivalenceReport compare_equivalence(const PhiExpr& a, const PhiExpr& b, const EvaluationGrid& grid, double band_lo,
                                      double band_hi) {
  return compare_equivalence([&](double t) { return a(t); }, [&](double t) { return b(t); }, grid, band_lo, band_hi);
}

QuasiconcavityReport is_quasiconcave(const std::vector<double>& t, const std::vector<double>& values, double rel_tol) {
  QuasiconcavityReport r;
  if (t.size() != values.size()) fail(ErrorKind::InvalidInput, "quasiconcavity: size mismatch");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(values[i] > 0.0)) {
      r.pass = false;
      r.t_violation = t[i];
      r.reason = "value is not positive";
      return r;
    }
    if (i == 0) continue;
    if (values[i] < values[i - 1] * (1.0 - rel_tol)) {
      r.pass = false;
      r.t_violation = t[i];
      r.reason = "phi decreases";
      return r;
    }
    if (values[i] / t[i] > values[i - 1] / t[i - 1] * (1.0 + rel_tol)) {
      r.pass = false;
      r.t_violation = t[i];
      r.reason = "phi(t)/t increases";
      return r;
    }
  }
  return r;
}

QuasiconcavityReport is_quasiconcave(const PhiExpr& phi, const EvaluationGrid& grid, double rel_tol) {
  const std::vector<double> t = grid.points();
  std::vector<double> v;
  v.reserve(t.size());
  for (double x : t) v.push_back(phi(x));
  return is_quasiconcave(t, v, rel_tol);
}

PhiExpr associate_fun(const PhiExpr& phi) { return PhiExpr::variable() / phi; }

TildeResult tilde(const PhiExpr& phi, double t, const TildeOptions& options) {
  if (!(t > 0.0) || !std::isfinite(t)) fail(ErrorKind::InvalidInput, "tilde: t must be finite and > 0");
  const double lt = std::log(t);
  auto objective = [&](double lr) {
    const double r = std::exp(lr);
    return t * (phi(r) / r) / std::log1p(t / r);
  };
  const double span = options.bracket_decades * std::log(10.0);
  const double lo = lt - span;
  const double hi = lt + span;
  numerics::Minimum best = numerics::multistart_min(objective, lo, hi, options.starts, options.rel_tol);
  const double edge = 1e-6 * span;
  const double floor_lr = std::log(1e-300);
  const double ceil_lr = std::log(1e300);
  TildeResult result;

  if (best.x <= lo + edge && lo > floor_lr) {
    const numerics::Minimum ext = numerics::multistart_min(objective, floor_lr, lo, options.starts, options.rel_tol);
    if (ext.fx < best.fx) best = ext;
    if (best.x <= floor_lr + edge) {
      // Still decreasing at r = 1e-300: the infimum is a limit, approached like 1/log(t/r).
      const numerics::ZeroLimitSamples lim =
          numerics::limit_toward_zero([&](double r) { return objective(std::log(r)); }, t);
      if (!(lim.limit > 1e-3 * objective(lo))) {
        std::ostringstream os;
        os << "tilde of " << phi.to_string() << " at t = " << format_number(t)
           << ": objective vanishes as r -> 0 (" << format_number(lim.last) << " at r = 1e-300)";
        fail(ErrorKind::DegenerateInfimum, os.str());
      }
      result.value = std::min(lim.limit, best.fx);
      result.minimizer = 0.0;
      result.at_boundary = true;
      return result;
    }
  } else if (best.x >= hi - edge && hi < ceil_lr) {
    const numerics::Minimum ext = numerics::multistart_min(objective, hi, ceil_lr, options.starts, options.rel_tol);
    if (ext.fx < best.fx) best = ext;
    if (best.x >= ceil_lr - edge) result.at_boundary = true;
  }
  result.value = best.fx;
  result.minimizer = std::exp(best.x);
  return result;
}

PhiExpr tilde_function(const PhiExpr& phi, int per_decade) {
  constexpr double lo = 1e-290;
  constexpr double hi = 1e290;
  auto table =
      std::make_shared<numerics::LazyLogTable>([phi](double t) { return tilde(phi, t).value; }, lo, hi, per_decade);
  auto value = [phi, table](double t) { return t < lo || t > hi ? tilde(phi, t).value : table->get()(t); };
  auto derivative = [table, value](double t) {
    if (t >= lo && t <= hi) return table->get().derivative(t);
    const double h = 1e-4 * t;
    return (value(t + h) - value(t - h)) / (2.0 * h);
  };
  return PhiExpr::computed("tilde(" + phi.to_string() + ")", value, derivative);
}

LocalIntegral inverse_integral(const PhiExpr& phi, double t) {
  if (!(t > 0.0) || !std::isfinite(t)) fail(ErrorKind::InvalidInput, "inverse integral: t must be finite and > 0");
  numerics::SeriesOptions opts;
  opts.panel.rel_tol = 1e-12;
  const numerics::SeriesResult s = numerics::integrate_toward_zero([&](double x) { return 1.0 / phi(x); }, t, opts);
  return {s.value, s.converged, s.panels};
}

double psi_marcinkiewicz(const PhiExpr& phi, double t) {
  const LocalIntegral I = inverse_integral(phi, t);
  if (!I.converged) {
    std::ostringstream os;
    os << "1/(" << phi.to_string() << ") is not integrable at 0 (panel contributions stop decaying geometrically after "
       << I.panels << " panels)";
    fail(ErrorKind::NotLocallyIntegrable, os.str());
  }
  return t / I.value;
}

PhiExpr psi_marcinkiewicz_function(const PhiExpr& phi) {
  constexpr double lo = 1e-200;
  constexpr double hi = 1e200;
  const LocalIntegral head = inverse_integral(phi, lo);
  if (!head.converged) psi_marcinkiewicz(phi, lo);
  auto running = std::make_shared<numerics::CumulativeIntegral>([phi](double x) { return 1.0 / phi(x); }, lo, hi, 4,
                                                                head.value);
  auto value = [phi, running](double t) { return t < lo ? psi_marcinkiewicz(phi, t) : t / (*running)(t); };
  auto derivative = [phi, value](double t) {
    const double v = value(t);
    return v / t * (1.0 - v / phi(t));
  };
  return PhiExpr::computed("Psi(" + phi.to_string() + ")", value, derivative);
}

PhiExpr psi_marcinkiewicz_table(const PhiExpr& phi, int per_decade) {
  const PhiExpr exact = psi_marcinkiewicz_function(phi);
  auto table = std::make_shared<numerics::LazyLogTable>([exact](double t) { return exact(t); }, 1e-290, 1e290,
                                                         per_decade);
  return PhiExpr::computed("Psi(" + phi.to_string() + ")", [table](double t) { return table->get()(t); },
                           [table](double t) { return table->get().derivative(t); });
}

double logc_constant(const PhiExpr& phi, const EvaluationGrid& grid) {
  double best = std::numeric_limits<double>::infinity();
  for (double t : grid.points()) best = std::min(best, phi(t) / (t * std::log1p(1.0 / t)));
  return best;
}

ZeroLimit phi_at_zero(const PhiExpr& phi) {
  ZeroLimit z;
  const double tiny = phi(1e-300);
  // Power-law decay (or faster than 1/log^2) between 1e-150 and 1e-300.
  if (tiny < 1e-100 || tiny < 0.25 * phi(1e-150)) {
    z.value = 0.0;
    return z;
  }
  const numerics::ZeroLimitSamples lim = numerics::limit_toward_zero([&](double r) { return phi(r); }, 1.0);
  // phi is nondecreasing, so the limit lies in [0, phi(1e-300)].
  z.value = std::clamp(lim.limit, 0.0, tiny);
  z.settled = std::abs(tiny - z.value) <= 1e-9 * tiny;
  return z;
}

}  // namespace rispace
