#include "rispace/operators.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

#include "rispace/error.hpp"
#include "rispace/format.hpp"
#include "rispace/numerics.hpp"

namespace rispace {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Builds a RunningIntegral on first use; shared by copies of a closure.
class LazyRunning {
 public:
  explicit LazyRunning(std::function<numerics::RunningIntegral()> make) : make_(std::move(make)) {}

  double operator()(double x) const {
    std::call_once(flag_, [this] { table_ = std::make_unique<numerics::RunningIntegral>(make_()); });
    return (*table_)(x);
  }

 private:
  std::function<numerics::RunningIntegral()> make_;
  mutable std::once_flag flag_;
  mutable std::unique_ptr<numerics::RunningIntegral> table_;
};

/// a * x with 0 * inf = 0.
double weighted(double a, double x) { return a == 0.0 ? 0.0 : a * x; }

std::vector<double> merged(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out;
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Piece index i with left_of(i) < t <= b[i]; pieces() when t is past the support.
std::size_t piece_of(const StepFunction& f, double t) {
  const auto b = f.breakpoints();
  return static_cast<std::size_t>(std::lower_bound(b.begin(), b.end(), t) - b.begin());
}

/// Primitive values F(b_i) of a step function.
std::vector<double> knot_primitive(const StepFunction& f) {
  std::vector<double> F(f.pieces());
  double acc = 0.0;
  for (std::size_t i = 0; i < f.pieces(); ++i) {
    acc += f.values()[i] * (f.breakpoints()[i] - f.left_of(i));
    F[i] = acc;
  }
  return F;
}

double step_primitive(const StepFunction& f, const std::vector<double>& F, double t) {
  if (t <= 0.0 || f.is_zero()) return 0.0;
  const std::size_t i = piece_of(f, t);
  if (i == f.pieces()) return F.back();
  const double base = i == 0 ? 0.0 : F[i - 1];
  return base + f.values()[i] * (t - f.left_of(i));
}

std::string factor_name(Factor f) { return f == Factor::S ? "S" : "S'"; }

}  // namespace

Evaluable::Evaluable() : Evaluable(Data{"0", [](double) { return 0.0; }, [](double) { return 0.0; }, {}, 0.0, 0.0, 0.0}) {}

Evaluable::Evaluable(Data data) : data_(std::make_shared<const Data>(std::move(data))) {}

Evaluable scaled(const Evaluable& h, double c) {
  if (!(c >= 0.0) || !std::isfinite(c)) fail(ErrorKind::InvalidInput, "scaled closure: factor must be finite and >= 0");
  return Evaluable({format_number(c) + "*" + h.name(), [h, c](double t) { return c * h(t); },
                    [h, c](double t) { return weighted(c, h.primitive(t)); }, h.kinks(), weighted(c, h.at_zero()),
                    weighted(c, h.total()), c == 0.0 ? 0.0 : h.support_end()});
}

Evaluable combine(double a, const Evaluable& h, double b, const Evaluable& k) {
  if (!(a >= 0.0) || !(b >= 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    fail(ErrorKind::InvalidInput, "combined closure: weights must be finite and >= 0");
  }
  const double end = std::max(a == 0.0 ? 0.0 : h.support_end(), b == 0.0 ? 0.0 : k.support_end());
  return Evaluable({format_number(a) + "*" + h.name() + " + " + format_number(b) + "*" + k.name(),
                    [=](double t) { return weighted(a, h(t)) + weighted(b, k(t)); },
                    [=](double t) { return weighted(a, h.primitive(t)) + weighted(b, k.primitive(t)); },
                    merged(h.kinks(), k.kinks()), weighted(a, h.at_zero()) + weighted(b, k.at_zero()),
                    weighted(a, h.total()) + weighted(b, k.total()), end});
}

Evaluable as_evaluable(const StepFunction& f) {
  auto F = std::make_shared<const std::vector<double>>(knot_primitive(f));
  return Evaluable({"step", [f](double t) { return f(t); }, [f, F](double t) { return step_primitive(f, *F, t); },
                    std::vector<double>(f.breakpoints().begin(), f.breakpoints().end()),
                    f.is_zero() ? 0.0 : f.values()[0], f.integral(), f.support_end()});
}

Evaluable as_evaluable(const PhiExpr& w) {
  auto running = std::make_shared<LazyRunning>([w] {
    return numerics::RunningIntegral([w](double s) { return w(s); }, numerics::running_nodes({}),
                                     numerics::RunningIntegral::From::Zero);
  });
  const double tiny = w(1e-300);
  const double at_zero = tiny > 1e100 ? kInf : tiny;
  double total = kInf;
  const numerics::SeriesResult head = numerics::integrate_toward_zero([&](double s) { return w(s); }, 1.0);
  const numerics::SeriesResult tail = numerics::integrate_toward_infinity([&](double s) { return w(s); }, 1.0);
  if (head.converged && tail.converged) total = head.value + tail.value;
  return Evaluable({w.to_string(), [w](double t) { return w(t); },
                    [running](double t) { return (*running)(t); }, {}, at_zero, total, kInf});
}

Evaluable hardy(const StepFunction& f) {
  struct Exact {
    StepFunction f;
    std::vector<double> F;
    std::vector<double> Q;
    double mass = 0.0;

    double primitive_f(double t) const { return step_primitive(f, F, t); }

    // int_0^t F(u)/u du, piecewise v (b - a) + (F_{i-1} - v t_{i-1}) log(b/a).
    double primitive_S(double t) const {
      if (t <= 0.0 || f.is_zero()) return 0.0;
      const std::size_t i = piece_of(f, t);
      if (i == f.pieces()) return Q.back() + mass * numerics::log_ratio(t, f.support_end());
      return (i == 0 ? 0.0 : Q[i - 1]) + segment(i, t);
    }

    double segment(std::size_t i, double b) const {
      const double v = f.values()[i];
      if (i == 0) return v * b;
      const double a = f.left_of(i);
      return v * (b - a) + (F[i - 1] - v * a) * numerics::log_ratio(b, a);
    }
  };
  auto e = std::make_shared<Exact>();
  e->f = f;
  e->F = knot_primitive(f);
  e->mass = f.integral();
  e->Q.resize(f.pieces());
  for (std::size_t i = 0; i < f.pieces(); ++i) e->Q[i] = (i == 0 ? 0.0 : e->Q[i - 1]) + e->segment(i, f.breakpoints()[i]);
  return Evaluable({"S(step)", [e](double t) { return e->primitive_f(t) / t; },
                    [e](double t) { return e->primitive_S(t); },
                    std::vector<double>(f.breakpoints().begin(), f.breakpoints().end()),
                    f.is_zero() ? 0.0 : f.values()[0], f.is_zero() ? 0.0 : kInf, f.is_zero() ? 0.0 : kInf});
}

Evaluable hardy_adjoint(const StepFunction& f) {
  struct Exact {
    StepFunction f;
    std::vector<double> F;
    // suffix[i] = sum_{j >= i} v_j log(b_j / b_{j-1}), for i >= 1.
    std::vector<double> suffix;

    double value(double t) const {
      if (f.is_zero() || t >= f.support_end()) return 0.0;
      if (t <= 0.0) return at_zero();
      const std::size_t i = piece_of(f, t);
      const double v = f.values()[i];
      return (v == 0.0 ? 0.0 : v * numerics::log_ratio(f.breakpoints()[i], t)) + suffix[i + 1];
    }

    double at_zero() const {
      if (f.is_zero()) return 0.0;
      return f.values()[0] > 0.0 ? kInf : suffix[1];
    }
  };
  auto e = std::make_shared<Exact>();
  e->f = f;
  e->F = knot_primitive(f);
  const std::size_t n = f.pieces();
  e->suffix.assign(n + 1, 0.0);
  for (std::size_t i = n; i-- > 1;) {
    e->suffix[i] = e->suffix[i + 1] + f.values()[i] * numerics::log_ratio(f.breakpoints()[i], f.left_of(i));
  }
  return Evaluable({"S'(step)", [e](double t) { return e->value(t); },
                    [e](double t) { return t <= 0.0 ? 0.0 : step_primitive(e->f, e->F, t) + t * e->value(t); },
                    std::vector<double>(f.breakpoints().begin(), f.breakpoints().end()), e->at_zero(), f.integral(),
                    f.support_end()});
}

Evaluable hardy(const Evaluable& h) {
  auto running = std::make_shared<LazyRunning>([h] {
    return numerics::RunningIntegral([h](double s) { return h.primitive(s) / s; }, numerics::running_nodes(h.kinks()),
                                     numerics::RunningIntegral::From::Zero);
  });
  const bool zero = h.total() == 0.0;
  return Evaluable({"S(" + h.name() + ")", [h](double t) { return h.primitive(t) / t; },
                    [running](double t) { return (*running)(t); }, h.kinks(), h.at_zero(), zero ? 0.0 : kInf,
                    zero ? 0.0 : kInf});
}

Evaluable hardy_adjoint(const Evaluable& h) {
  const double end = h.support_end();
  auto running = std::make_shared<LazyRunning>([h, end] {
    return numerics::RunningIntegral([h](double s) { return h(s) / s; }, numerics::running_nodes(h.kinks(), end),
                                     numerics::RunningIntegral::From::End, end);
  });
  auto value = [running, end](double t) { return t >= end ? 0.0 : (*running)(t); };
  const double at_zero = h.at_zero() > 0.0 ? kInf : value(1e-300);
  return Evaluable({"S'(" + h.name() + ")", value,
                    [h, value](double t) { return t <= 0.0 ? 0.0 : h.primitive(t) + t * value(t); }, h.kinks(),
                    at_zero, h.total(), end});
}

double apply_S(const StepFunction& f, double t) {
  if (!(t > 0.0)) fail(ErrorKind::InvalidInput, "S f(t) needs t > 0");
  return primitive(f)(t) / t;
}

double apply_Sprime(const StepFunction& f, double t) {
  if (!(t >= 0.0)) fail(ErrorKind::InvalidInput, "S' f(t) needs t >= 0");
  double total = 0.0;
  for (std::size_t i = 0; i < f.pieces(); ++i) {
    const double b = f.breakpoints()[i];
    const double v = f.values()[i];
    if (v == 0.0 || t >= b) continue;
    const double a = std::max(t, f.left_of(i));
    if (a == 0.0) return kInf;
    total += v * numerics::log_ratio(b, a);
  }
  return total;
}

double ssprime_char(double t0, double r) {
  if (!(t0 > 0.0) || !(r > 0.0)) fail(ErrorKind::InvalidInput, "ssprime_char needs t0, r > 0");
  return r <= t0 ? 1.0 + numerics::log_ratio(t0, r) : t0 / r;
}

OperatorSpec OperatorSpec::compose(std::vector<Factor> factors) { return {Composition{std::move(factors)}}; }

OperatorSpec OperatorSpec::rank_one(PhiExpr weight) {
  auto closure = std::make_shared<const Evaluable>(as_evaluable(weight));
  return {RankOne{std::move(weight), std::move(closure)}};
}

OperatorSpec OperatorSpec::combo(double alpha, OperatorSpec first, double beta, OperatorSpec second) {
  return {LinearCombo{alpha, std::make_shared<const OperatorSpec>(std::move(first)), beta,
                      std::make_shared<const OperatorSpec>(std::move(second))}};
}

std::string OperatorSpec::to_string() const {
  struct Visitor {
    std::string operator()(const HardyS&) const { return "S"; }
    std::string operator()(const AdjointSprime&) const { return "S'"; }
    std::string operator()(const Composition& c) const {
      std::string out;
      for (Factor f : c.factors) out += factor_name(f);
      return out;
    }
    std::string operator()(const RankOne& r) const { return "T_w[w = " + r.weight.to_string() + "]"; }
    std::string operator()(const LinearCombo& c) const {
      return "(" + format_number(c.alpha) + " " + c.first->to_string() + " + " + format_number(c.beta) + " " +
             c.second->to_string() + ")";
    }
  };
  return std::visit(Visitor{}, kind);
}

WeightCheck check_rank_one_weight(const PhiExpr& w, const EvaluationGrid& grid) {
  WeightCheck r;
  double prev = kInf;
  for (double t : grid.points()) {
    const double v = w(t);
    const double floor = 0.5 / std::sqrt(t);
    r.margin = std::min(r.margin, v / floor);
    if (r.pass && !(v > 0.0)) {
      r = {false, t, "weight is not positive", r.margin};
    } else if (r.pass && v > prev * (1.0 + 1e-12)) {
      r = {false, t, "weight increases", r.margin};
    } else if (r.pass && v < floor * (1.0 - 1e-12)) {
      r = {false, t, "weight falls below r^{-1/2}/2", r.margin};
    }
    prev = v;
  }
  return r;
}

void validate(const OperatorSpec& spec, const EvaluationGrid& grid) {
  if (const auto* c = std::get_if<Composition>(&spec.kind)) {
    if (c->factors.empty()) fail(ErrorKind::InvalidOperator, "composition needs at least one factor");
  } else if (const auto* r = std::get_if<RankOne>(&spec.kind)) {
    const WeightCheck check = check_rank_one_weight(r->weight, grid);
    if (!check.pass) {
      fail(ErrorKind::InvalidOperator, "rank-one weight " + r->weight.to_string() + ": " + check.reason +
                                           " at t = " + format_number(check.t_violation));
    }
  } else if (const auto* l = std::get_if<LinearCombo>(&spec.kind)) {
    if (!(l->alpha >= 0.0) || !(l->beta >= 0.0) || !std::isfinite(l->alpha) || !std::isfinite(l->beta)) {
      fail(ErrorKind::InvalidOperator, "linear combination needs finite alpha, beta >= 0");
    }
    if (!l->first || !l->second) fail(ErrorKind::InvalidOperator, "linear combination is missing an operand");
    validate(*l->first, grid);
    validate(*l->second, grid);
  }
}

double rank_one_pairing(const PhiExpr& w, const StepFunction& f) {
  double pairing = 0.0;
  for (std::size_t i = 0; i < f.pieces(); ++i) {
    const double v = f.values()[i];
    if (v == 0.0) continue;
    const double a = f.left_of(i);
    const double b = f.breakpoints()[i];
    double piece = 0.0;
    if (a == 0.0) {
      const numerics::SeriesResult s = numerics::integrate_toward_zero([&](double x) { return w(x); }, b);
      if (!s.converged) fail(ErrorKind::InvalidOperator, "rank-one weight is not integrable at 0");
      piece = s.value;
    } else {
      piece = numerics::integrate_log_scale([&](double x) { return w(x); }, a, b);
    }
    pairing += v * piece;
  }
  return pairing;
}

namespace {

Evaluable apply_validated(const OperatorSpec& spec, const StepFunction& f);

struct ApplyVisitor {
  const StepFunction& f;

  Evaluable operator()(const HardyS&) const { return hardy(f); }
  Evaluable operator()(const AdjointSprime&) const { return hardy_adjoint(f); }

  Evaluable operator()(const Composition& c) const {
    auto it = c.factors.rbegin();
    Evaluable h;
    if (c.factors.size() >= 2 && it[0] != it[1]) {
      // S S' = S' S = S + S' on steps.
      h = combine(1.0, hardy(f), 1.0, hardy_adjoint(f));
      it += 2;
    } else {
      h = *it == Factor::S ? hardy(f) : hardy_adjoint(f);
      ++it;
    }
    for (; it != c.factors.rend(); ++it) h = *it == Factor::S ? hardy(h) : hardy_adjoint(h);
    return h;
  }

  Evaluable operator()(const RankOne& r) const {
    return scaled(r.closure ? *r.closure : as_evaluable(r.weight), rank_one_pairing(r.weight, f));
  }

  Evaluable operator()(const LinearCombo& c) const {
    return combine(c.alpha, apply_validated(*c.first, f), c.beta, apply_validated(*c.second, f));
  }
};

Evaluable apply_validated(const OperatorSpec& spec, const StepFunction& f) {
  return std::visit(ApplyVisitor{f}, spec.kind);
}

}  // namespace

Evaluable apply(const OperatorSpec& spec, const StepFunction& f) {
  validate(spec);
  return apply_validated(spec, f);
}

double apply(const OperatorSpec& spec, const StepFunction& f, double t) { return apply(spec, f)(t); }

OperatorSpec adjoint(const OperatorSpec& spec) {
  struct Visitor {
    OperatorSpec operator()(const HardyS&) const { return OperatorSpec::Sprime(); }
    OperatorSpec operator()(const AdjointSprime&) const { return OperatorSpec::S(); }
    OperatorSpec operator()(const Composition& c) const {
      std::vector<Factor> out(c.factors.rbegin(), c.factors.rend());
      for (Factor& f : out) f = f == Factor::S ? Factor::Sprime : Factor::S;
      return OperatorSpec::compose(std::move(out));
    }
    OperatorSpec operator()(const RankOne& r) const { return {r}; }
    OperatorSpec operator()(const LinearCombo& c) const {
      return OperatorSpec::combo(c.alpha, adjoint(*c.first), c.beta, adjoint(*c.second));
    }
  };
  return std::visit(Visitor{}, spec.kind);
}

void to_json(nlohmann::json& j, const OperatorSpec& spec) {
  using nlohmann::json;
  struct Visitor {
    json operator()(const HardyS&) const { return "S"; }
    json operator()(const AdjointSprime&) const { return "Sprime"; }
    json operator()(const Composition& c) const {
      json factors = json::array();
      for (Factor f : c.factors) factors.push_back(f == Factor::S ? "S" : "Sprime");
      return json{{"op", "compose"}, {"factors", factors}};
    }
    json operator()(const RankOne& r) const { return json{{"op", "rank_one"}, {"weight", r.weight}}; }
    json operator()(const LinearCombo& c) const {
      return json{{"op", "combo"}, {"alpha", c.alpha}, {"first", *c.first}, {"beta", c.beta}, {"second", *c.second}};
    }
  };
  j = std::visit(Visitor{}, spec.kind);
}

namespace {

Factor parse_factor(const nlohmann::json& j) {
  const std::string name = j.is_string() ? j.get<std::string>() : j.value("op", std::string());
  if (name == "S") return Factor::S;
  if (name == "Sprime" || name == "S'") return Factor::Sprime;
  fail(ErrorKind::InvalidInput, "operator JSON: unknown factor " + j.dump());
}

}  // namespace

OperatorSpec parse_operator(const nlohmann::json& j) {
  if (j.is_string()) {
    return parse_factor(j) == Factor::S ? OperatorSpec::S() : OperatorSpec::Sprime();
  }
  if (!j.is_object() || !j.contains("op")) fail(ErrorKind::InvalidInput, "operator JSON: expected {\"op\": ...}");
  const std::string op = j.at("op").get<std::string>();
  if (op == "S" || op == "Sprime" || op == "S'") return parse_operator(nlohmann::json(op));
  if (op == "compose") {
    if (!j.contains("factors") || !j.at("factors").is_array()) {
      fail(ErrorKind::InvalidInput, "operator JSON: compose needs a \"factors\" array");
    }
    std::vector<Factor> factors;
    for (const auto& f : j.at("factors")) factors.push_back(parse_factor(f));
    if (factors.empty()) fail(ErrorKind::InvalidOperator, "composition needs at least one factor");
    return OperatorSpec::compose(std::move(factors));
  }
  if (op == "rank_one") {
    if (!j.contains("weight")) fail(ErrorKind::InvalidInput, "operator JSON: rank_one needs \"weight\"");
    return OperatorSpec::rank_one(parse_phi(j.at("weight")));
  }
  if (op == "combo") {
    for (const char* key : {"alpha", "beta", "first", "second"}) {
      if (!j.contains(key)) fail(ErrorKind::InvalidInput, std::string("operator JSON: combo needs \"") + key + "\"");
    }
    return OperatorSpec::combo(j.at("alpha").get<double>(), parse_operator(j.at("first")), j.at("beta").get<double>(),
                               parse_operator(j.at("second")));
  }
  fail(ErrorKind::InvalidInput, "operator JSON: unknown op \"" + op + "\"");
}

void from_json(const nlohmann::json& j, OperatorSpec& spec) { spec = parse_operator(j); }

}  // namespace rispace
