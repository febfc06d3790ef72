#include "rispace/optimal.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

#include "rispace/error.hpp"
#include "rispace/format.hpp"
#include "rispace/numerics.hpp"
#include "rispace/operators.hpp"

namespace rispace {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Evaluable s_of_indicator(double t) { return hardy(StepFunction::indicator(0.0, t)); }

// S^2 chi_(0,t): 1 up to t, then t (1 + log(s/t)) / s.
Evaluable s2_of_indicator(double t) {
  auto value = [t](double s) { return s <= t ? 1.0 : t * (1.0 + numerics::log_ratio(s, t)) / s; };
  auto primitive = [t](double x) {
    if (x <= t) return x;
    const double l = numerics::log_ratio(x, t);
    return t * (1.0 + l + 0.5 * l * l);
  };
  return Evaluable({"S^2 chi(0," + format_number(t) + ")", value, primitive, {t}, 1.0, kInf, kInf});
}

// 1 / (1 + s/t).
Evaluable rational_probe(double t) {
  return Evaluable({"1/(1+s/" + format_number(t) + ")", [t](double s) { return t / (t + s); },
                    [t](double x) { return t * std::log1p(x / t); }, {t}, 1.0, kInf, kInf});
}

PhiExpr lazy_table(std::string name, std::function<numerics::LogTable()> make) {
  auto table = std::make_shared<numerics::LazyLogTable>(std::move(make));
  return PhiExpr::computed(std::move(name), [table](double t) { return table->get()(t); },
                           [table](double t) { return table->get().derivative(t); });
}

// A quasiconcave function on log nodes. Nodes near the ends where f is not
// finite (the sup behind it lies past the representable range) are filled
// by extending the last finite segment in log-log form, slope clamped to
// [0, 1].
numerics::LogTable quasiconcave_table(const std::function<double(double)>& f, double lo, double hi, int per_decade) {
  const int count = static_cast<int>(std::lround((std::log10(hi) - std::log10(lo)) * per_decade)) + 1;
  const std::vector<double> t = numerics::log_space(lo, hi, count);
  std::vector<double> v(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) v[i] = f(t[i]);
  auto good = [&](std::size_t i) { return std::isfinite(v[i]) && v[i] > 0.0; };
  std::size_t a = 0;
  while (a < v.size() && !good(a)) ++a;
  std::size_t b = v.size();
  while (b > a && !good(b - 1)) --b;
  if (b - a < 2) fail(ErrorKind::Evaluation, "table: fewer than two finite values");
  for (std::size_t i = a; i < b; ++i) {
    if (!good(i)) fail(ErrorKind::Evaluation, "table: value at " + format_number(t[i]) + " is not positive and finite");
  }
  auto slope = [&](std::size_t i, std::size_t j) {
    return std::clamp(std::log(v[j] / v[i]) / std::log(t[j] / t[i]), 0.0, 1.0);
  };
  const double left = slope(a, a + 1);
  for (std::size_t i = a; i-- > 0;) v[i] = v[a] * std::pow(t[i] / t[a], left);
  const double right = slope(b - 2, b - 1);
  for (std::size_t i = b; i < v.size(); ++i) v[i] = v[b - 1] * std::pow(t[i] / t[b - 1], right);
  return numerics::LogTable(t, v);
}

// ||S chi_(0,t)||_X; for Lorentz X this is int_1^inf phi(t u)/u^2 du.
double domain_value(const SpaceSpec& x, double t) {
  const auto* l = std::get_if<Lorentz>(&x.kind);
  if (!l) return norm(x, s_of_indicator(t));
  const numerics::SeriesResult s =
      numerics::integrate_toward_infinity([&](double u) { return l->phi(t * u) / u / u; }, 1.0);
  return s.converged ? s.value : kInf;
}

// t int_t^inf phi(s)/s^2 ds = int_1^inf phi(t u)/u^2 du on log nodes,
// accumulated from the right in this scaled form.
numerics::LogTable lorentz_domain_table(const PhiExpr& phi, double lo, double hi, int per_decade) {
  const int count = static_cast<int>(std::ceil((std::log10(hi) - std::log10(lo)) * per_decade)) + 1;
  std::vector<double> t = numerics::log_space(lo, hi, count);
  const std::size_t n = t.size();
  const numerics::SeriesResult tail =
      numerics::integrate_toward_infinity([&](double u) { return phi(t.back() * u) / u / u; }, 1.0);
  if (!tail.converged) fail(ErrorKind::Existence, "domain: int_t^inf phi(s)/s^2 ds diverges");
  numerics::AdaptiveOptions opts;
  opts.rel_tol = 1e-12;
  std::vector<double> W(n);
  W[n - 1] = tail.value;
  for (std::size_t k = n - 1; k-- > 0;) {
    const double a = t[k];
    const double step = numerics::integrate([&](double u) { return phi(a * u) / u / u; }, 1.0, t[k + 1] / a, opts);
    W[k] = step + a / t[k + 1] * W[k + 1];
  }
  return numerics::LogTable(std::move(t), std::move(W));
}

FundamentalBracket make_bracket(const EvaluationGrid& grid, PhiExpr lower, PhiExpr upper) {
  FundamentalBracket b;
  b.grid = grid;
  b.t = grid.points();
  for (double t : b.t) {
    b.lower.push_back(lower(t));
    b.upper.push_back(upper(t));
  }
  b.lower_fn = std::move(lower);
  b.upper_fn = std::move(upper);
  return b;
}

const PhiExpr zero_function = PhiExpr::computed("0", [](double) { return 0.0; }, [](double) { return 0.0; });

EquivalenceReport report_from_ratios(const std::vector<double>& t, const std::vector<double>& ratio,
                                     const EvaluationGrid& grid) {
  EquivalenceReport r;
  r.grid = grid;
  r.ratio_min = kInf;
  r.ratio_max = -kInf;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (ratio[i] < r.ratio_min) {
      r.ratio_min = ratio[i];
      r.t_at_min = t[i];
    }
    if (ratio[i] > r.ratio_max) {
      r.ratio_max = ratio[i];
      r.t_at_max = t[i];
    }
  }
  r.band_lo = 0.0;
  r.band_hi = kInf;
  return r;
}

// t int_t^inf q(s)/s^2 ds / phi(t) at each grid point.
std::vector<double> tail_ratio(const PhiExpr& phi, const PhiExpr& q, const std::vector<double>& t) {
  auto integrand = [&](double s) { return q(s) / s / s; };
  std::vector<double> out(t.size(), kInf);
  const numerics::SeriesResult tail = numerics::integrate_toward_infinity(integrand, t.back());
  if (!tail.converged) return out;
  double I = tail.value;
  for (std::size_t k = t.size(); k-- > 0;) {
    if (k + 1 < t.size()) I += numerics::integrate(integrand, t[k], t[k + 1]);
    out[k] = I * t[k] / phi(t[k]);
  }
  return out;
}

EquivalenceReport lorentz_identity(const PhiExpr& phi, const PhiExpr& tilde_fn, const EvaluationGrid& grid) {
  const std::vector<double> t = grid.points();
  EquivalenceReport r = report_from_ratios(t, tail_ratio(phi, tilde_fn, t), grid);
  r.pass = std::isfinite(r.ratio_max);
  return r;
}

}  // namespace

double FundamentalBracket::width() const {
  double w = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) w = std::max(w, upper[i] / lower[i] - 1.0);
  return w;
}

ExistenceResult existence_range(const SpaceSpec& x) {
  ExistenceResult r;
  if (const auto* m = std::get_if<Marcinkiewicz>(&x.kind)) {
    const LocalIntegral I = inverse_integral(m->phi, 1.0);
    r.exists = I.converged;
    r.norm = I.converged ? I.value : kInf;
    r.diagnostic = I.converged ? "int_0^1 ds/phi(s) = " + format_number(I.value)
                               : "1/phi is not integrable at 0: int_0^1 ds/phi(s) diverges (" +
                                     std::to_string(I.panels) + " panels without geometric decay)";
    return r;
  }
  if (std::holds_alternative<WeakLorentz>(x.kind)) {
    r.norm = kInf;
    r.diagnostic = "unsupported: no associate space for " + x.to_string();
    return r;
  }
  const SpaceSpec dual = associate(x);
  r.norm = norm(dual, hardy_adjoint(StepFunction::indicator(0.0, 1.0)));
  r.exists = std::isfinite(r.norm);
  r.diagnostic = r.exists ? "||log+(1/t)|| in " + dual.to_string() + " = " + format_number(r.norm)
                          : "log+(1/t) is not in " + dual.to_string() + ": its norm diverges";
  return r;
}

ExistenceResult existence_domain(const SpaceSpec& x) {
  ExistenceResult r;
  r.norm = norm(x, s_of_indicator(1.0));
  r.exists = std::isfinite(r.norm);
  r.diagnostic = r.exists ? "||min(1, 1/s)|| in " + x.to_string() + " = " + format_number(r.norm)
                          : "min(1, 1/s) is not in " + x.to_string() + ": its norm diverges";
  return r;
}

TildeResult psi_lorentz(const PhiExpr& phi, double t) {
  if (!(t > 0.0) || !std::isfinite(t)) fail(ErrorKind::InvalidInput, "Psi: t must be finite and > 0");
  const double lt = std::log(t);
  auto objective = [&](double lr) { return t * (phi(std::exp(lr)) / std::exp(lr)) / (1.0 + (lt - lr)); };
  const double span = 8.0 * std::log(10.0);
  const double floor_lr = std::log(1e-300);
  const double edge = 1e-6 * span;
  double lo = std::max(lt - span, floor_lr);
  numerics::Minimum best = numerics::multistart_min(objective, lo, lt, 32, 1e-9);
  TildeResult result;
  if (best.x <= lo + edge && lo > floor_lr) {
    const numerics::Minimum ext = numerics::multistart_min(objective, floor_lr, lo, 32, 1e-9);
    if (ext.fx < best.fx) best = ext;
    lo = floor_lr;
  }
  if (best.x <= floor_lr + edge) {
    const numerics::ZeroLimitSamples lim =
        numerics::limit_toward_zero([&](double r) { return objective(std::log(r)); }, t);
    if (!(lim.limit > 1e-3 * objective(std::max(lt - span, floor_lr)))) {
      fail(ErrorKind::DegenerateInfimum, "Psi of " + phi.to_string() + " at t = " + format_number(t) +
                                             ": objective vanishes as r -> 0");
    }
    result.value = std::min(lim.limit, best.fx);
    result.at_boundary = true;
    return result;
  }
  result.value = best.fx;
  result.minimizer = std::exp(best.x);
  return result;
}

PhiExpr psi_lorentz_function(const PhiExpr& phi, int per_decade) {
  constexpr double lo = 1e-290;
  constexpr double hi = 1e290;
  auto table = std::make_shared<numerics::LazyLogTable>([phi](double t) { return psi_lorentz(phi, t).value; }, lo,
                                                         hi, per_decade);
  auto value = [phi, table](double t) { return t < lo || t > hi ? psi_lorentz(phi, t).value : table->get()(t); };
  auto derivative = [table, value](double t) {
    if (t >= lo && t <= hi) return table->get().derivative(t);
    const double h = 1e-4 * t;
    return (value(t + h) - value(t - h)) / (2.0 * h);
  };
  return PhiExpr::computed("PsiLambda(" + phi.to_string() + ")", value, derivative);
}

double DomainResult::norm(const StepFunction& f) const {
  if (!target) fail(ErrorKind::Unsupported, "domain norm: only a fundamental-function bracket is known");
  return rispace::norm(*target, hardy(rearrange(f).function()));
}

RangeResult range_of_marcinkiewicz(const PhiExpr& phi, const EvaluationGrid& grid) {
  grid.validate();
  const PhiExpr psi = psi_marcinkiewicz_function(phi);
  const PhiExpr table = psi_marcinkiewicz_table(phi);
  RangeResult r;
  r.closed_form = SpaceSpec::marcinkiewicz(table);
  r.fundamental = make_bracket(grid, psi, psi);
  r.fundamental.lower_fn = table;
  r.fundamental.upper_fn = table;
  r.notes.push_back("range and restricted range coincide: M with Psi(t) = t / int_0^t ds/phi(s)");
  return r;
}

RangeResult range_of_lorentz(const PhiExpr& phi, const EvaluationGrid& grid) {
  grid.validate();
  const double c = logc_constant(phi, grid);
  if (!(c > 0.0)) {
    fail(ErrorKind::Existence, "range of S on Lambda[" + phi.to_string() +
                                   "]: phi(t) >= c t log(1 + 1/t) fails on the grid (c = " + format_number(c) + ")");
  }
  const PhiExpr lower = psi_lorentz_function(phi);
  const PhiExpr upper = tilde_function(phi);
  RangeResult r;
  r.fundamental.grid = grid;
  r.fundamental.t = grid.points();
  try {
    for (double t : r.fundamental.t) {
      r.fundamental.lower.push_back(psi_lorentz(phi, t).value);
      r.fundamental.upper.push_back(tilde(phi, t).value);
    }
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::DegenerateInfimum) throw;
    fail(ErrorKind::Existence, std::string("range of S on Lambda[") + phi.to_string() + "]: " + e.what());
  }
  r.fundamental.lower_fn = lower;
  r.fundamental.upper_fn = upper;
  r.notes.push_back("bracket: Psi <= fundamental <= tilde phi <= 3 Psi");
  const EquivalenceReport identity = lorentz_identity(phi, upper, grid);
  if (identity.pass) {
    r.closed_form = SpaceSpec::lorentz(upper);
    r.notes.push_back("identified with Lambda[tilde phi]: t int_t^inf tilde phi(s)/s^2 ds <= " +
                      format_number(identity.ratio_max) + " phi(t) on the grid");
  } else {
    r.notes.push_back("not a Lorentz space: int_t^inf tilde phi(s)/s^2 ds diverges or is unbounded against phi/t");
  }
  return r;
}

RangeResult optimal_range(const SpaceSpec& x, const EvaluationGrid& grid) {
  const ExistenceResult e = existence_range(x);
  if (!e.exists) fail(ErrorKind::Existence, "range of S on " + x.to_string() + ": " + e.diagnostic);
  struct Visitor {
    const EvaluationGrid& grid;
    RangeResult operator()(const Lorentz& s) const { return range_of_lorentz(s.phi, grid); }
    RangeResult operator()(const Marcinkiewicz& s) const { return range_of_marcinkiewicz(s.phi, grid); }
    RangeResult operator()(const WeakLorentz& s) const {
      fail(ErrorKind::Unsupported, "range of S on " + SpaceSpec{s}.to_string());
    }
    RangeResult operator()(const L1plusLinf&) const {
      return range_of_lorentz(min(PhiExpr::constant(1.0), PhiExpr::variable()), grid);
    }
    RangeResult operator()(const L1capLinf&) const { return range_of_marcinkiewicz(PhiExpr::max1t(), grid); }
  };
  return std::visit(Visitor{grid}, x.kind);
}

EquivalenceReport lorentz_range_is_lorentz(const PhiExpr& phi, const EvaluationGrid& grid) {
  grid.validate();
  return lorentz_identity(phi, tilde_function(phi), grid);
}

EquivalenceReport lorentz_lorentz_two_sided(const PhiExpr& phi, const EvaluationGrid& grid) {
  EquivalenceReport r = lorentz_range_is_lorentz(phi, grid);
  r.pass = std::isfinite(r.ratio_max) && r.ratio_min > 0.0;
  return r;
}

PhiExpr domain_fundamental_function(const SpaceSpec& x, int per_decade) {
  if (const auto* l = std::get_if<Lorentz>(&x.kind)) {
    return lazy_table("W[" + x.to_string() + "]",
                      [phi = l->phi, per_decade] { return lorentz_domain_table(phi, 1e-280, 1e280, per_decade); });
  }
  return lazy_table("W[" + x.to_string() + "]", [x, per_decade] {
    return quasiconcave_table([&x](double t) { return norm(x, s_of_indicator(t)); }, 1e-280, 1e280, per_decade);
  });
}

DomainResult domain(const SpaceSpec& x, const EvaluationGrid& grid) {
  grid.validate();
  const ExistenceResult e = existence_domain(x);
  if (!e.exists) fail(ErrorKind::Existence, "domain of S into " + x.to_string() + ": " + e.diagnostic);
  DomainResult d;
  d.target = x;
  const std::vector<double> t = grid.points();
  std::vector<double> W;
  for (double s : t) W.push_back(domain_value(x, s));
  const PhiExpr fn = domain_fundamental_function(x);
  d.fundamental.grid = grid;
  d.fundamental.t = t;
  d.fundamental.lower = W;
  d.fundamental.upper = W;
  d.fundamental.lower_fn = fn;
  d.fundamental.upper_fn = fn;
  const QuasiconcavityReport q = is_quasiconcave(t, W, 1e-9);
  if (!q.pass) d.notes.push_back("W is not quasiconcave on the grid: " + q.reason + " at t = " + format_number(q.t_violation));
  d.notes.push_back("W(t) = ||min(1, t/s)||; grid values direct, off-grid values from a log table");
  return d;
}

EquivalenceReport domain_iterate_check(const SpaceSpec& x, const EvaluationGrid& grid) {
  grid.validate();
  if (!std::isfinite(norm(x, s2_of_indicator(1.0)))) {
    fail(ErrorKind::Existence, "domain of S^2 into " + x.to_string() + ": S^2 chi_(0,1) has infinite norm");
  }
  const std::vector<double> t = grid.points();
  std::vector<double> ratio;
  for (double s : t) {
    const double direct = norm(x, s2_of_indicator(s));
    const double nested = norm(x, hardy(s_of_indicator(s)));
    ratio.push_back(nested / direct);
  }
  EquivalenceReport r = report_from_ratios(t, ratio, grid);
  r.band_lo = 1.0 - 1e-6;
  r.band_hi = 1.0 + 1e-6;
  r.pass = r.ratio_min >= r.band_lo && r.ratio_max <= r.band_hi;
  return r;
}

DomainResult functor_DX(const SpaceSpec& x, const EvaluationGrid& grid) {
  RangeResult inner;
  try {
    inner = optimal_range(x, grid);
  } catch (const Error& e) {
    fail(e.kind(), std::string("inner range stage: ") + e.what());
  }
  if (inner.closed_form) {
    DomainResult d;
    try {
      d = domain(*inner.closed_form, grid);
    } catch (const Error& e) {
      fail(e.kind(), std::string("outer domain stage: ") + e.what());
    }
    d.notes.insert(d.notes.begin(), "inner range " + inner.closed_form->to_string());
    return d;
  }
  // Lambda_Psi-type and M-type spaces with the bracketing fundamentals sandwich the range.
  const SpaceSpec small = SpaceSpec::marcinkiewicz(inner.fundamental.lower_fn);
  const SpaceSpec large = SpaceSpec::lorentz(inner.fundamental.upper_fn);
  for (const SpaceSpec* s : {&small, &large}) {
    const ExistenceResult e = existence_domain(*s);
    if (!e.exists) fail(ErrorKind::Existence, "outer domain stage: " + e.diagnostic);
  }
  DomainResult d;
  d.fundamental = make_bracket(grid, domain_fundamental_function(small), domain_fundamental_function(large));
  d.notes.push_back("bracket: ||S chi||_{M[Psi]} <= fundamental <= ||S chi||_{Lambda[tilde phi]}");
  return d;
}

RangeResult functor_RX(const SpaceSpec& x, const EvaluationGrid& grid) {
  DomainResult inner;
  try {
    inner = domain(x, grid);
  } catch (const Error& e) {
    fail(e.kind(), std::string("inner domain stage: ") + e.what());
  }
  const PhiExpr W = inner.fundamental.upper_fn;
  RangeResult r;
  PhiExpr upper;
  try {
    upper = psi_lorentz_function(W);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::DegenerateInfimum) throw;
    fail(ErrorKind::Existence, std::string("outer range stage: ") + e.what());
  }
  PhiExpr lower = zero_function;
  if (inverse_integral(W, 1.0).converged) {
    lower = psi_marcinkiewicz_function(W);
  } else {
    r.notes.push_back("lower bracket unavailable: 1/W is not integrable at 0");
  }
  r.fundamental = make_bracket(grid, lower, upper);
  r.notes.push_back("bracket: Psi for M[W] <= fundamental <= Psi for Lambda[W], W the domain fundamental");
  return r;
}

RestrictedType restricted_type_space(const SpaceSpec& x, const EvaluationGrid& grid) {
  const DomainResult d = domain(x, grid);
  RestrictedType r;
  r.grid = grid;
  r.t = d.fundamental.t;
  r.W = d.fundamental.upper;
  r.W_fn = d.fundamental.upper_fn;
  std::vector<double> ratio;
  for (std::size_t i = 0; i < r.t.size(); ++i) ratio.push_back(r.W[i] / norm(x, rational_probe(r.t[i])));
  r.comparison = report_from_ratios(r.t, ratio, grid);
  r.comparison.band_lo = 1.0 - 1e-9;
  r.comparison.band_hi = 2.0 + 1e-9;
  r.comparison.pass = r.comparison.ratio_min >= r.comparison.band_lo && r.comparison.ratio_max <= r.comparison.band_hi;
  return r;
}

namespace {

// S S' g = S g + S' g.
Evaluable ssprime(const DecreasingStep& g) { return combine(1.0, hardy(g.function()), 1.0, hardy_adjoint(g.function())); }

CriterionReport finish(CriterionReport r) {
  r.smallest_K = r.K_needed.empty() ? 0.0 : *std::max_element(r.K_needed.begin(), r.K_needed.end());
  r.pass = true;
  for (std::size_t i = 0; i < r.t.size(); ++i) {
    if (!(r.K_needed[i] <= r.K)) {
      r.pass = false;
      r.t_first_failure = r.t[i];
      break;
    }
  }
  return r;
}

}  // namespace

CriterionReport caracRX_check(const PhiExpr& phi, const TestFamily& g, double K, const EvaluationGrid& grid) {
  if (!(K >= 1.0)) fail(ErrorKind::InvalidInput, "K must be >= 1");
  grid.validate();
  CriterionReport r;
  r.K = K;
  r.t = grid.points();
  std::vector<double> density;
  for (double s : r.t) density.push_back(phi(s) / s);
  for (double t : r.t) {
    const DecreasingStep gt = g(t);
    if (gt.is_zero()) {
      r.K_needed.push_back(kInf);
      if (r.reason.empty()) r.reason = "(b) fails: g_t = 0 at t = " + format_number(t);
      continue;
    }
    const Evaluable h = ssprime(gt);
    double upper = 0.0;
    for (std::size_t i = 0; i < r.t.size(); ++i) upper = std::max(upper, h(r.t[i]) / density[i]);
    const double at_t = h(t) / (phi(t) / t);
    const double needed = std::max(upper, 1.0 / at_t);
    r.K_needed.push_back(needed);
    if (needed > K && r.reason.empty()) {
      r.reason = (upper > K ? "(a)" : "(b)") + std::string(" fails at t = ") + format_number(t) +
                 ": needs K = " + format_number(needed);
    }
  }
  return finish(std::move(r));
}

CriterionReport criterioDLambda_check(const PhiExpr& phi, const DecreasingStep& g, double K,
                                      const EvaluationGrid& grid) {
  if (!(K >= 1.0)) fail(ErrorKind::InvalidInput, "K must be >= 1");
  grid.validate();
  CriterionReport r;
  r.K = K;
  r.t = grid.points();
  if (g.is_zero()) {
    r.K_needed.assign(r.t.size(), kInf);
    r.reason = "lower bound fails: g = 0";
    return finish(std::move(r));
  }
  const Evaluable h = ssprime(g);
  for (double t : r.t) {
    const double ratio = h(t) / (phi(t) / t);
    const double needed = std::max(ratio, 1.0 / ratio);
    r.K_needed.push_back(needed);
    if (needed > K && r.reason.empty()) {
      r.reason = (ratio > 1.0 ? "upper" : "lower") + std::string(" bound fails at t = ") + format_number(t) +
                 ": S S' g / (phi/t) = " + format_number(ratio);
    }
  }
  return finish(std::move(r));
}

DecreasingStep density_step(const PhiExpr& phi, double lo, double hi, int per_decade) {
  const int count = static_cast<int>(std::ceil((std::log10(hi) - std::log10(lo)) * per_decade)) + 1;
  const std::vector<double> b = numerics::log_space(lo, hi, count);
  std::vector<double> v;
  for (double x : b) v.push_back(phi(x) / x);
  return DecreasingStep(StepFunction(b, v));
}

void to_json(nlohmann::json& j, const FundamentalBracket& b) {
  j = {{"grid", b.grid}, {"t", b.t}, {"lower", nlohmann::json::array()}, {"upper", nlohmann::json::array()}};
  for (std::size_t i = 0; i < b.t.size(); ++i) {
    j["lower"].push_back(json_number(b.lower[i]));
    j["upper"].push_back(json_number(b.upper[i]));
  }
}

void to_json(nlohmann::json& j, const RangeResult& r) {
  j = {{"closed_form", r.closed_form ? nlohmann::json(*r.closed_form) : nlohmann::json()},
       {"fundamental", r.fundamental},
       {"notes", r.notes}};
}

void to_json(nlohmann::json& j, const DomainResult& d) {
  j = {{"target", d.target ? nlohmann::json(*d.target) : nlohmann::json()},
       {"fundamental", d.fundamental},
       {"notes", d.notes}};
}

void to_json(nlohmann::json& j, const CriterionReport& r) {
  j = {{"pass", r.pass},
       {"K", r.K},
       {"smallest_K", json_number(r.smallest_K)},
       {"t_first_failure", r.t_first_failure},
       {"reason", r.reason}};
}

void to_json(nlohmann::json& j, const ExistenceResult& e) {
  j = {{"exists", e.exists}, {"norm", json_number(e.norm)}, {"diagnostic", e.diagnostic}};
}

}  // namespace rispace
