#include "rispace/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <thread>

#include "rispace/error.hpp"
#include "rispace/format.hpp"
#include "rispace/numerics.hpp"

namespace rispace {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Fundamental {
  PhiExpr operator()(const Lorentz& s) const { return s.phi; }
  PhiExpr operator()(const Marcinkiewicz& s) const { return s.phi; }
  PhiExpr operator()(const WeakLorentz& s) const { return s.phi; }
  PhiExpr operator()(const L1plusLinf&) const { return min(PhiExpr::constant(1.0), PhiExpr::variable()); }
  PhiExpr operator()(const L1capLinf&) const { return PhiExpr::max1t(); }
};

const PhiExpr* parameter(const SpaceSpec& x) {
  return std::visit(
      [](const auto& s) -> const PhiExpr* {
        if constexpr (requires { s.phi; }) {
          return &s.phi;
        } else {
          return nullptr;
        }
      },
      x.kind);
}

// Sum of (v_i - v_{i+1}) phi(t_i); the phi(0+) terms cancel for steps.
double lorentz_step(const PhiExpr& phi, const DecreasingStep& f) {
  const auto b = f.breakpoints();
  const auto v = f.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double next = i + 1 < v.size() ? v[i + 1] : 0.0;
    sum += (v[i] - next) * phi(b[i]);
  }
  return sum;
}

// On (a, b] of f*, f**(t) phi(t) = (c/t + v) phi(t) with c = F(a) - v a.
double marcinkiewicz_step(const PhiExpr& phi, const DecreasingStep& f) {
  const auto b = f.breakpoints();
  const auto v = f.values();
  double best = 0.0;
  double F = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double a = i == 0 ? 0.0 : b[i - 1];
    const double c = std::max(0.0, F - v[i] * a);
    auto g = [&](double t) { return (c / t + v[i]) * phi(t); };
    best = std::max(best, g(b[i]));
    if (i > 0) {
      best = std::max(best, g(a));
      const numerics::Minimum m =
          numerics::multistart_min([&](double u) { return -g(std::exp(u)); }, std::log(a), std::log(b[i]), 4, 1e-10);
      best = std::max(best, -m.fx);
    }
    F += v[i] * (b[i] - a);
  }
  // Past the support f** phi = |f|_1 phi(t)/t, which is largest at the end.
  return best;
}

double weak_lorentz_step(const PhiExpr& phi, const DecreasingStep& f) {
  double best = 0.0;
  for (std::size_t i = 0; i < f.pieces(); ++i) best = std::max(best, f.values()[i] * phi(f.breakpoints()[i]));
  return best;
}

double mass_below_one(const DecreasingStep& f) {
  double sum = 0.0;
  double a = 0.0;
  for (std::size_t i = 0; i < f.pieces() && a < 1.0; ++i) {
    const double b = std::min(1.0, f.breakpoints()[i]);
    sum += f.values()[i] * (b - a);
    a = f.breakpoints()[i];
  }
  return sum;
}

std::vector<double> split_points(const Evaluable& h) {
  std::vector<double> p = h.kinks();
  p.push_back(1.0);
  if (std::isfinite(h.support_end())) p.push_back(h.support_end());
  std::erase_if(p, [&](double x) { return !(x > 0.0) || !std::isfinite(x) || x > h.support_end(); });
  std::sort(p.begin(), p.end());
  p.erase(std::unique(p.begin(), p.end()), p.end());
  return p;
}

// h(0+) phi(0+) + int h phi'.
double lorentz_closure(const PhiExpr& phi, const Evaluable& h) {
  const double h0 = h.at_zero();
  const std::vector<double> p = split_points(h);
  double sum = 0.0;
  auto integrand = [&](double s) {
    const double hs = h(s);
    return hs == 0.0 ? 0.0 : hs * phi.derivative(s);
  };
  // h is nonincreasing, so h(p0) = h(0+) makes it constant on (0, p0].
  if (std::isfinite(h0) && h(p.front()) == h0) {
    sum = h0 * phi(p.front());
  } else if (h0 > 0.0) {
    const double p0 = phi_at_zero(phi).value;
    if (p0 > 0.0) {
      if (std::isinf(h0)) return kInf;
      sum += h0 * p0;
    }
    const numerics::SeriesResult head = numerics::integrate_toward_zero(integrand, p.front());
    if (!head.converged) return kInf;
    sum += head.value;
  }
  for (std::size_t i = 0; i + 1 < p.size(); ++i) sum += numerics::integrate_log_scale(integrand, p[i], p[i + 1]);
  if (!std::isfinite(h.support_end())) {
    const numerics::SeriesResult tail = numerics::integrate_toward_infinity(integrand, p.back());
    if (!tail.converged) return kInf;
    sum += tail.value;
  }
  return sum;
}

double marcinkiewicz_closure(const PhiExpr& phi, const Evaluable& h) {
  std::vector<double> kinks = h.kinks();
  kinks.push_back(1.0);
  const numerics::HalfLineSup s =
      numerics::sup_over_halfline([&](double t) { return h.primitive(t) == 0.0 ? 0.0 : h.mean(t) * phi(t); }, kinks);
  return s.divergent ? kInf : s.value;
}

double weak_lorentz_closure(const PhiExpr& phi, const Evaluable& h) {
  std::vector<double> kinks = h.kinks();
  kinks.push_back(1.0);
  const numerics::HalfLineSup s =
      numerics::sup_over_halfline([&](double t) { return h(t) == 0.0 ? 0.0 : h(t) * phi(t); }, kinks);
  return s.divergent ? kInf : s.value;
}

/// Evaluates `score` on every member on a few threads; ties go to the lowest index.
template <class Score>
std::vector<double> score_all(std::size_t n, const Score& score) {
  std::vector<double> out(n);
  const std::size_t workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 8);
  std::vector<std::future<void>> jobs;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < n; i += workers) out[i] = score(i);
    }));
  }
  for (auto& j : jobs) j.get();
  return out;
}

std::vector<double> breakpoint_union(const StepFunction& a, const StepFunction& b) {
  std::vector<double> p(a.breakpoints().begin(), a.breakpoints().end());
  p.insert(p.end(), b.breakpoints().begin(), b.breakpoints().end());
  std::sort(p.begin(), p.end());
  p.erase(std::unique(p.begin(), p.end()), p.end());
  return p;
}

}  // namespace

std::string SpaceSpec::to_string() const {
  struct Visitor {
    std::string operator()(const Lorentz& s) const { return "Lambda[" + s.phi.to_string() + "]"; }
    std::string operator()(const Marcinkiewicz& s) const { return "M[" + s.phi.to_string() + "]"; }
    std::string operator()(const WeakLorentz& s) const { return "Lambda^{1,inf}[" + s.phi.to_string() + "]"; }
    std::string operator()(const L1plusLinf&) const { return "L1+Linf"; }
    std::string operator()(const L1capLinf&) const { return "L1 cap Linf"; }
  };
  return std::visit(Visitor{}, kind);
}

PhiExpr SpaceSpec::fundamental() const { return std::visit(Fundamental{}, kind); }

void validate(const SpaceSpec& x, const EvaluationGrid& grid) {
  const PhiExpr* phi = parameter(x);
  if (!phi) return;
  const QuasiconcavityReport q = is_quasiconcave(*phi, grid);
  if (!q.pass) {
    fail(ErrorKind::InvalidInput, x.to_string() + ": parameter is not quasiconcave (" + q.reason + " at t = " +
                                      format_number(q.t_violation) + ")");
  }
}

double norm(const SpaceSpec& x, const StepFunction& f) {
  if (f.is_zero()) return 0.0;
  const DecreasingStep r = rearrange(f);
  struct Visitor {
    const DecreasingStep& r;
    double operator()(const Lorentz& s) const { return lorentz_step(s.phi, r); }
    double operator()(const Marcinkiewicz& s) const { return marcinkiewicz_step(s.phi, r); }
    double operator()(const WeakLorentz& s) const { return weak_lorentz_step(s.phi, r); }
    double operator()(const L1plusLinf&) const { return mass_below_one(r); }
    double operator()(const L1capLinf&) const { return std::max(r.integral(), r.sup()); }
  };
  return std::visit(Visitor{r}, x.kind);
}

double norm(const SpaceSpec& x, const Evaluable& h) {
  if (h.support_end() == 0.0) return 0.0;
  struct Visitor {
    const Evaluable& h;
    double operator()(const Lorentz& s) const { return lorentz_closure(s.phi, h); }
    double operator()(const Marcinkiewicz& s) const { return marcinkiewicz_closure(s.phi, h); }
    double operator()(const WeakLorentz& s) const { return weak_lorentz_closure(s.phi, h); }
    double operator()(const L1plusLinf&) const { return h.primitive(1.0); }
    double operator()(const L1capLinf&) const { return std::max(h.total(), h.at_zero()); }
  };
  return std::visit(Visitor{h}, x.kind);
}

SpaceSpec associate(const SpaceSpec& x) {
  struct Visitor {
    SpaceSpec operator()(const Lorentz& s) const { return SpaceSpec::marcinkiewicz(associate_fun(s.phi)); }
    SpaceSpec operator()(const Marcinkiewicz& s) const { return SpaceSpec::lorentz(associate_fun(s.phi)); }
    SpaceSpec operator()(const WeakLorentz& s) const {
      fail(ErrorKind::Unsupported, "no associate space for " + SpaceSpec{s}.to_string());
    }
    SpaceSpec operator()(const L1plusLinf&) const { return SpaceSpec::l1_cap_linf(); }
    SpaceSpec operator()(const L1capLinf&) const { return SpaceSpec::l1_plus_linf(); }
  };
  return std::visit(Visitor{}, x.kind);
}

void DecreasingFamily::add(DecreasingStep g, std::string label) {
  if (g.is_zero()) fail(ErrorKind::InvalidInput, "family member " + label + " is zero");
  members.push_back(std::move(g));
  labels.push_back(std::move(label));
}

void DecreasingFamily::append(const DecreasingFamily& other) {
  members.insert(members.end(), other.members.begin(), other.members.end());
  labels.insert(labels.end(), other.labels.begin(), other.labels.end());
}

DecreasingFamily DecreasingFamily::characteristic(const std::vector<double>& u) {
  DecreasingFamily out;
  for (double x : u) out.add(DecreasingStep(StepFunction::indicator(0.0, x)), "chi(0," + format_number(x) + ")");
  return out;
}

DecreasingFamily DecreasingFamily::scaled_characteristic(const std::vector<double>& u, const std::vector<double>& c) {
  DecreasingFamily out;
  for (double x : u) {
    for (double k : c) {
      out.add(DecreasingStep(StepFunction::indicator(0.0, x, k)), format_number(k) + "*chi(0," + format_number(x) + ")");
    }
  }
  return out;
}

DecreasingFamily DecreasingFamily::random(int count, std::uint64_t seed) {
  DecreasingFamily out;
  std::mt19937_64 rng(seed);
  for (int i = 0; i < count; ++i) out.add(random_decreasing_step(rng), "random#" + std::to_string(i));
  return out;
}

DecreasingFamily DecreasingFamily::standard(const EvaluationGrid& grid, std::uint64_t seed) {
  DecreasingFamily out = characteristic(grid.points());
  out.append(random(64, seed));
  return out;
}

RangeBound range_norm_lower(const SpaceSpec& x, const StepFunction& f, const DecreasingFamily& family,
                            const OperatorSpec& op) {
  if (family.size() == 0) fail(ErrorKind::InvalidInput, "range lower bound: empty family");
  if (f.is_zero()) return {0.0, 0, family.labels.front(), family.size()};
  validate(op);
  const SpaceSpec dual = associate(x);
  const OperatorSpec dual_op = adjoint(op);
  const StepFunction fs = rearrange(f).function();
  // T'g = (int g w) w for rank-one T, so one norm serves every member.
  const auto* rank_one = std::get_if<RankOne>(&dual_op.kind);
  const double weight_norm = rank_one ? norm(dual, *rank_one->closure) : 0.0;
  std::vector<double> denominators(family.size());
  const std::vector<double> ratios = score_all(family.size(), [&](std::size_t i) {
    const StepFunction& g = family.members[i].function();
    denominators[i] = rank_one ? rank_one_pairing(rank_one->weight, g) * weight_norm : norm(dual, apply(dual_op, g));
    if (!std::isfinite(denominators[i])) return 0.0;
    return inner_product(fs, g) / denominators[i];
  });
  if (std::none_of(denominators.begin(), denominators.end(), [](double d) { return std::isfinite(d); })) {
    fail(ErrorKind::Existence, "range lower bound: the dual norm of " + dual_op.to_string() + " g is infinite in " +
                                   dual.to_string() + " for every family member");
  }
  const std::size_t best = static_cast<std::size_t>(std::max_element(ratios.begin(), ratios.end()) - ratios.begin());
  return {ratios[best], best, family.labels[best], family.size()};
}

bool range0_membership(const SpaceSpec&, const StepFunction& f, const StepFunction& g) {
  if (f.is_zero()) return true;
  if (g.is_zero()) return false;
  const StepFunction gs = rearrange(g).function();
  const Evaluable sg = hardy(gs);
  std::vector<double> t = breakpoint_union(rearrange(f).function(), gs);
  const std::size_t n = t.size();
  for (std::size_t i = 0; i + 1 < n; ++i) t.push_back(std::sqrt(t[i] * t[i + 1]));
  t.push_back(t.front() * 1e-3);
  for (double x : numerics::log_space(t[n - 1] * 1.5, t[n - 1] * 1e6, 50)) t.push_back(x);
  for (double x : t) {
    const double lhs = doublestar(f, x);
    const double rhs = sg.primitive(x) / x;
    if (lhs > rhs * (1.0 + 1e-12)) return false;
  }
  return true;
}

RangeBound range0_upper(const SpaceSpec& x, const StepFunction& f, const DecreasingFamily& candidates) {
  if (f.is_zero()) return {0.0, 0, candidates.labels.empty() ? "" : candidates.labels.front(), candidates.size()};
  RangeBound best{kInf, 0, "", 0};
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const StepFunction& g = candidates.members[i].function();
    if (!range0_membership(x, f, g)) continue;
    ++best.counted;
    const double v = norm(x, g);
    if (v < best.value) {
      best.value = v;
      best.index = i;
      best.label = candidates.labels[i];
    }
  }
  if (best.counted == 0) {
    fail(ErrorKind::NoFeasibleCandidate,
         "restricted range upper bound: none of the " + std::to_string(candidates.size()) + " candidates dominates f");
  }
  return best;
}

void to_json(nlohmann::json& j, const SpaceSpec& x) {
  struct Visitor {
    nlohmann::json operator()(const Lorentz& s) const { return {{"space", "lorentz"}, {"phi", s.phi}}; }
    nlohmann::json operator()(const Marcinkiewicz& s) const { return {{"space", "marcinkiewicz"}, {"phi", s.phi}}; }
    nlohmann::json operator()(const WeakLorentz& s) const { return {{"space", "weak_lorentz"}, {"phi", s.phi}}; }
    nlohmann::json operator()(const L1plusLinf&) const { return {{"space", "l1_plus_linf"}}; }
    nlohmann::json operator()(const L1capLinf&) const { return {{"space", "l1_cap_linf"}}; }
  };
  j = std::visit(Visitor{}, x.kind);
}

SpaceSpec parse_space(const nlohmann::json& j) {
  std::string name;
  if (j.is_string()) {
    name = j.get<std::string>();
  } else if (j.is_object() && j.contains("space") && j["space"].is_string()) {
    name = j["space"].get<std::string>();
  } else {
    fail(ErrorKind::InvalidInput, "space: expected an object with a \"space\" name");
  }
  if (name == "l1_plus_linf") return SpaceSpec::l1_plus_linf();
  if (name == "l1_cap_linf") return SpaceSpec::l1_cap_linf();
  if (name != "lorentz" && name != "marcinkiewicz" && name != "weak_lorentz") {
    fail(ErrorKind::InvalidInput, "space: unknown kind \"" + name + "\"");
  }
  if (!j.is_object() || !j.contains("phi")) fail(ErrorKind::InvalidInput, "space " + name + ": missing \"phi\"");
  PhiExpr phi = parse_phi(j["phi"]);
  if (name == "lorentz") return SpaceSpec::lorentz(std::move(phi));
  if (name == "marcinkiewicz") return SpaceSpec::marcinkiewicz(std::move(phi));
  return SpaceSpec::weak_lorentz(std::move(phi));
}

void from_json(const nlohmann::json& j, SpaceSpec& x) { x = parse_space(j); }

}  // namespace rispace
