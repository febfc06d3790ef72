#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "rispace/classh.hpp"
#include "rispace/error.hpp"
#include "rispace/numerics.hpp"
#include "rispace/operators.hpp"
#include "rispace/optimal.hpp"
#include "rispace/phi.hpp"
#include "rispace/spaces.hpp"
#include "rispace/step_function.hpp"

using namespace rispace;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Result {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// max/min of a(t)/b(t) over the points.
double spread(const std::vector<double>& t, const std::function<double(double)>& a,
              const std::function<double(double)>& b) {
  double lo = kInf, hi = 0.0;
  for (double x : t) {
    const double r = a(x) / b(x);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  return hi / lo;
}

PhiExpr t_over_log1p() {
  const PhiExpr t = PhiExpr::variable();
  return t / log1p(t);
}

PhiExpr t_over_log2_sqrt() {
  const PhiExpr t = PhiExpr::variable();
  return t / pow(log1p(pow(t, 0.5)), 2.0);
}

// Exact values for phi = max(1, t).
double psi_max1t(double t) { return t <= 1.0 ? 1.0 : t / (1.0 + std::log(t)); }
double tilde_max1t(double t) { return t / std::log1p(t); }

Result rearrangement() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  double worst_integral = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const StepFunction f = random_step(rng, 20);
    const DecreasingStep got = rearrange(f);
    const auto want = oracle::rearrangement(f);
    if (got.pieces() != want.size()) return {false, fmt("piece count differs at step %d", i)};
    for (std::size_t k = 0; k < want.size(); ++k) {
      worst = std::max(worst, rel(got.breakpoints()[k], want[k].right));
      worst = std::max(worst, rel(got.values()[k], want[k].value));
    }
    double direct = 0.0;
    for (std::size_t k = 0; k < f.pieces(); ++k) direct += f.values()[k] * (f.breakpoints()[k] - f.left_of(k));
    worst_integral = std::max(worst_integral, rel(got.integral(), direct));
  }
  const double secs = seconds_since(start);
  return {worst <= 1e-12 && worst_integral <= 1e-12 && secs <= 2.0,
          fmt("1000 steps, max rel err %.2e, integral err %.2e, %.2f s", worst, worst_integral, secs)};
}

Result psi_closed_forms() {
  const PhiExpr sq = pow(PhiExpr::variable(), 0.5);
  double worst = 0.0;
  for (double t : EvaluationGrid{}.points()) worst = std::max(worst, rel(psi_marcinkiewicz(sq, t), std::sqrt(t) / 2));
  const double at1 = psi_marcinkiewicz(PhiExpr::max1t(), 1.0);
  return {worst <= 1e-9 && std::abs(at1 - 1.0) <= 1e-9,
          fmt("Psi(sqrt t) max rel err %.2e; Psi_max1t(1) = %.15g", worst, at1)};
}

Result psi_bands() {
  const std::vector<double> t = EvaluationGrid{}.points();
  const PhiExpr m = PhiExpr::max1t();
  double exact = 0.0;
  for (double x : t) exact = std::max(exact, rel(psi_marcinkiewicz(m, x), psi_max1t(x)));
  const double s1 = spread(t, [&](double x) { return psi_marcinkiewicz(m, x); },
                           [](double x) { return x / std::log1p(x); });
  const PhiExpr succ = t_over_log1p();
  const double s2 = spread(t, [&](double x) { return psi_marcinkiewicz(succ, x); },
                           [](double x) { return x / std::pow(std::log1p(std::sqrt(x)), 2); });
  return {s1 <= 4.0 && s2 <= 8.0 && exact <= 1e-9,
          fmt("max1t spread %.4f (<= 4), closed-form err %.2e; successor spread %.4f (<= 8)", s1, exact, s2)};
}

// inf over r of t phi(r) / (r log(1 + t/r)) by dense sampling.
double tilde_sampled(const std::function<double(double)>& phi, double t) {
  double best = kInf;
  for (double r = t * 1e-8; r <= t * 1e8; r *= 1.0002) best = std::min(best, t * phi(r) / (r * std::log1p(t / r)));
  return best;
}

Result tilde_phi2() {
  const PhiExpr p2 = PhiExpr::phi_alpha(2);
  double worst = 0.0;
  for (double t : EvaluationGrid{}.points()) worst = std::max(worst, rel(tilde(p2, t).value, oracle::phi1(t)));
  double sampled = 0.0;
  for (double t : {1e-3, 1.0, 1e3}) {
    sampled = std::max(sampled, rel(tilde(p2, t).value,
                                    tilde_sampled([](double r) { return oracle::phi_alpha(2, r); }, t)));
  }
  const EquivalenceReport lr = lorentz_range_is_lorentz(p2);
  const bool finite = std::isfinite(lr.ratio_max) && lr.ratio_min > 0;
  return {worst <= 1e-4 && sampled <= 1e-6 && finite && lr.pass,
          fmt("tilde(phi_2)/phi_1 max rel err %.2e, vs sampled inf %.2e; identity ratio [%.4f, %.4f]", worst,
              sampled, lr.ratio_min, lr.ratio_max)};
}

Result sandwich() {
  const std::vector<std::pair<const char*, PhiExpr>> phis = {{"phi_1", PhiExpr::phi_alpha(1)},
                                                             {"phi_2", PhiExpr::phi_alpha(2)},
                                                             {"phi_3", PhiExpr::phi_alpha(3)},
                                                             {"max1t", PhiExpr::max1t()}};
  int violations = 0;
  double lo = kInf, hi = 0.0;
  for (const auto& [name, phi] : phis) {
    for (double t : EvaluationGrid{}.points()) {
      const double psi = psi_lorentz(phi, t).value;
      const double til = tilde(phi, t).value;
      if (psi < til / 3 * (1 - 1e-9) || psi > til * (1 + 1e-9)) ++violations;
      lo = std::min(lo, psi / til);
      hi = std::max(hi, psi / til);
    }
  }
  double exact = 0.0;
  for (double t : EvaluationGrid{}.points()) {
    exact = std::max(exact, rel(psi_lorentz(PhiExpr::max1t(), t).value, psi_max1t(t)));
    exact = std::max(exact, rel(tilde(PhiExpr::max1t(), t).value, tilde_max1t(t)));
  }
  return {violations == 0 && exact <= 1e-9,
          fmt("%d violations, Psi/tilde in [%.4f, %.4f]; max1t closed-form err %.2e", violations, lo, hi, exact)};
}

Result duality() {
  const SpaceSpec x = SpaceSpec::marcinkiewicz(PhiExpr::max1t());
  const std::vector<double> ts = numerics::log_space(1e-3, 1e3, 20);
  const DecreasingFamily chars = DecreasingFamily::characteristic(ts);
  const DecreasingFamily randoms = DecreasingFamily::random(64, 7);
  double worst = 0.0;
  double excess = -kInf;
  for (double t : ts) {
    const StepFunction f = StepFunction::indicator(0, t);
    const double psi = psi_max1t(t);
    worst = std::max(worst, rel(range_norm_lower(x, f, chars).value, psi));
    for (std::size_t k = 0; k < randoms.size(); ++k) {
      DecreasingFamily one;
      one.add(randoms.members[k], randoms.labels[k]);
      excess = std::max(excess, range_norm_lower(x, f, one).value / psi - 1.0);
    }
  }
  return {worst <= 1e-6 && excess <= 1e-6,
          fmt("20 values of t, attainment err %.2e; random members max excess %.2e", worst, excess)};
}

Result class_h() {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<std::pair<const char*, OperatorSpec>> ops = {
      {"S", OperatorSpec::S()},
      {"S'", OperatorSpec::Sprime()},
      {"SS'", OperatorSpec::compose({Factor::S, Factor::Sprime})},
      {"S^2", OperatorSpec::compose({Factor::S, Factor::S})},
      {"S+S'", OperatorSpec::combo(1, OperatorSpec::S(), 1, OperatorSpec::Sprime())}};
  std::string failed;
  for (const auto& [name, op] : ops) {
    if (!verify_class_h(op, 200, 7).pass()) failed += std::string(" ") + name;
  }
  const AxiomResult pw = pointwise_domination(OperatorSpec::Sprime(), StepFunction({1, 2}, {0, 1}));
  const AxiomResult rle =
      verify_rle(OperatorSpec::combo(0.3, OperatorSpec::S(), 0.3, OperatorSpec::Sprime()));
  const double secs = seconds_since(start);
  return {failed.empty() && !pw.pass && !rle.pass && secs <= 60.0,
          fmt("failing operators:%s; S' chi_(1,2) pointwise %s (%zu witnesses); 0.3 combo rle %s; %.1f s",
              failed.empty() ? " none" : failed.c_str(), pw.pass ? "not detected" : "detected",
              pw.witnesses.size(), rle.pass ? "not detected" : "detected", secs)};
}

Result existence() {
  const PhiExpr t = PhiExpr::variable();
  const ExistenceResult l1 = existence_range(SpaceSpec::lorentz(t));
  const ExistenceResult tlog = existence_range(SpaceSpec::marcinkiewicz(t * log1p(PhiExpr::constant(1.0) / t)));
  const ExistenceResult cap = existence_domain(SpaceSpec::l1_cap_linf());
  const ExistenceResult sum = existence_domain(SpaceSpec::l1_plus_linf());
  bool rejected_construction = false;
  try {
    optimal_range(SpaceSpec::lorentz(t));
  } catch (const Error& e) {
    rejected_construction = e.kind() == ErrorKind::Existence;
  }
  const bool ok = !l1.exists && !l1.diagnostic.empty() && !tlog.exists && !tlog.diagnostic.empty() &&
                  !cap.exists && sum.exists && rejected_construction;
  return {ok, fmt("R[S,L1] %s; R[S,M_tlog(1+1/t)] %s; D into L1capLinf %s; D into L1+Linf %s",
                  l1.exists ? "exists" : ("rejected: " + l1.diagnostic).c_str(),
                  tlog.exists ? "exists" : ("rejected: " + tlog.diagnostic).c_str(),
                  cap.exists ? "exists" : "rejected", sum.exists ? "exists" : "rejected")};
}

// sup over s of S^2 chi_(0,t)(s) phi(s), sampled densely, together with its
// limit as s -> inf.
double w_sampled(const std::function<double(double)>& phi, double t, double at_infinity) {
  double best = std::max(phi(t), at_infinity);
  for (double s = t; s <= 1e300; s *= 1.001) best = std::max(best, t / s * (1 + std::log(s / t)) * phi(s));
  return best;
}

Result domains() {
  const EvaluationGrid grid;
  const std::vector<double> pts = grid.points();
  const DomainResult sum = domain(SpaceSpec::l1_plus_linf(), grid);
  double exact = 0.0;
  double lo = kInf, hi = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double t = pts[i];
    const double w = t <= 1 ? t * (1 - std::log(t)) : 1.0;
    exact = std::max(exact, rel(sum.fundamental.upper[i], w));
    lo = std::min(lo, sum.fundamental.upper[i] / oracle::phi1(t));
    hi = std::max(hi, sum.fundamental.upper[i] / oracle::phi1(t));
  }
  const PhiExpr p = t_over_log1p();
  const DomainResult m = domain(SpaceSpec::marcinkiewicz(p), grid);
  double mlo = kInf, mhi = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double r = m.fundamental.upper[i] / std::max(1.0, pts[i]);
    mlo = std::min(mlo, r);
    mhi = std::max(mhi, r);
  }
  double sampled = 0.0;
  for (double t : {1e-3, 1.0, 1e3}) {
    const double got = norm(SpaceSpec::marcinkiewicz(p), hardy(StepFunction::indicator(0, t)));
    sampled = std::max(sampled, rel(got, w_sampled([](double s) { return s / std::log1p(s); }, t, t)));
  }
  const EquivalenceReport it = domain_iterate_check(SpaceSpec::marcinkiewicz(t_over_log2_sqrt()), grid);
  const bool ok = hi / lo <= 4 && exact <= 1e-9 && std::isfinite(mhi / mlo) && sampled <= 1e-6 &&
                  it.ratio_min >= 1 - 1e-6 && it.ratio_max <= 1 + 1e-6;
  return {ok, fmt("L1+Linf/phi_1 spread %.4f, closed-form err %.2e; M_t/log(1+t) vs max1t in [%.4f, %.4f], "
                  "sampled err %.2e; iterate ratio [%.9f, %.9f]",
                  hi / lo, exact, mlo, mhi, sampled, it.ratio_min, it.ratio_max)};
}

Result functors() {
  const EvaluationGrid grid;
  const PhiExpr sq = pow(PhiExpr::variable(), 0.5);
  const SpaceSpec x = SpaceSpec::marcinkiewicz(sq);
  const DomainResult D = functor_DX(x, grid);
  const RangeResult R = functor_RX(x, grid);
  const std::vector<double>& t = D.fundamental.t;
  // ||S chi_(0,t)||_{M_{sqrt(s)/2}} = sqrt(t) e^{-1/2}.
  double d_exact = 0.0;
  double r_flat = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    d_exact = std::max(d_exact, rel(D.fundamental.upper[i], std::sqrt(t[i] / std::exp(1.0))));
  }
  auto sq_t = [](double x) { return std::sqrt(x); };
  for (const std::vector<double>* side : {&R.fundamental.lower, &R.fundamental.upper}) {
    double lo = kInf, hi = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      lo = std::min(lo, (*side)[i] / sq_t(t[i]));
      hi = std::max(hi, (*side)[i] / sq_t(t[i]));
    }
    r_flat = std::max(r_flat, hi / lo - 1);
  }
  int order = 0;
  for (double a : {0.5, 1.0 / 3.0}) {
    const PhiExpr phi = pow(PhiExpr::variable(), a);
    const SpaceSpec y = SpaceSpec::marcinkiewicz(phi);
    const DomainResult d = functor_DX(y, grid);
    const RangeResult r = functor_RX(y, grid);
    for (std::size_t i = 0; i < d.fundamental.t.size(); ++i) {
      const double f = phi(d.fundamental.t[i]);
      if (d.fundamental.upper[i] > f * (1 + 1e-9) || r.fundamental.upper[i] < f * (1 - 1e-9)) ++order;
    }
  }
  const RangeResult RR = functor_RX(SpaceSpec::marcinkiewicz(R.fundamental.upper_fn), grid);
  double idem = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) idem = std::max(idem, rel(RR.fundamental.upper[i], R.fundamental.upper[i]));
  const bool ok = d_exact <= 1e-6 && r_flat <= 1e-6 && order == 0 && idem <= 1e-6;
  return {ok, fmt("D_X vs sqrt(t/e) err %.2e; R_X brackets/phi flat to %.2e; %d order violations; R_R_X vs R_X err %.2e",
                  d_exact, r_flat, order, idem)};
}

Result bound_ordering() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ua(0.1, 0.9), usum(0.05, 0.95), uc(-1.0, 1.0);
  const DecreasingFamily lower_family = DecreasingFamily::random(16, 12);
  DecreasingFamily candidates =
      DecreasingFamily::scaled_characteristic(numerics::log_space(1e-3, 1e3, 13), {1.0, 10.0, 100.0, 1000.0});
  int violations = 0, feasible = 0;
  for (int i = 0; i < 200; ++i) {
    const double a = ua(rng);
    const double b = usum(rng) - a;
    const double c = std::pow(10.0, uc(rng));
    const PhiExpr t = PhiExpr::variable();
    const PhiExpr phi = PhiExpr::constant(c) * pow(t, a) * pow(PhiExpr::constant(1.0) + t, b);
    const StepFunction f = random_step(rng, 8);
    const SpaceSpec x = SpaceSpec::marcinkiewicz(phi);
    const double exact = norm(SpaceSpec::marcinkiewicz(psi_marcinkiewicz_function(phi)), f);
    const double lower = range_norm_lower(x, f, lower_family).value;
    DecreasingFamily cands = candidates;
    cands.add(rearrange(f), "f*");
    double upper = kInf;
    try {
      upper = range0_upper(x, f, cands).value;
      ++feasible;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoFeasibleCandidate) throw;
    }
    if (lower > exact * (1 + 1e-9) || upper < exact * (1 - 1e-9)) ++violations;
  }
  return {violations == 0, fmt("200 pairs, %d with a feasible candidate, %d violations", feasible, violations)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Result()>>> criteria = {
      {"rearrangement oracle", rearrangement},
      {"Psi closed forms", psi_closed_forms},
      {"Psi equivalence bands", psi_bands},
      {"tilde of phi_2 and Lorentz identity", tilde_phi2},
      {"range sandwich", sandwich},
      {"duality attainment", duality},
      {"class H", class_h},
      {"existence", existence},
      {"domain fundamentals", domains},
      {"functors", functors},
      {"bound ordering", bound_ordering}};
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Result r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r = {false, std::string("threw: ") + e.what()};
    }
    if (!r.pass) ++failures;
    std::printf("%s criterion %zu: %s: %s\n", r.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, r.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
