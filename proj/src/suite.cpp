#include "rispace/suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "rispace/classh.hpp"
#include "rispace/error.hpp"
#include "rispace/format.hpp"
#include "rispace/numerics.hpp"
#include "rispace/operators.hpp"
#include "rispace/optimal.hpp"
#include "rispace/spaces.hpp"
#include "rispace/step_function.hpp"

namespace rispace {
namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

const json& required(const json& p, const char* key) {
  if (!p.contains(key)) fail(ErrorKind::InvalidInput, std::string("check parameter \"") + key + "\" is missing");
  return p.at(key);
}

double number(const json& p, const char* key, double fallback) {
  if (!p.contains(key)) return fallback;
  if (!p.at(key).is_number()) fail(ErrorKind::InvalidInput, std::string("check parameter \"") + key + "\" must be a number");
  return p.at(key).get<double>();
}

int integer(const json& p, const char* key, int fallback) {
  if (!p.contains(key)) return fallback;
  if (!p.at(key).is_number_integer()) {
    fail(ErrorKind::InvalidInput, std::string("check parameter \"") + key + "\" must be an integer");
  }
  return p.at(key).get<int>();
}

/// "holds" (default), "violated" or "rejected".
std::string expectation(const json& p) {
  const std::string e = p.contains("expect") ? p.at("expect").get<std::string>() : "holds";
  if (e != "holds" && e != "violated" && e != "rejected") {
    fail(ErrorKind::InvalidInput, "expect must be holds, violated or rejected, got \"" + e + "\"");
  }
  return e;
}

Verdict judge(bool holds, const std::string& expect) {
  if (expect == "rejected") return holds ? Verdict::Fail : Verdict::CorrectlyRejected;
  return holds == (expect == "holds") ? Verdict::Pass : Verdict::Fail;
}

struct Outcome {
  bool holds = false;
  double band_min = 0.0;
  double band_max = 0.0;
  json details = json::object();
};

json band_json(const EquivalenceReport& r) {
  return json{{"ratio_min", json_number(r.ratio_min)},
              {"ratio_max", json_number(r.ratio_max)},
              {"t_at_min", r.t_at_min},
              {"t_at_max", r.t_at_max}};
}

Outcome from_band(const EquivalenceReport& r) {
  Outcome o;
  o.band_min = r.ratio_min;
  o.band_max = r.ratio_max;
  o.details["ratios"] = band_json(r);
  return o;
}

// Band of a(t)/b(t); `tolerance` bounds |ratio - 1|, `max_spread` bounds
// ratio_max / ratio_min, otherwise a finite positive band is enough.
Outcome band_outcome(const EquivalenceReport& r, const json& p) {
  Outcome o = from_band(r);
  o.holds = std::isfinite(r.ratio_max) && r.ratio_min > 0.0;
  if (p.contains("tolerance")) {
    const double tol = number(p, "tolerance", 0.0);
    o.holds = o.holds && r.ratio_min >= 1.0 - tol && r.ratio_max <= 1.0 + tol;
    o.details["tolerance"] = tol;
  }
  if (p.contains("max_spread")) {
    const double s = number(p, "max_spread", kInf);
    o.holds = o.holds && r.spread() <= s;
    o.details["spread"] = json_number(r.spread());
    o.details["max_spread"] = s;
  }
  return o;
}

Outcome rearrange_oracle(const json& p, const EvaluationGrid&, std::uint64_t seed) {
  const int count = integer(p, "count", 1000);
  const int max_pieces = integer(p, "max_pieces", 20);
  std::mt19937_64 rng(seed);
  const auto start = std::chrono::steady_clock::now();
  double worst_value = 0.0;
  double worst_break = 0.0;
  double worst_mass = 0.0;
  int mismatched = 0;
  for (int i = 0; i < count; ++i) {
    const StepFunction f = random_step(rng, max_pieces);
    const DecreasingStep g = rearrange(f);
    // Levels in decreasing order; the level v ends where |{f > next level}| does.
    std::vector<double> levels(f.values().begin(), f.values().end());
    std::sort(levels.begin(), levels.end(), std::greater<>());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    std::erase(levels, 0.0);
    auto measure_above = [&](double level) {
      double m = 0.0;
      for (std::size_t k = 0; k < f.pieces(); ++k) {
        if (f.values()[k] > level) m += f.breakpoints()[k] - f.left_of(k);
      }
      return m;
    };
    if (levels.size() != g.pieces()) {
      ++mismatched;
      continue;
    }
    for (std::size_t k = 0; k < levels.size(); ++k) {
      const double below = k + 1 < levels.size() ? levels[k + 1] : 0.0;
      const double b = measure_above(below);
      worst_value = std::max(worst_value, std::abs(g.values()[k] - levels[k]) / levels[k]);
      worst_break = std::max(worst_break, std::abs(g.breakpoints()[k] - b) / b);
    }
    worst_mass = std::max(worst_mass, std::abs(g.integral() - f.integral()) / f.integral());
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  Outcome o;
  o.holds = mismatched == 0 && worst_value <= 1e-12 && worst_break <= 1e-12 && worst_mass <= 1e-12;
  o.band_min = 0.0;
  o.band_max = std::max({worst_value, worst_break, worst_mass});
  o.details = {{"count", count},         {"max_pieces", max_pieces},   {"piece_count_mismatches", mismatched},
               {"value_error", worst_value}, {"breakpoint_error", worst_break}, {"mass_error", worst_mass},
               {"seconds", seconds}};
  return o;
}

Outcome psi_marcinkiewicz_check(const json& p, const EvaluationGrid& grid, std::uint64_t) {
  const PhiExpr phi = parse_phi(required(p, "phi"));
  Outcome o;
  o.holds = true;
  o.band_min = kInf;
  o.band_max = -kInf;
  if (p.contains("reference")) {
    const PhiExpr ref = parse_phi(p.at("reference"));
    const PhiExpr psi = psi_marcinkiewicz_function(phi);
    o = band_outcome(compare_equivalence(psi, ref, grid), p);
    o.details["reference"] = ref.to_string();
  }
  if (p.contains("points")) {
    const double tol = number(p, "tolerance", 1e-9);
    json points = json::array();
    for (const auto& pt : p.at("points")) {
      const double t = pt.at(0).get<double>();
      const double expected = pt.at(1).get<double>();
      const double got = psi_marcinkiewicz(phi, t);
      const double rel = std::abs(got / expected - 1.0);
      o.holds = o.holds && rel <= tol;
      o.band_min = std::min(o.band_min, got / expected);
      o.band_max = std::max(o.band_max, got / expected);
      points.push_back({{"t", t}, {"psi", got}, {"expected", expected}, {"relative_error", rel}});
    }
    o.details["points"] = points;
  }
  if (!p.contains("reference") && !p.contains("points")) {
    // Psi is quasiconcave and below phi.
    const std::vector<double> t = grid.points();
    std::vector<double> psi;
    for (double x : t) {
      psi.push_back(psi_marcinkiewicz(phi, x));
      const double r = psi.back() / phi(x);
      o.band_min = std::min(o.band_min, r);
      o.band_max = std::max(o.band_max, r);
    }
    const QuasiconcavityReport q = is_quasiconcave(t, psi, 1e-9);
    o.holds = q.pass && o.band_max <= 1.0 + 1e-12;
    o.details["quasiconcave"] = q.pass;
    o.details["psi_over_phi_max"] = json_number(o.band_max);
  }
  o.details["phi"] = phi.to_string();
  return o;
}

Outcome tilde_check(const json& p, const EvaluationGrid& grid, std::uint64_t) {
  const PhiExpr phi = parse_phi(required(p, "phi"));
  const PhiExpr ref = parse_phi(required(p, "reference"));
  TildeOptions opts;
  opts.rel_tol = number(p, "minimization_tolerance", 1e-8);
  Outcome o = band_outcome(compare_equivalence([&](double t) { return tilde(phi, t, opts).value; },
                                               [&](double t) { return ref(t); }, grid),
                           p);
  o.details["phi"] = phi.to_string();
  o.details["reference"] = ref.to_string();
  return o;
}

Outcome lorentz_identity_check(const json& p, const EvaluationGrid& grid, std::uint64_t) {
  const PhiExpr phi = parse_phi(required(p, "phi"));
  const EquivalenceReport r = lorentz_range_is_lorentz(phi, grid);
  Outcome o = from_band(r);
  o.holds = r.pass;
  o.details["phi"] = phi.to_string();
  return o;
}

Outcome range_sandwich(const json& p, const EvaluationGrid& grid, std::uint64_t) {
  const PhiExpr phi = parse_phi(required(p, "phi"));
  const double slack = number(p, "slack", 1e-9);
  const EquivalenceReport r = compare_equivalence([&](double t) { return psi_lorentz(phi, t).value; },
                                                  [&](double t) { return tilde(phi, t).value; }, grid);
  Outcome o = from_band(r);
  o.holds = r.ratio_min >= 1.0 / 3.0 - slack && r.ratio_max <= 1.0 + slack;
  o.details["phi"] = phi.to_string();
  o.details["required"] = {1.0 / 3.0, 1.0};
  return o;
}

Outcome duality_attainment(const json& p, const EvaluationGrid& grid, std::uint64_t seed) {
  const PhiExpr phi = parse_phi(required(p, "phi"));
  const int count = integer(p, "count", 20);
  const double tol = number(p, "tolerance", 1e-6);
  const SpaceSpec x = SpaceSpec::marcinkiewicz(phi);
  const std::vector<double> ts = numerics::log_space(grid.t_min, grid.t_max, count);
  const DecreasingFamily chars = DecreasingFamily::characteristic(ts);
  const DecreasingFamily random = DecreasingFamily::random(integer(p, "random", 64), seed);
  Outcome o;
  o.holds = true;
  o.band_min = kInf;
  o.band_max = -kInf;
  json rows = json::array();
  for (double t : ts) {
    const StepFunction f = StepFunction::indicator(0.0, t);
    const double psi = psi_marcinkiewicz(phi, t);
    const RangeBound a = range_norm_lower(x, f, chars);
    const RangeBound b = range_norm_lower(x, f, random);
    const double q = a.value / psi;
    o.band_min = std::min(o.band_min, q);
    o.band_max = std::max(o.band_max, q);
    const bool ok = std::abs(q - 1.0) <= tol && b.value <= psi * (1.0 + tol);
    o.holds = o.holds && ok;
    rows.push_back({{"t", t},
                    {"psi", psi},
                    {"characteristic_bound", a.value},
                    {"attained_by", a.label},
                    {"random_bound", b.value},
                    {"ok", ok}});
  }
  o.details = {{"space", x.to_string()}, {"tolerance", tol}, {"rows", rows}};
  return o;
}

Outcome axiom_outcome(const AxiomResult& a) {
  Outcome o;
  o.holds = a.pass;
  o.band_min = a.worst;
  o.band_max = a.worst;
  o.details = a;
  return o;
}

Outcome classh_check(const json& p, const EvaluationGrid&, std::uint64_t seed) {
  const OperatorSpec op = parse_operator(required(p, "operator"));
  const ClassHReport r = verify_class_h(op, integer(p, "corpus", 200), seed);
  Outcome o;
  o.holds = r.pass();
  o.band_min = -kInf;
  o.band_max = -kInf;
  for (const auto& s : r.sections) o.band_max = std::max(o.band_max, s.worst);
  o.band_min = o.band_max;
  o.details = r;
  return o;
}

Outcome pointwise_check(const json& p, const EvaluationGrid& grid, std::uint64_t) {
  const OperatorSpec op = parse_operator(required(p, "operator"));
  StepFunction f;
  from_json(required(p, "f"), f);
  return axiom_outcome(pointwise_domination(op, f, grid));
}

Outcome rle_check(const json& p, const EvaluationGrid& grid, std::uint64_t) {
  const OperatorSpec op = parse_operator(required(p, "operator"));
  return axiom_outcome(verify_rle(op, EvaluationGrid{1e-3, 1e3, 31}, grid));
}

Outcome existence_check(const ExistenceResult& e, const SpaceSpec& x) {
  Outcome o;
  o.holds = e.exists;
  o.band_min = e.norm;
  o.band_max = e.norm;
  o.details = {{"space", x.to_string()}, {"result", e}};
  return o;
}

Outcome existence_range_check(const json& p, const EvaluationGrid&, std::uint64_t) {
  const SpaceSpec x = parse_space(required(p, "space"));
  return existence_check(existence_range(x), x);
}

Outcome existence_domain_check(const json& p, const EvaluationGrid&, std::uint64_t) {
  const SpaceSpec x = parse_space(required(p, "space"));
  return existence_check(existence_domain(x), x);
}

Outcome domain_fundamental(const json& p, const EvaluationGrid& grid, std::uint64_t) {
  const SpaceSpec x = parse_space(required(p, "space"));
  const PhiExpr ref = parse_phi(required(p, "reference"));
  const DomainResult d = domain(x, grid);
  std::size_t i = 0;
  const EquivalenceReport r =
      compare_equivalence([&](double) { return d.fundamental.upper[i++]; }, [&](double t) { return ref(t); }, grid);
  Outcome o = band_outcome(r, p);
  o.details["space"] = x.to_string();
  o.details["reference"] = ref.to_string();
  o.details["notes"] = d.notes;
  return o;
}

Outcome domain_iterate(const json& p, const EvaluationGrid& grid, std::uint64_t) {
  const SpaceSpec x = parse_space(required(p, "space"));
  const EquivalenceReport r = domain_iterate_check(x, grid);
  Outcome o = from_band(r);
  o.holds = r.pass;
  o.details["space"] = x.to_string();
  return o;
}

double spread_of(const std::vector<double>& a, const std::vector<double>& b) {
  double lo = kInf;
  double hi = -kInf;
  for (std::size_t i = 0; i < a.size(); ++i) {
    lo = std::min(lo, a[i] / b[i]);
    hi = std::max(hi, a[i] / b[i]);
  }
  return hi / lo;
}

// phi_R >= phi_X >= phi_D on the grid, R taken at its bracket's upper end;
// with "tolerance", both functors' ratios to phi_X must also be flat.
Outcome functor_shadow(const json& p, const EvaluationGrid& grid, std::uint64_t) {
  const SpaceSpec x = parse_space(required(p, "space"));
  const double slack = number(p, "slack", 1e-9);
  const DomainResult D = functor_DX(x, grid);
  const RangeResult R = functor_RX(x, grid);
  const PhiExpr phi = x.fundamental();
  std::vector<double> fx;
  for (double t : D.fundamental.t) fx.push_back(phi(t));
  Outcome o;
  o.holds = true;
  o.band_min = kInf;
  o.band_max = -kInf;
  std::size_t order_failures = 0;
  for (std::size_t i = 0; i < fx.size(); ++i) {
    const double d = D.fundamental.upper[i] / fx[i];
    const double r = R.fundamental.upper[i] / fx[i];
    o.band_min = std::min(o.band_min, d);
    o.band_max = std::max(o.band_max, r);
    if (d > 1.0 + slack || r < 1.0 - slack) ++order_failures;
  }
  o.holds = order_failures == 0;
  json flat = json::object();
  if (p.contains("tolerance")) {
    const double tol = number(p, "tolerance", 0.0);
    const double sd = spread_of(D.fundamental.upper, fx) - 1.0;
    const double srl = spread_of(R.fundamental.lower, fx) - 1.0;
    const double sru = spread_of(R.fundamental.upper, fx) - 1.0;
    o.holds = o.holds && sd <= tol && srl <= tol && sru <= tol;
    flat = {{"tolerance", tol}, {"domain", sd}, {"range_lower", srl}, {"range_upper", sru}};
  }
  o.details = {{"space", x.to_string()},
               {"order_failures", order_failures},
               {"slack", slack},
               {"flatness", flat},
               {"domain_to_phi", {json_number(o.band_min)}},
               {"range_upper_to_phi", {json_number(o.band_max)}},
               {"domain_notes", D.notes},
               {"range_notes", R.notes}};
  return o;
}

Outcome functor_idempotence(const json& p, const EvaluationGrid& grid, std::uint64_t) {
  const SpaceSpec x = parse_space(required(p, "space"));
  const double tol = number(p, "tolerance", 1e-6);
  const RangeResult R = functor_RX(x, grid);
  const RangeResult RR = functor_RX(SpaceSpec::marcinkiewicz(R.fundamental.upper_fn), grid);
  Outcome o;
  const double s = spread_of(RR.fundamental.upper, R.fundamental.upper) - 1.0;
  o.holds = s <= tol;
  o.band_min = kInf;
  o.band_max = -kInf;
  for (std::size_t i = 0; i < R.fundamental.t.size(); ++i) {
    o.band_min = std::min(o.band_min, RR.fundamental.upper[i] / R.fundamental.upper[i]);
    o.band_max = std::max(o.band_max, RR.fundamental.upper[i] / R.fundamental.upper[i]);
  }
  o.details = {{"space", x.to_string()}, {"spread_minus_one", s}, {"tolerance", tol}};
  return o;
}

// phi = c t^a (1 + t)^b with 0 < a < 1 and 0 < a + b < 1: quasiconcave with
// 1/phi integrable at 0.
PhiExpr random_marcinkiewicz_phi(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ua(0.1, 0.9);
  std::uniform_real_distribution<double> us(0.05, 0.95);
  std::uniform_real_distribution<double> uc(-1.0, 1.0);
  const double a = ua(rng);
  const double b = us(rng) - a;
  const double c = std::pow(10.0, uc(rng));
  const PhiExpr t = PhiExpr::variable();
  return PhiExpr::constant(c) * pow(t, a) * pow(PhiExpr::constant(1.0) + t, b);
}

Outcome bound_ordering(const json& p, const EvaluationGrid&, std::uint64_t seed) {
  const int pairs = integer(p, "pairs", 200);
  const double slack = number(p, "slack", 1e-9);
  std::mt19937_64 rng(seed);
  const DecreasingFamily lower_family = DecreasingFamily::random(16, seed + 1);
  std::vector<double> u = numerics::log_space(1e-3, 1e3, 13);
  const DecreasingFamily scaled =
      DecreasingFamily::scaled_characteristic(u, std::vector<double>{1.0, 10.0, 100.0, 1000.0});
  int violations = 0;
  int feasible = 0;
  json witnesses = json::array();
  Outcome o;
  o.band_min = kInf;
  o.band_max = -kInf;
  for (int i = 0; i < pairs; ++i) {
    const PhiExpr phi = random_marcinkiewicz_phi(rng);
    const StepFunction f = random_step(rng, 8);
    const SpaceSpec x = SpaceSpec::marcinkiewicz(phi);
    const double exact = norm(SpaceSpec::marcinkiewicz(psi_marcinkiewicz_function(phi)), f);
    const double lower = range_norm_lower(x, f, lower_family).value;
    DecreasingFamily candidates = scaled;
    candidates.add(rearrange(f), "f*");
    double upper = kInf;
    try {
      upper = range0_upper(x, f, candidates).value;
      ++feasible;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoFeasibleCandidate) throw;
    }
    o.band_min = std::min(o.band_min, lower / exact);
    o.band_max = std::max(o.band_max, upper / exact);
    if (lower > exact * (1.0 + slack) || upper < exact * (1.0 - slack)) {
      ++violations;
      if (witnesses.size() < 10) {
        witnesses.push_back({{"index", i},
                             {"phi", phi.to_string()},
                             {"f", f},
                             {"lower", lower},
                             {"exact", exact},
                             {"upper", json_number(upper)}});
      }
    }
  }
  o.holds = violations == 0;
  o.details = {{"pairs", pairs},      {"feasible", feasible}, {"violations", violations},
               {"slack", slack},      {"witnesses", witnesses}};
  return o;
}

struct Entry {
  std::string paper_ref;
  std::function<Outcome(const json&, const EvaluationGrid&, std::uint64_t)> run;
};

const std::map<std::string, Entry>& registry() {
  static const std::map<std::string, Entry> r = {
      {"rearrange_oracle", {"f*(t) = inf{s : |{|f| > s}| <= t}", rearrange_oracle}},
      {"psi_marcinkiewicz", {"Psi_{S,M_phi}(t) = t / int_0^t ds/phi(s)", psi_marcinkiewicz_check}},
      {"tilde", {"tilde phi(t) = inf_r t phi(r) / (r log(1 + t/r))", tilde_check}},
      {"lorentz_range_is_lorentz", {"t int_t^inf tilde phi(s)/s^2 ds <= C phi(t)", lorentz_identity_check}},
      {"range_sandwich", {"tilde phi / 3 <= Psi_{S,Lambda_phi} <= tilde phi", range_sandwich}},
      {"duality_attainment", {"Psi_{T,X}(t) = t / ||T' chi_(0,t)||_{X'}", duality_attainment}},
      {"classh", {"class H: T f decreasing, T f < T f*, S chi_(0,t) <= S T chi_(0,t)", classh_check}},
      {"pointwise_domination", {"T f <= T f* pointwise (stronger than T f < T f*)", pointwise_check}},
      {"rle", {"S chi_(0,t) <= S T chi_(0,t)", rle_check}},
      {"existence_range", {"R[S,X] exists iff log+(1/t) in X'", existence_range_check}},
      {"existence_domain", {"D[S,X] exists iff min(1, 1/s) in X", existence_domain_check}},
      {"domain_fundamental", {"W_X(t) = ||S chi_(0,t)||_X", domain_fundamental}},
      {"domain_iterate", {"||S (S chi_(0,t))||_X = ||S^2 chi_(0,t)||_X", domain_iterate}},
      {"functor_shadow", {"R_X subset X subset D_X at the level of fundamental functions", functor_shadow}},
      {"functor_idempotence", {"R_{R_X} = R_X", functor_idempotence}},
      {"bound_ordering", {"range_norm_lower <= ||f||_{M_Psi} <= range0_upper", bound_ordering}},
  };
  return r;
}

constexpr const char* kPaperExamples = R"({
  "checks": [
    {"name": "rearrange_oracle", "params": {"count": 1000, "max_pieces": 20}},
    {"name": "psi_marcinkiewicz", "id": "psi_sqrt",
     "params": {"phi": {"op": "pow", "arg": "t", "exponent": 0.5},
                "reference": {"op": "mul", "args": [0.5, {"op": "pow", "arg": "t", "exponent": 0.5}]},
                "tolerance": 1e-9}},
    {"name": "psi_marcinkiewicz", "id": "psi_max1t_at_1",
     "params": {"phi": "max1t", "points": [[1, 1]], "tolerance": 1e-9}},
    {"name": "psi_marcinkiewicz", "id": "psi_max1t_band",
     "params": {"phi": "max1t",
                "reference": {"op": "div", "args": ["t", {"op": "log1p", "arg": "t"}]},
                "max_spread": 4}},
    {"name": "psi_marcinkiewicz", "id": "psi_successor_band",
     "params": {"phi": {"op": "div", "args": ["t", {"op": "log1p", "arg": "t"}]},
                "reference": {"op": "div", "args": ["t", {"op": "pow", "exponent": 2,
                              "arg": {"op": "log1p", "arg": {"op": "pow", "arg": "t", "exponent": 0.5}}}]},
                "max_spread": 8}},
    {"name": "tilde", "id": "tilde_phi2",
     "params": {"phi": "phi_alpha:2", "reference": "phi_alpha:1", "tolerance": 1e-4}},
    {"name": "lorentz_range_is_lorentz", "id": "lorentz_identity_phi2", "params": {"phi": "phi_alpha:2"}},
    {"name": "range_sandwich", "id": "sandwich_phi1", "params": {"phi": "phi_alpha:1"}},
    {"name": "range_sandwich", "id": "sandwich_phi2", "params": {"phi": "phi_alpha:2"}},
    {"name": "range_sandwich", "id": "sandwich_phi3", "params": {"phi": "phi_alpha:3"}},
    {"name": "range_sandwich", "id": "sandwich_max1t", "params": {"phi": "max1t"}},
    {"name": "duality_attainment", "params": {"phi": "max1t", "count": 20}},
    {"name": "classh", "id": "classh_S", "params": {"operator": "S"}},
    {"name": "classh", "id": "classh_Sprime", "params": {"operator": "Sprime"}},
    {"name": "classh", "id": "classh_SSprime", "params": {"operator": {"op": "compose", "factors": ["S", "Sprime"]}}},
    {"name": "classh", "id": "classh_S2", "params": {"operator": {"op": "compose", "factors": ["S", "S"]}}},
    {"name": "classh", "id": "classh_combo",
     "params": {"operator": {"op": "combo", "alpha": 1, "first": "S", "beta": 1, "second": "Sprime"}}},
    {"name": "pointwise_domination", "id": "pointwise_Sprime_chi12",
     "params": {"operator": "Sprime", "f": {"breakpoints": [1, 2], "values": [0, 1]}, "expect": "violated"}},
    {"name": "rle", "id": "rle_combo_0.3",
     "params": {"operator": {"op": "combo", "alpha": 0.3, "first": "S", "beta": 0.3, "second": "Sprime"},
                "expect": "violated"}},
    {"name": "existence_range", "id": "range_L1",
     "params": {"space": {"space": "lorentz", "phi": "t"}, "expect": "rejected"}},
    {"name": "existence_range", "id": "range_M_tlog",
     "params": {"space": {"space": "marcinkiewicz",
                          "phi": {"op": "mul", "args": ["t", {"op": "log1p", "arg": {"op": "div", "args": [1, "t"]}}]}},
                "expect": "rejected"}},
    {"name": "existence_domain", "id": "domain_L1capLinf", "params": {"space": "l1_cap_linf", "expect": "rejected"}},
    {"name": "existence_domain", "id": "domain_L1plusLinf", "params": {"space": "l1_plus_linf"}},
    {"name": "domain_fundamental", "id": "domain_L1plusLinf_vs_phi1",
     "params": {"space": "l1_plus_linf", "reference": "phi_alpha:1", "max_spread": 4}},
    {"name": "domain_fundamental", "id": "domain_M_tlog_vs_max1t",
     "params": {"space": {"space": "marcinkiewicz", "phi": {"op": "div", "args": ["t", {"op": "log1p", "arg": "t"}]}},
                "reference": "max1t"}},
    {"name": "domain_iterate",
     "params": {"space": {"space": "marcinkiewicz",
                          "phi": {"op": "div", "args": ["t", {"op": "pow", "exponent": 2,
                                  "arg": {"op": "log1p", "arg": {"op": "pow", "arg": "t", "exponent": 0.5}}}]}}}},
    {"name": "functor_shadow", "id": "functor_M_sqrt",
     "params": {"space": {"space": "marcinkiewicz", "phi": {"op": "pow", "arg": "t", "exponent": 0.5}},
                "tolerance": 1e-6}},
    {"name": "functor_shadow", "id": "functor_M_cuberoot",
     "params": {"space": {"space": "marcinkiewicz", "phi": {"op": "pow", "arg": "t", "exponent": 0.3333333333333333}}}},
    {"name": "functor_idempotence", "id": "idempotence_M_sqrt",
     "params": {"space": {"space": "marcinkiewicz", "phi": {"op": "pow", "arg": "t", "exponent": 0.5}}}},
    {"name": "bound_ordering", "params": {"pairs": 200}}
  ]
})";

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::CorrectlyRejected: return "correctly-rejected";
    case Verdict::Error: return "error";
  }
  return "error";
}

std::vector<std::string> check_names() {
  std::vector<std::string> out;
  for (const auto& [name, entry] : registry()) out.push_back(name);
  return out;
}

SuiteConfig parse_suite(const json& j) {
  if (!j.is_object()) fail(ErrorKind::InvalidInput, "suite: expected a JSON object");
  SuiteConfig s;
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    s.grid.t_min = g.value("t_min", s.grid.t_min);
    s.grid.t_max = g.value("t_max", s.grid.t_max);
    s.grid.count = g.value("count", s.grid.count);
    s.grid.validate();
  }
  if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
  if (!j.contains("checks")) return s;
  if (!j.at("checks").is_array()) fail(ErrorKind::InvalidInput, "suite: \"checks\" must be an array");
  std::set<std::string> ids;
  for (const json& c : j.at("checks")) {
    if (!c.is_object() || !c.contains("name") || !c.at("name").is_string()) {
      fail(ErrorKind::InvalidInput, "suite: every check needs a \"name\"");
    }
    CheckConfig cc;
    cc.name = c.at("name").get<std::string>();
    if (!registry().count(cc.name)) fail(ErrorKind::InvalidInput, "suite: unknown check \"" + cc.name + "\"");
    cc.id = c.value("id", cc.name);
    if (!ids.insert(cc.id).second) fail(ErrorKind::InvalidInput, "suite: duplicate check id \"" + cc.id + "\"");
    if (c.contains("params")) {
      if (!c.at("params").is_object()) fail(ErrorKind::InvalidInput, "suite: params of \"" + cc.id + "\" must be an object");
      cc.params = c.at("params");
    }
    s.checks.push_back(std::move(cc));
  }
  return s;
}

SuiteConfig builtin_suite(const std::string& name) {
  if (name == "paper-examples") return parse_suite(json::parse(kPaperExamples));
  if (name == "empty") return {};
  fail(ErrorKind::InvalidInput, "unknown built-in suite \"" + name + "\" (paper-examples, empty)");
}

CheckReport run_check(const CheckConfig& c, const EvaluationGrid& grid, std::uint64_t seed) {
  const auto it = registry().find(c.name);
  if (it == registry().end()) fail(ErrorKind::InvalidInput, "unknown check \"" + c.name + "\"");
  CheckReport r;
  r.check = c.name;
  r.id = c.id.empty() ? c.name : c.id;
  r.paper_ref = it->second.paper_ref;
  r.grid = grid;
  const std::string expect = expectation(c.params);
  try {
    const Outcome o = it->second.run(c.params, grid, seed);
    r.verdict = judge(o.holds, expect);
    r.band_min = o.band_min;
    r.band_max = o.band_max;
    r.details = o.details;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidInput) throw;
    // A nonexistence probe may also be rejected by the construction itself.
    r.verdict = expect == "rejected" && e.kind() == ErrorKind::Existence ? Verdict::CorrectlyRejected : Verdict::Error;
    r.details = {{"error", e.what()}};
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidInput, "check \"" + r.id + "\": " + e.what());
  }
  r.details["expect"] = expect;
  return r;
}

std::vector<CheckReport> run_suite(const SuiteConfig& config) {
  std::vector<CheckReport> out;
  for (const CheckConfig& c : config.checks) out.push_back(run_check(c, config.grid, config.seed));
  return out;
}

int suite_status(const std::vector<CheckReport>& reports) {
  return std::all_of(reports.begin(), reports.end(), [](const CheckReport& r) { return r.ok(); }) ? 0 : 1;
}

namespace {

std::string csv_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string summary_csv(const std::vector<CheckReport>& reports) {
  std::ostringstream os;
  os << "id,check,verdict,band_min,band_max\n";
  for (const CheckReport& r : reports) {
    os << r.id << ',' << r.check << ',' << to_string(r.verdict) << ',' << csv_number(r.band_min) << ','
       << csv_number(r.band_max) << '\n';
  }
  return os.str();
}

void to_json(json& j, const CheckReport& r) {
  j = json{{"check", r.check},
           {"id", r.id},
           {"paper_ref", r.paper_ref},
           {"grid", r.grid},
           {"band", {{"min", json_number(r.band_min)}, {"max", json_number(r.band_max)}}},
           {"verdict", to_string(r.verdict)},
           {"details", r.details}};
}

Tabulation tabulate(const std::string& kind, const json& params, const EvaluationGrid& grid) {
  grid.validate();
  Tabulation tab;
  tab.t = grid.points();
  auto single = [&](const std::string& column, const std::function<double(double)>& f) {
    tab.columns = {column};
    for (double t : tab.t) tab.rows.push_back({f(t)});
  };
  auto pair = [&](const FundamentalBracket& b) {
    tab.columns = {"lower", "upper"};
    for (std::size_t i = 0; i < b.t.size(); ++i) tab.rows.push_back({b.lower[i], b.upper[i]});
  };
  if (kind == "phi" || kind == "tilde" || kind == "psi" || kind == "psi_lorentz") {
    const PhiExpr phi = parse_phi(required(params, "phi"));
    if (kind == "phi") single("phi", [&](double t) { return phi(t); });
    if (kind == "tilde") single("tilde", [&](double t) { return tilde(phi, t).value; });
    if (kind == "psi") single("psi", [&](double t) { return psi_marcinkiewicz(phi, t); });
    if (kind == "psi_lorentz") single("psi_lorentz", [&](double t) { return psi_lorentz(phi, t).value; });
    return tab;
  }
  if (kind == "W" || kind == "bracket") {
    const SpaceSpec x = parse_space(required(params, "space"));
    if (kind == "W") {
      const DomainResult d = domain(x, grid);
      tab.columns = {"W"};
      for (double w : d.fundamental.upper) tab.rows.push_back({w});
      return tab;
    }
    const std::string of = params.value("of", "range");
    if (of == "range") {
      pair(optimal_range(x, grid).fundamental);
    } else if (of == "domain") {
      pair(domain(x, grid).fundamental);
    } else if (of == "functor_DX") {
      pair(functor_DX(x, grid).fundamental);
    } else if (of == "functor_RX") {
      pair(functor_RX(x, grid).fundamental);
    } else {
      fail(ErrorKind::InvalidInput, "tabulate: \"of\" must be range, domain, functor_DX or functor_RX");
    }
    return tab;
  }
  fail(ErrorKind::InvalidInput, "tabulate: unknown kind \"" + kind + "\" (phi, tilde, psi, psi_lorentz, W, bracket)");
}

std::string to_csv(const Tabulation& tab) {
  std::ostringstream os;
  os << 't';
  for (const auto& c : tab.columns) os << ',' << c;
  os << '\n';
  for (std::size_t i = 0; i < tab.t.size(); ++i) {
    os << csv_number(tab.t[i]);
    for (double v : tab.rows[i]) os << ',' << csv_number(v);
    os << '\n';
  }
  return os.str();
}

}  // namespace rispace
