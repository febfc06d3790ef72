#include <cmath>
#include <random>

#include <doctest.h>

#include "oracles.hpp"
#include "rispace/error.hpp"
#include "rispace/optimal.hpp"
#include "rispace/spaces.hpp"

using namespace rispace;
using doctest::Approx;

namespace {

const PhiExpr t = PhiExpr::variable();
const StepFunction chi1 = StepFunction::indicator(0, 1);

// sup of f** phi by dense sampling plus the kinks; a lower bound that
// converges to the norm.
double marcinkiewicz_sampled(const PhiExpr& phi, const StepFunction& f) {
  const auto p = oracle::rearrangement(f);
  auto at = [&](double s) { return oracle::primitive_at(p, s) / s * phi(s); };
  double best = at(1.0);
  for (const auto& q : p) best = std::max(best, at(q.right));
  for (double s = 1e-5; s < 1e7; s *= 1.001) best = std::max(best, at(s));
  return best;
}

std::vector<SpaceSpec> sample_spaces() {
  return {SpaceSpec::lorentz(pow(t, 0.5)),       SpaceSpec::lorentz(PhiExpr::phi_alpha(1)),
          SpaceSpec::marcinkiewicz(pow(t, 0.5)), SpaceSpec::marcinkiewicz(PhiExpr::max1t()),
          SpaceSpec::weak_lorentz(pow(t, 0.5)),  SpaceSpec::l1_plus_linf(),
          SpaceSpec::l1_cap_linf()};
}

}  // namespace

TEST_CASE("norm examples") {
  for (double t0 : {0.01, 1.0, 50.0}) {
    CHECK(norm(SpaceSpec::lorentz(PhiExpr::phi_alpha(2)), StepFunction::indicator(0, t0)) ==
          Approx(oracle::phi_alpha(2, t0)).epsilon(1e-12));
  }
  CHECK(norm(SpaceSpec::lorentz(pow(t, 0.5)), StepFunction({1, 2}, {2, 1})) == Approx(1 + std::sqrt(2.0)));
  CHECK(norm(SpaceSpec::marcinkiewicz(t), chi1) == Approx(1));
  CHECK(norm(SpaceSpec::l1_plus_linf(), StepFunction({0.5, 3}, {4, 1})) == Approx(2.5));
  CHECK(norm(SpaceSpec::l1_cap_linf(), StepFunction({0.5, 3}, {4, 1})) == Approx(4.5));
  CHECK(norm(SpaceSpec::weak_lorentz(pow(t, 0.5)), StepFunction({1, 4}, {3, 1})) == Approx(3));
  CHECK(norm(SpaceSpec::lorentz(PhiExpr::max1t()), chi1.scaled(0.5)) == Approx(0.5));
  for (const SpaceSpec& x : sample_spaces()) CHECK(norm(x, StepFunction()) == 0);
}

TEST_CASE("Marcinkiewicz norm against dense sampling") {
  std::mt19937_64 rng(21);
  for (const PhiExpr& phi : {pow(t, 0.5), PhiExpr::max1t(), t / log1p(t), PhiExpr::phi_alpha(2)}) {
    for (int n = 0; n < 8; ++n) {
      const StepFunction f = random_step(rng, 8);
      const double exact = norm(SpaceSpec::marcinkiewicz(phi), f);
      const double sampled = marcinkiewicz_sampled(phi, f);
      CHECK(exact >= sampled * (1 - 1e-12));
      CHECK(exact == Approx(sampled).epsilon(1e-5));
    }
  }
}

TEST_CASE("norm axioms on random steps") {
  std::mt19937_64 rng(22);
  for (const SpaceSpec& x : sample_spaces()) {
    for (int n = 0; n < 25; ++n) {
      const StepFunction f = random_step(rng, 8);
      const StepFunction g = random_step(rng, 8);
      const double nf = norm(x, f);
      CHECK(nf > 0);
      CHECK(norm(x, f.scaled(3.5)) == Approx(3.5 * nf).epsilon(1e-14));
      CHECK(norm(x, f + g) <= (nf + norm(x, g)) * (1 + 1e-10));
      // f* <= (f + g)* pointwise.
      CHECK(nf <= norm(x, f + g) * (1 + 1e-12));
    }
  }
}

TEST_CASE("Lorentz dominates Marcinkiewicz with the same fundamental function") {
  std::mt19937_64 rng(23);
  for (const PhiExpr& phi : {pow(t, 0.5), PhiExpr::max1t(), PhiExpr::phi_alpha(1), PhiExpr::phi_alpha(3)}) {
    for (int n = 0; n < 30; ++n) {
      const StepFunction f = random_step(rng);
      CHECK(norm(SpaceSpec::marcinkiewicz(phi), f) <= norm(SpaceSpec::lorentz(phi), f) * (1 + 1e-10));
    }
  }
}

TEST_CASE("associate spaces and Holder") {
  CHECK(std::holds_alternative<L1capLinf>(associate(SpaceSpec::l1_plus_linf()).kind));
  CHECK(std::holds_alternative<L1plusLinf>(associate(SpaceSpec::l1_cap_linf()).kind));
  const SpaceSpec m = associate(SpaceSpec::lorentz(PhiExpr::constant(2) * pow(t, 0.5)));
  REQUIRE(std::holds_alternative<Marcinkiewicz>(m.kind));
  for (double x : {0.01, 4.0, 100.0}) CHECK(std::get<Marcinkiewicz>(m.kind).phi(x) == Approx(std::sqrt(x) / 2));
  const SpaceSpec l = associate(SpaceSpec::marcinkiewicz(PhiExpr::max1t()));
  REQUIRE(std::holds_alternative<Lorentz>(l.kind));
  CHECK(std::get<Lorentz>(l.kind).phi(0.3) == Approx(0.3));
  CHECK_THROWS_AS(associate(SpaceSpec::weak_lorentz(t)), Error);

  std::mt19937_64 rng(24);
  for (const SpaceSpec& x : sample_spaces()) {
    if (std::holds_alternative<WeakLorentz>(x.kind)) continue;
    const SpaceSpec xa = associate(x);
    for (int n = 0; n < 20; ++n) {
      const StepFunction f = random_step(rng, 6);
      const StepFunction g = random_step(rng, 6);
      CHECK(inner_product(f, g) <= norm(x, f) * norm(xa, g) * (1 + 1e-10));
    }
  }
}

TEST_CASE("closure norms agree with step norms") {
  std::mt19937_64 rng(25);
  for (const SpaceSpec& x : sample_spaces()) {
    const StepFunction f = rearrange(random_step(rng, 6)).function();
    CHECK(norm(x, as_evaluable(f)) == Approx(norm(x, f)).epsilon(1e-6));
  }
  CHECK(std::isinf(norm(SpaceSpec::lorentz(t), hardy(chi1))));
  CHECK(norm(SpaceSpec::l1_plus_linf(), hardy(chi1)) == Approx(1));
}

TEST_CASE("range_norm_lower") {
  const SpaceSpec m = SpaceSpec::marcinkiewicz(PhiExpr::max1t());
  const auto fam = DecreasingFamily::characteristic(EvaluationGrid{1e-3, 1e3, 61}.points());
  CHECK(range_norm_lower(m, chi1, fam).value == Approx(1).epsilon(1e-9));
  CHECK(range_norm_lower(m, StepFunction(), fam).value == 0);
  CHECK_THROWS_AS(range_norm_lower(m, chi1, DecreasingFamily{}), Error);

  const SpaceSpec lw = SpaceSpec::lorentz(PhiExpr::constant(2) * pow(t, 0.5));
  const auto r = range_norm_lower(lw, chi1, fam, OperatorSpec::rank_one(pow(t, -0.5)));
  CHECK(r.value == Approx(0.5).epsilon(1e-9));
  CHECK(norm(SpaceSpec::marcinkiewicz(pow(t, 0.5) / PhiExpr::constant(2)), chi1) == Approx(0.5));
}

TEST_CASE("attainment at characteristic functions") {
  const PhiExpr phi = PhiExpr::max1t();
  const SpaceSpec m = SpaceSpec::marcinkiewicz(phi);
  DecreasingFamily fam = DecreasingFamily::standard(EvaluationGrid{1e-3, 1e3, 25}, 7);
  for (double t0 : EvaluationGrid{1e-3, 1e3, 25}.points()) {
    const RangeBound r = range_norm_lower(m, StepFunction::indicator(0, t0), fam);
    CHECK(r.value == Approx(psi_marcinkiewicz(phi, t0)).epsilon(1e-6));
    CHECK(r.label.rfind("chi", 0) == 0);
  }
}

TEST_CASE("range0_membership and range0_upper") {
  const SpaceSpec x = SpaceSpec::marcinkiewicz(PhiExpr::max1t());
  std::mt19937_64 rng(26);
  for (int n = 0; n < 20; ++n) {
    const StepFunction f = random_step(rng);
    CHECK(range0_membership(x, f, rearrange(f).function()));
    DecreasingFamily self;
    self.add(rearrange(f), "f*");
    CHECK(range0_upper(x, f, self).value == Approx(norm(x, f)).epsilon(1e-14));
  }
  CHECK_FALSE(range0_membership(x, chi1.scaled(2), chi1));
  CHECK(range0_membership(x, StepFunction(), chi1));

  std::vector<double> u = EvaluationGrid{1e-2, 1e2, 41}.points();
  const auto cand = DecreasingFamily::scaled_characteristic(u, {0.25, 0.5, 1, 2});
  const double up = range0_upper(x, chi1, cand).value;
  CHECK(up <= 1 + 1e-9);
  CHECK(range0_upper(x, StepFunction(), cand).value == 0);
  DecreasingFamily tiny;
  tiny.add(DecreasingStep(StepFunction::indicator(0, 1e-3, 1e-3)), "tiny");
  CHECK_THROWS_AS(range0_upper(x, chi1, tiny), Error);
}

TEST_CASE("bound ordering on random steps") {
  const PhiExpr phi = PhiExpr::max1t();
  const SpaceSpec x = SpaceSpec::marcinkiewicz(phi);
  const SpaceSpec exact = SpaceSpec::marcinkiewicz(psi_marcinkiewicz_function(phi));
  const auto lower = DecreasingFamily::standard(EvaluationGrid{1e-3, 1e3, 13}, 3);
  const auto cand = DecreasingFamily::scaled_characteristic(EvaluationGrid{1e-3, 1e3, 13}.points(), {1, 10, 100});
  std::mt19937_64 rng(27);
  for (int n = 0; n < 10; ++n) {
    const StepFunction f = random_step(rng, 5);
    const double lo = range_norm_lower(x, f, lower).value;
    const double mid = norm(exact, f);
    CHECK(lo <= mid * (1 + 1e-9));
    double up = INFINITY;
    try {
      up = range0_upper(x, f, cand).value;
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NoFeasibleCandidate);
    }
    CHECK(mid <= up * (1 + 1e-9));
  }
}

TEST_CASE("json encoding") {
  const SpaceSpec x = parse_space(nlohmann::json::parse(R"({"space":"lorentz","phi":"phi_alpha:2"})"));
  CHECK(norm(x, chi1) == Approx(oracle::phi_alpha(2, 1)));
  nlohmann::json j = SpaceSpec::marcinkiewicz(PhiExpr::max1t());
  CHECK(norm(parse_space(j), chi1) == Approx(1));
  CHECK(std::holds_alternative<L1plusLinf>(parse_space(nlohmann::json::parse(R"({"space":"l1_plus_linf"})")).kind));
  CHECK_THROWS_AS(parse_space(nlohmann::json::parse(R"({"space":"orlicz"})")), Error);
  CHECK_THROWS_AS(validate(SpaceSpec::lorentz(t * t)), Error);
}
