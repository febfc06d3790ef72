#include <cmath>

#include <doctest.h>

#include "oracles.hpp"
#include "rispace/error.hpp"
#include "rispace/phi.hpp"

using namespace rispace;
using doctest::Approx;

namespace {

const PhiExpr t = PhiExpr::variable();

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error");
  return ErrorKind::Inconclusive;
}

}  // namespace

TEST_CASE("eval") {
  CHECK(PhiExpr::max1t()(0.5) == 1);
  CHECK(PhiExpr::phi_alpha(1)(1) == Approx(std::log(2.0)).epsilon(1e-15));
  CHECK((t / log1p(t))(1) == Approx(1 / std::log(2.0)).epsilon(1e-15));
  CHECK(PhiExpr::psi_helper()(1) == Approx(2 * std::log(2.0)));
  CHECK(pow(t, 0.5).compose(t * PhiExpr::constant(4))(4) == Approx(4));
  CHECK(min(t, PhiExpr::constant(1))(3) == 1);
  CHECK(kind_of([] { t(0); }) == ErrorKind::InvalidInput);
  CHECK(kind_of([] { (PhiExpr::constant(1) / PhiExpr::computed("zero", [](double) { return 0.0; }))(1); }) == ErrorKind::Evaluation);
}

TEST_CASE("derivatives follow the expression") {
  const PhiExpr f = PhiExpr::phi_alpha(2);
  for (double x : {1e-3, 0.7, 40.0}) {
    const double h = 1e-6 * x;
    CHECK(f.derivative(x) == Approx((f(x + h) - f(x - h)) / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("json encoding") {
  const PhiExpr f = parse_phi(nlohmann::json::parse(R"({"op":"div","args":["t",{"op":"log1p","arg":"t"}]})"));
  CHECK(f(1) == Approx(1 / std::log(2.0)));
  CHECK(parse_phi("phi_alpha:2")(3) == Approx(oracle::phi_alpha(2, 3)));
  CHECK(parse_phi(2.5)(7) == 2.5);
  nlohmann::json j = PhiExpr::phi_alpha(3);
  CHECK(parse_phi(j)(0.2) == Approx(oracle::phi_alpha(3, 0.2)));
  CHECK_THROWS_AS(parse_phi("nope"), Error);
}

TEST_CASE("is_quasiconcave") {
  const EvaluationGrid g;
  CHECK(is_quasiconcave(PhiExpr::max1t(), g).pass);
  CHECK_FALSE(is_quasiconcave(t * t, g).pass);
  for (double a : {1.0, 2.0, 3.0}) CHECK(is_quasiconcave(PhiExpr::phi_alpha(a), g).pass);
  const auto r = is_quasiconcave(PhiExpr::constant(1) / (PhiExpr::constant(1) + t), g);
  CHECK_FALSE(r.pass);
  CHECK(r.reason == "phi decreases");
}

TEST_CASE("associate_fun") {
  const EvaluationGrid g;
  CHECK(associate_fun(t)(5) == 1);
  CHECK(associate_fun(PhiExpr::max1t())(0.3) == Approx(0.3));
  CHECK(associate_fun(PhiExpr::max1t())(3) == Approx(1));
  CHECK(associate_fun(PhiExpr::phi_alpha(1))(1) == Approx(1 / std::log(2.0)));
  for (const PhiExpr& f : {PhiExpr::max1t(), PhiExpr::phi_alpha(2), pow(t, 0.3)}) {
    const auto r = compare_equivalence(associate_fun(associate_fun(f)), f, g);
    CHECK(std::abs(r.ratio_min - 1) < 1e-12);
    CHECK(std::abs(r.ratio_max - 1) < 1e-12);
  }
}

TEST_CASE("tilde") {
  CHECK(tilde(PhiExpr::max1t(), 1).value == Approx(1 / std::log(2.0)).epsilon(1e-8));
  CHECK(tilde(PhiExpr::phi_alpha(2), 1).value == Approx(std::log(2.0)).epsilon(1e-6));
  CHECK(kind_of([] { tilde(t, 3); }) == ErrorKind::DegenerateInfimum);

  // tilde(max(1, t)) = t / log(1 + t) in closed form.
  for (double x : {1e-4, 0.1, 10.0, 1e5}) {
    CHECK(tilde(PhiExpr::max1t(), x).value == Approx(x / std::log1p(x)).epsilon(1e-8));
  }
}

TEST_CASE("tilde is below phi / log 2 and quasiconcave") {
  const EvaluationGrid g{1e-6, 1e6, 60};
  for (const PhiExpr& f : {PhiExpr::max1t(), PhiExpr::phi_alpha(1), PhiExpr::phi_alpha(2), pow(t, 0.5)}) {
    std::vector<double> xs = g.points();
    std::vector<double> v;
    for (double x : xs) {
      v.push_back(tilde(f, x).value);
      CHECK(v.back() <= f(x) / std::log(2.0) * (1 + 1e-12));
    }
    CHECK(is_quasiconcave(xs, v, 1e-8).pass);
  }
}

TEST_CASE("tilde of phi_2 is phi_1") {
  const auto r = compare_equivalence(tilde_function(PhiExpr::phi_alpha(2)), PhiExpr::phi_alpha(1), EvaluationGrid{},
                                     1 - 1e-4, 1 + 1e-4);
  CHECK(r.pass);
}

TEST_CASE("psi_marcinkiewicz") {
  CHECK(psi_marcinkiewicz(PhiExpr::max1t(), 1) == Approx(1).epsilon(1e-12));
  for (double x : EvaluationGrid{}.points()) {
    CHECK(std::abs(psi_marcinkiewicz(pow(t, 0.5), x) / (std::sqrt(x) / 2) - 1) < 1e-9);
  }
  CHECK(kind_of([] { psi_marcinkiewicz(PhiExpr::phi_alpha(1), 1); }) == ErrorKind::NotLocallyIntegrable);
  // max(1, t): t / (1 + log t) beyond 1.
  CHECK(psi_marcinkiewicz(PhiExpr::max1t(), 100) == Approx(100 / (1 + std::log(100.0))).epsilon(1e-10));
}

TEST_CASE("psi is quasiconcave and below phi") {
  const EvaluationGrid g{1e-6, 1e6, 80};
  for (const PhiExpr& f : {PhiExpr::max1t(), t / log1p(t), pow(t, 0.3)}) {
    const PhiExpr psi = psi_marcinkiewicz_function(f);
    std::vector<double> v;
    for (double x : g.points()) {
      v.push_back(psi(x));
      CHECK(v.back() <= f(x) * (1 + 1e-12));
      CHECK(v.back() == Approx(psi_marcinkiewicz(f, x)).epsilon(1e-8));
    }
    CHECK(is_quasiconcave(g.points(), v, 1e-9).pass);
  }
}

TEST_CASE("logc_constant") {
  CHECK(logc_constant(PhiExpr::phi_alpha(1), EvaluationGrid{}) == Approx(1).epsilon(1e-12));
  const double c2 = logc_constant(PhiExpr::phi_alpha(2), EvaluationGrid{});
  CHECK(c2 >= 0.5);
  double prev = INFINITY;
  for (double lo : {1e-2, 1e-4, 1e-8}) {
    const double c = logc_constant(t, EvaluationGrid{lo, 1, 50});
    CHECK(c < prev);
    prev = c;
  }
  CHECK(prev < 0.06);
}

TEST_CASE("compare_equivalence") {
  const auto same = compare_equivalence(PhiExpr::phi_alpha(2), PhiExpr::phi_alpha(2), EvaluationGrid{});
  CHECK(same.ratio_min == 1);
  CHECK(same.ratio_max == 1);
  const auto r = compare_equivalence(psi_marcinkiewicz_function(PhiExpr::max1t()), t / log1p(t), EvaluationGrid{});
  CHECK(r.spread() <= 4);
  CHECK(r.ratio_min <= r.ratio_max);
}

TEST_CASE("grid") {
  const auto p = EvaluationGrid{1e-2, 1e2, 5}.points();
  REQUIRE(p.size() == 5);
  CHECK(p.front() == 1e-2);
  CHECK(p.back() == 1e2);
  CHECK(p[2] == Approx(1));
  CHECK_THROWS_AS((EvaluationGrid{1, 1, 5}.validate()), Error);
  CHECK_THROWS_AS((EvaluationGrid{0, 1, 5}.validate()), Error);
  CHECK_THROWS_AS((EvaluationGrid{1, 2, 1}.validate()), Error);
}

TEST_CASE("phi_at_zero") {
  CHECK(phi_at_zero(PhiExpr::max1t()).value == Approx(1));
  CHECK(phi_at_zero(pow(t, 0.16)).value == 0);
  CHECK(phi_at_zero(PhiExpr::phi_alpha(1)).value == 0);
  CHECK(phi_at_zero(PhiExpr::constant(2) + t).value == Approx(2));
}
