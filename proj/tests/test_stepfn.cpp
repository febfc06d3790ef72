#include <cmath>
#include <random>

#include <doctest.h>

#include "oracles.hpp"
#include "rispace/error.hpp"
#include "rispace/step_function.hpp"

using namespace rispace;
using doctest::Approx;

namespace {

StepFunction two_level() { return StepFunction({1, 3}, {2, 1}); }

}  // namespace

TEST_CASE("construction canonicalizes") {
  const StepFunction f({1, 2, 3, 4}, {1, 1, 2, 0});
  CHECK(f == StepFunction({2, 3}, {1, 2}));
  CHECK(StepFunction({1, 2}, {0, 0}).is_zero());
  CHECK_THROWS_AS(StepFunction({2, 1}, {1, 1}), Error);
  CHECK_THROWS_AS(StepFunction({1}, {-1}), Error);
  CHECK_THROWS_AS(StepFunction({0}, {1}), Error);
  CHECK_THROWS_AS(StepFunction({1, INFINITY}, {1, 1}), Error);
}

TEST_CASE("rearrange") {
  CHECK(rearrange(StepFunction::indicator(1, 2)).function() == StepFunction::indicator(0, 1));
  CHECK(rearrange(two_level()).function() == two_level());
  CHECK(rearrange(StepFunction({1, 2, 3}, {1, 3, 2})).function() == StepFunction({1, 2, 3}, {3, 2, 1}));
  CHECK(rearrange(StepFunction()).is_zero());
}

TEST_CASE("rearrange against the distribution oracle") {
  std::mt19937_64 rng(11);
  for (int n = 0; n < 300; ++n) {
    const StepFunction f = random_step(rng);
    const DecreasingStep r = rearrange(f);
    const auto want = oracle::rearrangement(f);
    REQUIRE(r.pieces() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
      CHECK(r.values()[i] == want[i].value);
      CHECK(std::abs(r.breakpoints()[i] - want[i].right) <= 1e-12 * want[i].right);
    }
    CHECK(r.is_zero() == f.is_zero());
    CHECK(rearrange(r.function()) == r);
    CHECK(std::abs(r.integral() - f.integral()) <= 1e-12 * f.integral());
    for (double v : f.values()) {
      CHECK(distribution(r.function(), v) == Approx(distribution(f, v)).epsilon(1e-12));
    }
  }
}

TEST_CASE("distribution") {
  CHECK(distribution(StepFunction::indicator(0, 2.5), 0.5) == 2.5);
  CHECK(distribution(two_level(), 1.5) == 1);
  CHECK(distribution(two_level(), 2) == 0);
  CHECK(distribution(two_level(), 0) == 3);

  // log(s/t) on (0, s) by right-endpoint steps on a fine log mesh.
  const double s = 2.0;
  const int n = 20000;
  std::vector<double> b(n), v(n);
  for (int i = 0; i < n; ++i) {
    b[i] = s * std::exp(-30.0 * (n - 1 - i) / n);
    v[i] = std::log(s / b[i]);
  }
  v.back() = 1e-300;
  const StepFunction f(b, v);
  for (double r : {0.1, 1.0, 3.0, 10.0}) {
    CHECK(distribution(f, r) == Approx(s * std::exp(-r)).epsilon(2e-3));
  }
}

TEST_CASE("primitive") {
  const PiecewiseLinear F = primitive(StepFunction::indicator(0, 1));
  for (double t : {0.0, 0.25, 1.0, 7.0}) CHECK(F(t) == Approx(std::min(t, 1.0)));
  CHECK(primitive(StepFunction({1, 2}, {2, 1}))(2) == 3);
  CHECK(primitive(StepFunction())(5) == 0);
}

TEST_CASE("doublestar") {
  CHECK(doublestar(StepFunction::indicator(0, 1), 2) == 0.5);
  CHECK(doublestar(StepFunction::indicator(1, 2), 2) == 0.5);
  CHECK(doublestar(StepFunction({1, 2}, {2, 1}), 2) == 1.5);
  CHECK_THROWS_AS(doublestar(two_level(), 0), Error);

  std::mt19937_64 rng(3);
  for (int n = 0; n < 100; ++n) {
    const StepFunction f = random_step(rng);
    const DecreasingStep r = rearrange(f);
    double prev = INFINITY;
    for (double t : r.breakpoints()) {
      const double d = doublestar(f, t);
      CHECK(d <= prev * (1 + 1e-12));
      CHECK(d >= r(t) * (1 - 1e-12));
      prev = d;
    }
  }
}

TEST_CASE("hlp_leq") {
  const StepFunction chi = StepFunction::indicator(0, 1);
  CHECK(hlp_leq(two_level(), two_level()));
  CHECK(hlp_leq(chi, chi.scaled(2)));
  CHECK_FALSE(hlp_leq(chi.scaled(2), chi));
  CHECK(hlp_leq(StepFunction::indicator(0, 2), chi.scaled(2)));
  CHECK_FALSE(hlp_leq(chi.scaled(2), StepFunction::indicator(0, 2)));
}

TEST_CASE("hlp_leq is a partial order on random decreasing steps") {
  std::mt19937_64 rng(5);
  for (int n = 0; n < 200; ++n) {
    const StepFunction f = random_step(rng);
    const StepFunction g = random_step(rng, 5);
    const StepFunction h = random_step(rng, 5);
    const StepFunction fs = rearrange(f).function();
    CHECK(hlp_leq(f, fs + StepFunction::indicator(0, 0.5, 0.1)));
    CHECK(hlp_leq(f, fs));
    if (hlp_leq(f, g) && hlp_leq(g, f)) CHECK(rearrange(f) == rearrange(g));
    if (hlp_leq(f, g) && hlp_leq(g, h)) CHECK(hlp_leq(f, h));
    // Exactness: the answer agrees with the oracle primitives on a dense mesh.
    const auto pf = oracle::rearrangement(f);
    const auto pg = oracle::rearrangement(g);
    bool dense = true;
    for (double t = 1e-4; t < 1e4; t *= 1.01) {
      const double G = oracle::primitive_at(pg, t);
      if (oracle::primitive_at(pf, t) > G + 1e-12 * std::max(1.0, G)) dense = false;
    }
    if (hlp_leq(f, g)) CHECK(dense);
  }
}

TEST_CASE("json round trip") {
  const StepFunction f({0.5, 2}, {3, 1});
  nlohmann::json j = f;
  CHECK(j.dump() == R"({"breakpoints":[0.5,2.0],"values":[3.0,1.0]})");
  CHECK(j.get<StepFunction>() == f);
  CHECK_THROWS(nlohmann::json::parse(R"({"breakpoints":[1],"values":[1,2]})").get<StepFunction>());
}
