#include "rispace/step_function.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "rispace/error.hpp"

namespace rispace {

namespace {

void canonicalize(std::vector<double>& b, std::vector<double>& v) {
  std::vector<double> nb;
  std::vector<double> nv;
  nb.reserve(b.size());
  nv.reserve(v.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (!nv.empty() && nv.back() == v[i]) {
      nb.back() = b[i];
    } else {
      nb.push_back(b[i]);
      nv.push_back(v[i]);
    }
  }
  while (!nv.empty() && nv.back() == 0.0) {
    nv.pop_back();
    nb.pop_back();
  }
  b = std::move(nb);
  v = std::move(nv);
}

}  // namespace

StepFunction::StepFunction(std::vector<double> breakpoints, std::vector<double> values)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
  if (breakpoints_.size() != values_.size()) {
    fail(ErrorKind::InvalidInput, "step function: breakpoints and values differ in length");
  }
  double prev = 0.0;
  for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
    const double b = breakpoints_[i];
    if (!std::isfinite(b) || !(b > prev)) {
      std::ostringstream os;
      os << "step function: breakpoint " << i << " = " << b << " is not finite and strictly increasing";
      fail(ErrorKind::InvalidInput, os.str());
    }
    if (!std::isfinite(values_[i]) || values_[i] < 0.0) {
      std::ostringstream os;
      os << "step function: value " << i << " = " << values_[i] << " is not finite and nonnegative";
      fail(ErrorKind::InvalidInput, os.str());
    }
    prev = b;
  }
  canonicalize(breakpoints_, values_);
}

StepFunction StepFunction::indicator(double a, double b, double c) {
  if (!(a >= 0.0) || !(b > a)) fail(ErrorKind::InvalidInput, "indicator: need 0 <= a < b");
  if (a == 0.0) return StepFunction({b}, {c});
  return StepFunction({a, b}, {0.0, c});
}

double StepFunction::operator()(double t) const {
  if (t <= 0.0 || breakpoints_.empty() || t > breakpoints_.back()) return 0.0;
  const auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), t);
  return values_[static_cast<std::size_t>(it - breakpoints_.begin())];
}

double StepFunction::sup() const {
  return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

double StepFunction::integral() const {
  double total = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) total += values_[i] * (breakpoints_[i] - left_of(i));
  return total;
}

bool StepFunction::is_nonincreasing() const {
  return std::is_sorted(values_.rbegin(), values_.rend());
}

StepFunction StepFunction::scaled(double c) const {
  if (!(c >= 0.0) || !std::isfinite(c)) fail(ErrorKind::InvalidInput, "scaled: factor must be finite and >= 0");
  std::vector<double> v = values_;
  for (double& x : v) x *= c;
  return StepFunction(breakpoints_, std::move(v));
}

StepFunction operator+(const StepFunction& a, const StepFunction& b) {
  std::vector<double> knots;
  knots.reserve(a.pieces() + b.pieces());
  std::merge(a.breakpoints_.begin(), a.breakpoints_.end(), b.breakpoints_.begin(), b.breakpoints_.end(),
             std::back_inserter(knots));
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  std::vector<double> vals;
  vals.reserve(knots.size());
  for (double k : knots) vals.push_back(a(k) + b(k));
  return StepFunction(std::move(knots), std::move(vals));
}

DecreasingStep::DecreasingStep(StepFunction f) : f_(std::move(f)) {
  if (!f_.is_nonincreasing()) fail(ErrorKind::InvalidInput, "decreasing step: values are not nonincreasing");
}

PiecewiseLinear::PiecewiseLinear(std::vector<double> knots, std::vector<double> knot_values, double tail_slope)
    : knots_(std::move(knots)), knot_values_(std::move(knot_values)), tail_slope_(tail_slope) {
  if (knots_.size() != knot_values_.size()) fail(ErrorKind::InvalidInput, "piecewise linear: size mismatch");
}

double PiecewiseLinear::operator()(double t) const {
  if (t <= 0.0) return 0.0;
  if (knots_.empty()) return tail_slope_ * t;
  if (t >= knots_.back()) return knot_values_.back() + tail_slope_ * (t - knots_.back());
  const auto it = std::lower_bound(knots_.begin(), knots_.end(), t);
  const auto i = static_cast<std::size_t>(it - knots_.begin());
  const double x0 = i == 0 ? 0.0 : knots_[i - 1];
  const double y0 = i == 0 ? 0.0 : knot_values_[i - 1];
  const double w = (t - x0) / (knots_[i] - x0);
  return y0 + w * (knot_values_[i] - y0);
}

DecreasingStep rearrange(const StepFunction& f) {
  struct Piece {
    double value;
    double length;
  };
  std::vector<Piece> pieces;
  pieces.reserve(f.pieces());
  for (std::size_t i = 0; i < f.pieces(); ++i) {
    if (f.values()[i] > 0.0) pieces.push_back({f.values()[i], f.breakpoints()[i] - f.left_of(i)});
  }
  std::stable_sort(pieces.begin(), pieces.end(), [](const Piece& a, const Piece& b) { return a.value > b.value; });
  std::vector<double> b;
  std::vector<double> v;
  b.reserve(pieces.size());
  v.reserve(pieces.size());
  double end = 0.0;
  for (const Piece& p : pieces) {
    end += p.length;
    b.push_back(end);
    v.push_back(p.value);
  }
  return DecreasingStep(StepFunction(std::move(b), std::move(v)));
}

double distribution(const StepFunction& f, double level) {
  if (level < 0.0) fail(ErrorKind::InvalidInput, "distribution: level must be >= 0");
  double measure = 0.0;
  for (std::size_t i = 0; i < f.pieces(); ++i) {
    if (f.values()[i] > level) measure += f.breakpoints()[i] - f.left_of(i);
  }
  return measure;
}

PiecewiseLinear primitive(const StepFunction& f) {
  std::vector<double> knots(f.breakpoints().begin(), f.breakpoints().end());
  std::vector<double> vals;
  vals.reserve(knots.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < f.pieces(); ++i) {
    acc += f.values()[i] * (f.breakpoints()[i] - f.left_of(i));
    vals.push_back(acc);
  }
  return PiecewiseLinear(std::move(knots), std::move(vals), 0.0);
}

double doublestar(const StepFunction& f, double t) {
  if (!(t > 0.0)) fail(ErrorKind::InvalidInput, "doublestar: t must be > 0");
  return primitive(rearrange(f).function())(t) / t;
}

bool hlp_leq(const StepFunction& f, const StepFunction& g, double tol) {
  const DecreasingStep fs = rearrange(f);
  const DecreasingStep gs = rearrange(g);
  const PiecewiseLinear F = primitive(fs.function());
  const PiecewiseLinear G = primitive(gs.function());
  std::vector<double> knots;
  std::merge(fs.breakpoints().begin(), fs.breakpoints().end(), gs.breakpoints().begin(), gs.breakpoints().end(),
             std::back_inserter(knots));
  for (double k : knots) {
    const double gk = G(k);
    if (F(k) > gk + tol * std::max(1.0, std::abs(gk))) return false;
  }
  return true;
}

double inner_product(const StepFunction& f, const StepFunction& g) {
  std::vector<double> knots;
  std::merge(f.breakpoints().begin(), f.breakpoints().end(), g.breakpoints().begin(), g.breakpoints().end(),
             std::back_inserter(knots));
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  double total = 0.0;
  double left = 0.0;
  for (double k : knots) {
    total += f(k) * g(k) * (k - left);
    left = k;
  }
  return total;
}

namespace {

std::pair<std::vector<double>, std::vector<double>> random_pieces(std::mt19937_64& rng, int max_pieces) {
  std::uniform_int_distribution<int> count(1, max_pieces);
  std::uniform_real_distribution<double> exponent(-3.0, 3.0);
  const int n = count(rng);
  std::vector<double> b;
  std::vector<double> v;
  for (int i = 0; i < n; ++i) b.push_back(std::pow(10.0, exponent(rng)));
  for (int i = 0; i < n; ++i) v.push_back(std::pow(10.0, exponent(rng)));
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  v.resize(b.size());
  return {std::move(b), std::move(v)};
}

}  // namespace

StepFunction random_step(std::mt19937_64& rng, int max_pieces) {
  auto [b, v] = random_pieces(rng, max_pieces);
  return StepFunction(std::move(b), std::move(v));
}

DecreasingStep random_decreasing_step(std::mt19937_64& rng, int max_pieces) {
  auto [b, v] = random_pieces(rng, max_pieces);
  std::sort(v.begin(), v.end(), std::greater<>());
  return DecreasingStep(StepFunction(std::move(b), std::move(v)));
}

void to_json(nlohmann::json& j, const StepFunction& f) {
  j = nlohmann::json{{"breakpoints", std::vector<double>(f.breakpoints().begin(), f.breakpoints().end())},
                     {"values", std::vector<double>(f.values().begin(), f.values().end())}};
}

void from_json(const nlohmann::json& j, StepFunction& f) {
  if (!j.is_object() || !j.contains("breakpoints") || !j.contains("values")) {
    fail(ErrorKind::InvalidInput, "step function JSON needs \"breakpoints\" and \"values\"");
  }
  f = StepFunction(j.at("breakpoints").get<std::vector<double>>(), j.at("values").get<std::vector<double>>());
}

}  // namespace rispace
