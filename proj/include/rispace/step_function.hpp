#pragma once

#include <random>
#include <span>
#include <vector>

#include <json.hpp>

namespace rispace {

/// Nonnegative, compactly supported step function on (0, inf).
///
/// The function equals values[i] on (b[i-1], b[i]] with b[-1] = 0 and is zero
/// past the last breakpoint. Construction validates and canonicalizes: equal
/// adjacent pieces merge and trailing zero pieces are dropped, so two step
/// functions are equal iff their representations are.
class StepFunction {
 public:
  StepFunction() = default;
  StepFunction(std::vector<double> breakpoints, std::vector<double> values);

  /// c * chi_(a, b).
  static StepFunction indicator(double a, double b, double c = 1.0);

  std::span<const double> breakpoints() const { return breakpoints_; }
  std::span<const double> values() const { return values_; }
  std::size_t pieces() const { return values_.size(); }
  bool is_zero() const { return values_.empty(); }

  /// Right end of the support (0 for the zero function).
  double support_end() const { return breakpoints_.empty() ? 0.0 : breakpoints_.back(); }
  double left_of(std::size_t i) const { return i == 0 ? 0.0 : breakpoints_[i - 1]; }

  double operator()(double t) const;
  double sup() const;
  double integral() const;
  bool is_nonincreasing() const;

  StepFunction scaled(double c) const;

  friend StepFunction operator+(const StepFunction& a, const StepFunction& b);
  friend bool operator==(const StepFunction&, const StepFunction&) = default;

 private:
  std::vector<double> breakpoints_;
  std::vector<double> values_;
};

/// A StepFunction known to be nonincreasing.
class DecreasingStep {
 public:
  DecreasingStep() = default;
  explicit DecreasingStep(StepFunction f);

  const StepFunction& function() const { return f_; }
  std::span<const double> breakpoints() const { return f_.breakpoints(); }
  std::span<const double> values() const { return f_.values(); }
  std::size_t pieces() const { return f_.pieces(); }
  bool is_zero() const { return f_.is_zero(); }
  double operator()(double t) const { return f_(t); }
  double sup() const { return f_.values().empty() ? 0.0 : f_.values().front(); }
  double integral() const { return f_.integral(); }

  DecreasingStep scaled(double c) const { return DecreasingStep(f_.scaled(c)); }

  friend bool operator==(const DecreasingStep&, const DecreasingStep&) = default;

 private:
  StepFunction f_;
};

/// Continuous piecewise-linear function with F(0) = 0, given by its values at
/// knots; constant with the last slope past the final knot.
class PiecewiseLinear {
 public:
  PiecewiseLinear() = default;
  PiecewiseLinear(std::vector<double> knots, std::vector<double> knot_values, double tail_slope);

  double operator()(double t) const;
  std::span<const double> knots() const { return knots_; }
  std::span<const double> knot_values() const { return knot_values_; }
  double tail_slope() const { return tail_slope_; }

 private:
  std::vector<double> knots_;
  std::vector<double> knot_values_;
  double tail_slope_ = 0.0;
};

DecreasingStep rearrange(const StepFunction& f);

/// |{t : f(t) > level}|.
double distribution(const StepFunction& f, double level);

/// F(t) = int_0^t f, exact.
PiecewiseLinear primitive(const StepFunction& f);

/// f**(t) = t^{-1} int_0^t f*.
double doublestar(const StepFunction& f, double t);

/// Hardy-Littlewood-Polya majorization f < g, checked exactly at the merged
/// breakpoints of the two rearrangements. `tol` is an absolute slack scaled by
/// max(1, |G(t)|).
bool hlp_leq(const StepFunction& f, const StepFunction& g, double tol = 1e-12);

/// int_0^inf f g, exact.
double inner_product(const StepFunction& f, const StepFunction& g);

/// Random step: piece count uniform on 1..max_pieces, breakpoints and values
/// log-uniform on [1e-3, 1e3].
StepFunction random_step(std::mt19937_64& rng, int max_pieces = 20);
/// As random_step with the values sorted in decreasing order.
DecreasingStep random_decreasing_step(std::mt19937_64& rng, int max_pieces = 20);

void to_json(nlohmann::json& j, const StepFunction& f);
void from_json(const nlohmann::json& j, StepFunction& f);

}  // namespace rispace
