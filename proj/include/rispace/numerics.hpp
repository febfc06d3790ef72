#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <span>
#include <vector>

namespace rispace::numerics {

using RealFunction = std::function<double(double)>;

/// log(x / y) without overflow when the ratio leaves the double range.
inline double log_ratio(double x, double y) {
  const double r = x / y;
  return r > 0.0 && r < 1e300 && r > 1e-300 ? std::log(r) : std::log(x) - std::log(y);
}

/// Fixed-order Gauss-Legendre rule on [a, b]; order is 10 or 20.
double gauss_legendre(const RealFunction& f, double a, double b, int order = 20);

struct AdaptiveOptions {
  double rel_tol = 1e-11;
  double abs_tol = 0.0;
  int max_depth = 50;
  int max_intervals = 50000;
};

/// Globally adaptive Gauss-Legendre (20-point vs 10-point error estimate,
/// bisection). Endpoints are never evaluated. Throws Error(Evaluation) on a
/// non-finite integrand value.
double integrate(const RealFunction& f, double a, double b, const AdaptiveOptions& options = {});

/// As integrate, but in the variable log x when [a, b] spans more than a
/// decade (a > 0).
double integrate_log_scale(const RealFunction& f, double a, double b, const AdaptiveOptions& options = {});

struct SeriesOptions {
  /// Stop once a panel contributes less than this fraction of the running total.
  double stop_rel = 1e-12;
  int max_panels = 200;
  /// After max_panels, fit c_k ~ k^{-p} on the panel contributions; p above
  /// this threshold is summed as a convergent tail, otherwise divergence.
  double slow_tail_exponent = 1.5;
  int extension_panels = 800;
  AdaptiveOptions panel{};
};

struct SeriesResult {
  double value = 0.0;
  bool converged = false;
  int panels = 0;
  double last_contribution = 0.0;
  double tail_estimate = 0.0;
};

/// int_0^t f on geometric panels [t 2^{-k-1}, t 2^{-k}].
SeriesResult integrate_toward_zero(const RealFunction& f, double t, const SeriesOptions& options = {});

/// int_a^inf f on geometric panels [a 2^k, a 2^{k+1}], capped at 1e300.
SeriesResult integrate_toward_infinity(const RealFunction& f, double a, const SeriesOptions& options = {});

struct Minimum {
  double x = 0.0;
  double fx = 0.0;
};

Minimum golden_section_min(const RealFunction& f, double lo, double hi, double rel_tol = 1e-10,
                           int max_iter = 300);

/// Golden-section search started independently in `starts` equal sub-brackets
/// of [lo, hi]; returns the best minimum over all starts and both endpoints.
Minimum multistart_min(const RealFunction& f, double lo, double hi, int starts, double rel_tol = 1e-10);

/// Value at x = inf of the polynomial in 1/x through the samples; used for
/// limits that are approached like 1/log(1/r).
double extrapolate_inverse(std::span<const double> x, std::span<const double> v);

/// Limit of f(r) as r -> 0 when f depends on r through m = log(scale/r) like
/// a power series in 1/m. Samples at m = m_max/k, k = 1..10, with
/// m_max = log(scale/1e-300).
struct ZeroLimitSamples {
  double limit = 0.0;
  bool monotone = false;
  /// f at r = 1e-300.
  double last = 0.0;
};
ZeroLimitSamples limit_toward_zero(const RealFunction& f, double scale);

struct HalfLineSup {
  double value = 0.0;
  /// Location of the sup; 0 or inf when it is approached at an end.
  double at = 0.0;
  bool divergent = false;
};

/// sup_{t>0} f(t) for f continuous away from `kinks`: log-spaced samples on
/// [1e-290, 1e290] plus the kinks, golden refinement around the best sample,
/// and 1/log extrapolation when the sup sits at an end. Samples rising
/// monotonically over the outer 145 decades, whose increment over the last
/// 36.25 decades is at least 0.9 of the one before, count as divergence.
HalfLineSup sup_over_halfline(const RealFunction& f, const std::vector<double>& kinks = {}, int per_decade = 6);

/// count log-spaced points on [lo, hi], endpoints included.
std::vector<double> log_space(double lo, double hi, int count);

/// Running integral x -> int_0^x f, precomputed on log-spaced nodes so that a
/// query costs one adaptive panel.
class CumulativeIntegral {
 public:
  CumulativeIntegral(RealFunction f, double lo, double hi, int per_decade, double head);

  double operator()(double x) const;
  double lo() const { return nodes_.front(); }
  double hi() const { return nodes_.back(); }

 private:
  RealFunction f_;
  std::vector<double> nodes_;
  std::vector<double> cumulative_;
  double log_lo_ = 0.0;
  double step_ = 0.0;
};

/// x -> int_0^x f (From::Zero) or x -> int_x^end f (From::End), precomputed
/// between sorted nodes so that a query costs one adaptive panel. With
/// From::End and end = inf the head is a geometric series toward infinity.
class RunningIntegral {
 public:
  enum class From { Zero, End };
  RunningIntegral(RealFunction f, std::vector<double> nodes, From from,
                  double end = std::numeric_limits<double>::infinity());

  double operator()(double x) const;

 private:
  RealFunction f_;
  std::vector<double> nodes_;
  std::vector<double> cumulative_;
  From from_;
  double end_;
};

/// Default node set for running integrals: 4 per decade on [1e-280, 1e280]
/// merged with the given kinks.
std::vector<double> running_nodes(const std::vector<double>& kinks, double end = std::numeric_limits<double>::infinity());

/// Positive function tabulated on log-spaced nodes, interpolated by cubic
/// Hermite in log-log coordinates and extrapolated as a power law.
class LogTable {
 public:
  LogTable() = default;
  LogTable(const RealFunction& f, double lo, double hi, int per_decade);
  LogTable(std::vector<double> nodes, std::vector<double> values);

  double operator()(double x) const;
  /// d/dx of the interpolant.
  double derivative(double x) const;
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& values() const { return values_; }

 private:
  void prepare();
  double log_slope(std::size_t i) const;

  std::vector<double> nodes_;
  std::vector<double> values_;
  std::vector<double> lx_;
  std::vector<double> ly_;
  std::vector<double> slope_;
};

/// LogTable built on first use; safe to share between threads.
class LazyLogTable {
 public:
  explicit LazyLogTable(std::function<LogTable()> make) : make_(std::move(make)) {}
  LazyLogTable(RealFunction f, double lo, double hi, int per_decade);

  const LogTable& get() const;

 private:
  std::function<LogTable()> make_;
  mutable std::once_flag flag_;
  mutable LogTable table_;
};

}  // namespace rispace::numerics
