#include "rispace/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>

#include "rispace/error.hpp"

namespace rispace::numerics {

namespace {

// Integrand values below this are near the subnormal range and carry no
// usable precision; errors are only resolved down to kErrorFloor * (b - a).
constexpr double kErrorFloor = 1e-300;

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

Rule make_rule(int n) {
  Rule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[static_cast<std::size_t>(i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

const Rule& rule_for(int order) {
  static const Rule r10 = make_rule(10);
  static const Rule r20 = make_rule(20);
  return order == 10 ? r10 : r20;
}

double checked(const RealFunction& f, double x) {
  const double y = f(x);
  if (!std::isfinite(y)) {
    std::ostringstream os;
    os << "integrand is not finite at x = " << x;
    fail(ErrorKind::Evaluation, os.str());
  }
  return y;
}

struct Segment {
  double a;
  double b;
  double value;
  double error;
  int depth;
  bool operator<(const Segment& other) const { return error < other.error; }
};

Segment evaluate_segment(const RealFunction& f, double a, double b, int depth) {
  const double hi = gauss_legendre(f, a, b, 20);
  const double lo = gauss_legendre(f, a, b, 10);
  return {a, b, hi, std::abs(hi - lo), depth};
}

// Polynomial decay c_k ~ k^{-p} between panel indices k/2 and k.
double decay_exponent(const std::vector<double>& c) {
  const std::size_t k = c.size();
  const double late = std::abs(c[k - 1]);
  const double early = std::abs(c[k / 2 - 1]);
  if (late == 0.0) return std::numeric_limits<double>::infinity();
  if (early == 0.0) return 0.0;
  return std::log(early / late) / std::log(static_cast<double>(k) / static_cast<double>(k / 2));
}

template <class NextPanel>
SeriesResult geometric_series(const RealFunction& f, const SeriesOptions& options, NextPanel next_panel) {
  SeriesResult result;
  std::vector<double> contributions;
  contributions.reserve(static_cast<std::size_t>(options.max_panels + options.extension_panels));
  double a = 0.0;
  double b = 0.0;
  bool exhausted = false;
  auto run = [&](int limit) {
    while (static_cast<int>(contributions.size()) < limit) {
      if (!next_panel(a, b)) {
        exhausted = true;
        return false;
      }
      const double c = integrate(f, a, b, options.panel);
      contributions.push_back(c);
      result.value += c;
      result.last_contribution = c;
      ++result.panels;
      if (result.panels >= 3 && std::abs(c) <= options.stop_rel * std::abs(result.value)) {
        result.converged = true;
        return true;
      }
    }
    return false;
  };
  if (run(options.max_panels)) return result;
  if (contributions.size() < 4) return result;
  if (exhausted) {
    // Out of representable panels: sum the rest as a geometric tail.
    const std::size_t n = contributions.size();
    const std::size_t j = n - 1 - std::min<std::size_t>(n - 3, 50);
    const double r = contributions[n - 1] / contributions[n - 2];
    const double r_old = contributions[j] / contributions[j - 1];
    // A power-law sequence drifts toward ratio 1; a geometric one does not.
    if (!(r >= 0.0 && r < 1.0) || std::abs(r_old - r) > 1e-3 * (1.0 - r)) return result;
    result.tail_estimate = contributions[n - 1] * r / (1.0 - r);
    result.value += result.tail_estimate;
    result.converged = true;
    return result;
  }
  double p = decay_exponent(contributions);
  if (!(p > options.slow_tail_exponent)) return result;
  if (run(options.max_panels + options.extension_panels)) return result;
  p = decay_exponent(contributions);
  if (!(p > options.slow_tail_exponent)) return result;
  const double k = static_cast<double>(contributions.size());
  result.tail_estimate = std::isfinite(p) ? std::abs(contributions.back()) * k / (p - 1.0) : 0.0;
  result.value += result.tail_estimate;
  result.converged = true;
  return result;
}

}  // namespace

double gauss_legendre(const RealFunction& f, double a, double b, int order) {
  const Rule& rule = rule_for(order);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * checked(f, mid + half * rule.nodes[i]);
  return sum * half;
}

double integrate(const RealFunction& f, double a, double b, const AdaptiveOptions& options) {
  if (a == b) return 0.0;
  if (b < a) return -integrate(f, b, a, options);
  std::priority_queue<Segment> queue;
  Segment first = evaluate_segment(f, a, b, 0);
  double total = first.value;
  double total_error = first.error;
  queue.push(first);
  int intervals = 1;
  while (total_error > std::max({options.rel_tol * std::abs(total), options.abs_tol, kErrorFloor * (b - a)}) &&
         intervals < options.max_intervals) {
    Segment s = queue.top();
    if (s.depth >= options.max_depth) break;
    queue.pop();
    const double m = 0.5 * (s.a + s.b);
    const Segment left = evaluate_segment(f, s.a, m, s.depth + 1);
    const Segment right = evaluate_segment(f, m, s.b, s.depth + 1);
    total += left.value + right.value - s.value;
    total_error += left.error + right.error - s.error;
    queue.push(left);
    queue.push(right);
    ++intervals;
  }
  // Re-sum to shed accumulated cancellation error from the running updates.
  double sum = 0.0;
  while (!queue.empty()) {
    sum += queue.top().value;
    queue.pop();
  }
  return sum;
}

double integrate_log_scale(const RealFunction& f, double a, double b, const AdaptiveOptions& options) {
  if (a == b) return 0.0;
  if (b < a) return -integrate_log_scale(f, b, a, options);
  if (b <= 10.0 * a) return integrate(f, a, b, options);
  return integrate(
      [&](double u) {
        const double x = std::exp(u);
        return f(x) * x;
      },
      std::log(a), std::log(b), options);
}

SeriesResult integrate_toward_zero(const RealFunction& f, double t, const SeriesOptions& options) {
  double hi = t;
  return geometric_series(f, options, [&](double& a, double& b) {
    if (hi < 1e-300) return false;
    b = hi;
    a = hi * 0.5;
    hi = a;
    return true;
  });
}

SeriesResult integrate_toward_infinity(const RealFunction& f, double a0, const SeriesOptions& options) {
  double lo = a0;
  return geometric_series(f, options, [&](double& a, double& b) {
    if (lo > 1e300) return false;
    a = lo;
    b = lo * 2.0;
    lo = b;
    return true;
  });
}

double extrapolate_inverse(std::span<const double> x, std::span<const double> v) {
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double w = 1.0;
    const double ui = 1.0 / x[i];
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (j == i) continue;
      const double uj = 1.0 / x[j];
      w *= -uj / (ui - uj);
    }
    total += w * v[i];
  }
  return total;
}

ZeroLimitSamples limit_toward_zero(const RealFunction& f, double scale) {
  constexpr int kSamples = 10;
  const double m_max = std::log(scale) - std::log(1e-300);
  double m[kSamples];
  double v[kSamples];
  for (int k = 0; k < kSamples; ++k) {
    m[k] = m_max / (k + 1);
    v[k] = f(scale * std::exp(-m[k]));
  }
  ZeroLimitSamples out;
  out.last = v[0];
  bool up = true;
  bool down = true;
  for (int k = 1; k < kSamples; ++k) {
    up = up && v[k - 1] >= v[k];
    down = down && v[k - 1] <= v[k];
  }
  out.monotone = up || down;
  out.limit = extrapolate_inverse(m, v);
  return out;
}

Minimum golden_section_min(const RealFunction& f, double lo, double hi, double rel_tol, int max_iter) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < max_iter; ++it) {
    if (std::abs(b - a) <= rel_tol * std::max(1.0, std::abs(a) + std::abs(b))) break;
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return fc < fd ? Minimum{c, fc} : Minimum{d, fd};
}

Minimum multistart_min(const RealFunction& f, double lo, double hi, int starts, double rel_tol) {
  Minimum best{lo, f(lo)};
  const double fhi = f(hi);
  if (fhi < best.fx) best = {hi, fhi};
  const double width = (hi - lo) / starts;
  for (int i = 0; i < starts; ++i) {
    const double a = lo + i * width;
    const double b = i + 1 == starts ? hi : a + width;
    const Minimum m = golden_section_min(f, a, b, rel_tol);
    if (m.fx < best.fx) best = m;
  }
  return best;
}

std::vector<double> log_space(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2) fail(ErrorKind::InvalidInput, "log_space: need 0 < lo < hi and count >= 2");
  std::vector<double> out(static_cast<std::size_t>(count));
  const double l0 = std::log(lo);
  const double l1 = std::log(hi);
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = std::exp(l0 + (l1 - l0) * i / (count - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

CumulativeIntegral::CumulativeIntegral(RealFunction f, double lo, double hi, int per_decade, double head)
    : f_(std::move(f)) {
  const int count = static_cast<int>(std::ceil((std::log10(hi) - std::log10(lo)) * per_decade)) + 1;
  nodes_ = log_space(lo, hi, count);
  log_lo_ = std::log(lo);
  step_ = (std::log(hi) - log_lo_) / (count - 1);
  cumulative_.resize(nodes_.size());
  cumulative_[0] = head;
  AdaptiveOptions opts;
  opts.rel_tol = 1e-13;
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    cumulative_[i] = cumulative_[i - 1] + integrate(f_, nodes_[i - 1], nodes_[i], opts);
  }
}

double CumulativeIntegral::operator()(double x) const {
  AdaptiveOptions opts;
  opts.rel_tol = 1e-13;
  if (x <= nodes_.front()) return x * f_(x);
  if (x >= nodes_.back()) return cumulative_.back() + integrate(f_, nodes_.back(), x, opts);
  auto k = static_cast<std::size_t>(std::floor((std::log(x) - log_lo_) / step_));
  k = std::min(k, nodes_.size() - 1);
  while (k > 0 && nodes_[k] > x) --k;
  while (k + 1 < nodes_.size() && nodes_[k + 1] <= x) ++k;
  return cumulative_[k] + integrate(f_, nodes_[k], x, opts);
}

HalfLineSup sup_over_halfline(const RealFunction& f, const std::vector<double>& kinks, int per_decade) {
  constexpr double lo = 1e-290;
  constexpr double hi = 1e290;
  std::vector<double> t = log_space(lo, hi, 580 * per_decade + 1);
  std::vector<double> k_in;
  for (double k : kinks) {
    if (k > lo && k < hi) k_in.push_back(k);
  }
  std::sort(k_in.begin(), k_in.end());
  // A node within rounding of a kink would squeeze the refinement bracket.
  std::erase_if(t, [&](double x) {
    const auto it = std::lower_bound(k_in.begin(), k_in.end(), x * (1 - 1e-9));
    return it != k_in.end() && *it <= x * (1 + 1e-9);
  });
  t.insert(t.end(), k_in.begin(), k_in.end());
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  HalfLineSup out;
  std::size_t best = 0;
  std::vector<double> v(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    v[i] = f(t[i]);
    if (std::isnan(v[i])) fail(ErrorKind::Evaluation, "sup: NaN at t = " + std::to_string(t[i]));
    if (std::isinf(v[i])) {
      out.value = v[i];
      out.at = t[i];
      out.divergent = true;
      return out;
    }
    if (v[i] > v[best]) best = i;
  }
  out.value = v[best];
  out.at = t[best];
  const std::size_t n = t.size();
  // Still rising at the last sample with increments over the two outer
  // 36.25-decade spans that do not shrink (log-type growth or faster) counts
  // as divergence, even when the largest sample is interior. Saturating
  // growth shrinks its increment and is extrapolated below.
  for (const bool at_infinity : {false, true}) {
    const double end = at_infinity ? v.back() : v.front();
    const double inner = at_infinity ? f(3.1622776601683795e217) : f(3.1622776601683795e-218);
    const double mid = at_infinity ? f(5.6234132519034906e253) : f(1.7782794100389228e-254);
    bool rising = true;
    for (std::size_t i = 1; i < n && rising; ++i) {
      if (at_infinity && t[i - 1] >= 1e145) rising = v[i] >= v[i - 1];
      if (!at_infinity && t[i] <= 1e-145) rising = v[i - 1] >= v[i];
    }
    const double next = at_infinity ? v[n - 2] : v[1];
    if (rising && end > next * (1 + 1e-12) && mid > inner && end - mid >= 0.9 * (mid - inner)) {
      out.value = std::numeric_limits<double>::infinity();
      out.divergent = true;
      out.at = at_infinity ? std::numeric_limits<double>::infinity() : 0.0;
      return out;
    }
  }
  if (best > 0 && best + 1 < n) {
    const Minimum m = golden_section_min([&](double u) { return -f(std::exp(u)); }, std::log(t[best - 1]),
                                         std::log(t[best + 1]), 1e-12);
    if (-m.fx > out.value) {
      out.value = -m.fx;
      out.at = std::exp(m.x);
    }
    return out;
  }
  // The sup is approached at an end of the scanned range, unless the scan is
  // already flat there.
  const bool at_infinity = best + 1 == n;
  if (n > 1 && std::abs(v[at_infinity ? n - 2 : 1] - v[best]) <= 1e-12 * std::abs(v[best])) return out;
  const ZeroLimitSamples lim =
      at_infinity ? limit_toward_zero([&](double r) { return f(1.0 / r); }, 1.0) : limit_toward_zero(f, 1.0);
  if (lim.monotone && std::isfinite(lim.limit)) out.value = std::max(out.value, lim.limit);
  out.at = at_infinity ? std::numeric_limits<double>::infinity() : 0.0;
  return out;
}

std::vector<double> running_nodes(const std::vector<double>& kinks, double end) {
  std::vector<double> nodes = log_space(1e-280, 1e280, 2241);
  for (double k : kinks) {
    if (k > 0.0 && std::isfinite(k)) nodes.push_back(k);
  }
  if (std::isfinite(end)) {
    nodes.push_back(end);
    std::erase_if(nodes, [end](double x) { return x > end; });
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  return nodes;
}

RunningIntegral::RunningIntegral(RealFunction f, std::vector<double> nodes, From from, double end)
    : f_(std::move(f)), nodes_(std::move(nodes)), from_(from), end_(end) {
  if (nodes_.empty()) fail(ErrorKind::InvalidInput, "running integral: no nodes");
  AdaptiveOptions opts;
  opts.rel_tol = 1e-12;
  cumulative_.resize(nodes_.size());
  const double inf = std::numeric_limits<double>::infinity();
  if (from_ == From::Zero) {
    const SeriesResult head = integrate_toward_zero(f_, nodes_.front());
    cumulative_[0] = head.converged ? head.value : inf;
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
      cumulative_[i] = cumulative_[i - 1] + integrate(f_, nodes_[i - 1], nodes_[i], opts);
    }
  } else {
    const std::size_t n = nodes_.size();
    if (std::isfinite(end_)) {
      cumulative_[n - 1] = end_ > nodes_[n - 1] ? integrate(f_, nodes_[n - 1], end_, opts) : 0.0;
    } else {
      const SeriesResult head = integrate_toward_infinity(f_, nodes_[n - 1]);
      cumulative_[n - 1] = head.converged ? head.value : inf;
    }
    for (std::size_t i = n - 1; i-- > 0;) {
      cumulative_[i] = cumulative_[i + 1] + integrate(f_, nodes_[i], nodes_[i + 1], opts);
    }
  }
}

double RunningIntegral::operator()(double x) const {
  AdaptiveOptions opts;
  opts.rel_tol = 1e-12;
  const double inf = std::numeric_limits<double>::infinity();
  if (from_ == From::Zero) {
    if (x <= 0.0) return 0.0;
    if (x < nodes_.front()) {
      const SeriesResult s = integrate_toward_zero(f_, x);
      return s.converged ? s.value : inf;
    }
    const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
    const auto k = static_cast<std::size_t>(it - nodes_.begin()) - 1;
    return cumulative_[k] + integrate_log_scale(f_, nodes_[k], x, opts);
  }
  if (x >= end_) return 0.0;
  if (x > nodes_.back()) {
    if (std::isfinite(end_)) return integrate_log_scale(f_, x, end_, opts);
    const SeriesResult s = integrate_toward_infinity(f_, x);
    return s.converged ? s.value : inf;
  }
  const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), x);
  const auto k = static_cast<std::size_t>(it - nodes_.begin());
  return cumulative_[k] + integrate_log_scale(f_, x, nodes_[k], opts);
}

LogTable::LogTable(const RealFunction& f, double lo, double hi, int per_decade) {
  const int count = static_cast<int>(std::ceil((std::log10(hi) - std::log10(lo)) * per_decade)) + 1;
  nodes_ = log_space(lo, hi, count);
  values_.reserve(nodes_.size());
  for (double x : nodes_) values_.push_back(f(x));
  prepare();
}

LogTable::LogTable(std::vector<double> nodes, std::vector<double> values)
    : nodes_(std::move(nodes)), values_(std::move(values)) {
  prepare();
}

void LogTable::prepare() {
  if (nodes_.size() < 2 || nodes_.size() != values_.size()) fail(ErrorKind::InvalidInput, "log table: need >= 2 nodes");
  lx_.resize(nodes_.size());
  ly_.resize(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!(values_[i] > 0.0) || !std::isfinite(values_[i])) {
      std::ostringstream os;
      os << "log table: value at " << nodes_[i] << " is not positive and finite (" << values_[i] << ")";
      fail(ErrorKind::Evaluation, os.str());
    }
    lx_[i] = std::log(nodes_[i]);
    ly_[i] = std::log(values_[i]);
  }
  slope_.resize(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) slope_[i] = log_slope(i);
}

double LogTable::log_slope(std::size_t i) const {
  const std::size_t n = lx_.size();
  if (i == 0) return (ly_[1] - ly_[0]) / (lx_[1] - lx_[0]);
  if (i + 1 == n) return (ly_[n - 1] - ly_[n - 2]) / (lx_[n - 1] - lx_[n - 2]);
  const double h0 = lx_[i] - lx_[i - 1];
  const double h1 = lx_[i + 1] - lx_[i];
  if (i >= 2 && i + 2 < n) {
    const double hm = lx_[i - 1] - lx_[i - 2];
    const double hp = lx_[i + 2] - lx_[i + 1];
    const double tol = 1e-9 * h0;
    if (std::abs(h1 - h0) < tol && std::abs(hm - h0) < tol && std::abs(hp - h0) < tol) {
      // Fourth-order central difference on a uniform stencil.
      return (ly_[i - 2] - 8.0 * ly_[i - 1] + 8.0 * ly_[i + 1] - ly_[i + 2]) / (12.0 * h0);
    }
  }
  const double d0 = (ly_[i] - ly_[i - 1]) / h0;
  const double d1 = (ly_[i + 1] - ly_[i]) / h1;
  return (d0 * h1 + d1 * h0) / (h0 + h1);
}

double LogTable::operator()(double x) const {
  const double lx = std::log(x);
  if (lx <= lx_.front()) return std::exp(ly_.front() + slope_.front() * (lx - lx_.front()));
  if (lx >= lx_.back()) return std::exp(ly_.back() + slope_.back() * (lx - lx_.back()));
  const auto it = std::upper_bound(lx_.begin(), lx_.end(), lx);
  const auto i = static_cast<std::size_t>(it - lx_.begin()) - 1;
  const double h = lx_[i + 1] - lx_[i];
  const double s = (lx - lx_[i]) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double y = (2 * s3 - 3 * s2 + 1) * ly_[i] + (s3 - 2 * s2 + s) * h * slope_[i] +
                   (-2 * s3 + 3 * s2) * ly_[i + 1] + (s3 - s2) * h * slope_[i + 1];
  return std::exp(y);
}

double LogTable::derivative(double x) const {
  const double lx = std::log(x);
  double dlog = 0.0;
  if (lx <= lx_.front()) {
    dlog = slope_.front();
  } else if (lx >= lx_.back()) {
    dlog = slope_.back();
  } else {
    const auto it = std::upper_bound(lx_.begin(), lx_.end(), lx);
    const auto i = static_cast<std::size_t>(it - lx_.begin()) - 1;
    const double h = lx_[i + 1] - lx_[i];
    const double s = (lx - lx_[i]) / h;
    const double s2 = s * s;
    dlog = ((6 * s2 - 6 * s) * ly_[i] + (3 * s2 - 4 * s + 1) * h * slope_[i] + (-6 * s2 + 6 * s) * ly_[i + 1] +
            (3 * s2 - 2 * s) * h * slope_[i + 1]) /
           h;
  }
  return (*this)(x) / x * dlog;
}

LazyLogTable::LazyLogTable(RealFunction f, double lo, double hi, int per_decade)
    : make_([f = std::move(f), lo, hi, per_decade] { return LogTable(f, lo, hi, per_decade); }) {}

const LogTable& LazyLogTable::get() const {
  std::call_once(flag_, [this] { table_ = make_(); });
  return table_;
}

}  // namespace rispace::numerics
