#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rispace/phi.hpp"
#include "rispace/spaces.hpp"
#include "rispace/step_function.hpp"

namespace rispace {

struct ExistenceResult {
  bool exists = false;
  std::string diagnostic;
  /// The norm whose finiteness decides existence (+inf when it diverges).
  double norm = 0.0;
};

/// Optimal range of S on X exists iff log+(1/t) lies in X'. For
/// Marcinkiewicz X this is local integrability of 1/phi at 0.
ExistenceResult existence_range(const SpaceSpec& x);
/// Optimal domain of S into X exists iff min(1, 1/s) = S chi_(0,1) lies in X.
ExistenceResult existence_domain(const SpaceSpec& x);

/// inf_{r <= t} t phi(r) / (r (1 + log(t/r))) = t / ||S' chi_(0,t)||_{M_{t/phi}}.
/// Throws Error(DegenerateInfimum) when the objective vanishes as r -> 0.
TildeResult psi_lorentz(const PhiExpr& phi, double t);
/// psi_lorentz as an expression, tabulated on [1e-290, 1e290].
PhiExpr psi_lorentz_function(const PhiExpr& phi, int per_decade = 8);

/// Bracket [lower, upper] for a fundamental function, tabulated on a grid.
/// `lower_fn` and `upper_fn` evaluate anywhere on (0, inf).
struct FundamentalBracket {
  EvaluationGrid grid;
  std::vector<double> t;
  std::vector<double> lower;
  std::vector<double> upper;
  PhiExpr lower_fn;
  PhiExpr upper_fn;

  /// upper / lower - 1 at its largest.
  double width() const;
};

struct RangeResult {
  /// Set when the range is identified with a named space.
  std::optional<SpaceSpec> closed_form;
  FundamentalBracket fundamental;
  std::vector<std::string> notes;
};

struct DomainResult {
  /// X for a domain of S into X; absent when only brackets are known.
  std::optional<SpaceSpec> target;
  FundamentalBracket fundamental;
  std::vector<std::string> notes;

  /// ||S f*||_X; throws Error(Unsupported) without a target.
  double norm(const StepFunction& f) const;
};

/// Throws Error(NotLocallyIntegrable) when 1/phi is not integrable at 0.
RangeResult range_of_marcinkiewicz(const PhiExpr& phi, const EvaluationGrid& grid = {});
/// Bracket [Psi, tilde phi]; Lorentz(tilde phi) as closed form when
/// lorentz_range_is_lorentz passes. Throws Error(Existence) when
/// phi(t) >= c t log(1 + 1/t) fails on the grid.
RangeResult range_of_lorentz(const PhiExpr& phi, const EvaluationGrid& grid = {});
/// Dispatches on the kind of X (L1 cap Linf is M_{max(1,t)}, L1+Linf is
/// Lambda_{min(1,t)}). Throws Error(Existence) or Error(Unsupported).
RangeResult optimal_range(const SpaceSpec& x, const EvaluationGrid& grid = {});

/// sup / inf over the grid of t int_t^inf tilde phi(s)/s^2 ds / phi(t). The
/// integral runs backwards from the grid end, whose tail is a geometric
/// series with the decay-exponent divergence rule; a divergent tail gives
/// ratio_max = inf. Pass iff ratio_max is finite.
EquivalenceReport lorentz_range_is_lorentz(const PhiExpr& phi, const EvaluationGrid& grid = {});
/// As above; pass iff the ratio is bounded above and away from 0.
EquivalenceReport lorentz_lorentz_two_sided(const PhiExpr& phi, const EvaluationGrid& grid = {});

/// W_X(t) = ||S chi_(0,t)||_X as an expression, tabulated on [1e-280, 1e280].
/// Non-finite values at the table ends are extended from the last finite
/// segment.
PhiExpr domain_fundamental_function(const SpaceSpec& x, int per_decade = 4);
/// Throws Error(Existence) when existence_domain fails.
DomainResult domain(const SpaceSpec& x, const EvaluationGrid& grid = {});
/// ||S^2 chi_(0,t)||_X from the closed form of S^2 chi_(0,t) against the
/// nested evaluation ||S (S chi_(0,t))||_X with one quadrature stage.
EquivalenceReport domain_iterate_check(const SpaceSpec& x, const EvaluationGrid& grid = {});

/// Domain of S into the optimal range of S on X.
DomainResult functor_DX(const SpaceSpec& x, const EvaluationGrid& grid = {});
/// Optimal range of S on the domain of S into X.
RangeResult functor_RX(const SpaceSpec& x, const EvaluationGrid& grid = {});

struct RestrictedType {
  EvaluationGrid grid;
  std::vector<double> t;
  /// Lorentz parameter of R(X).
  std::vector<double> W;
  PhiExpr W_fn;
  /// ||min(1, t/s)||_X against ||1/(1 + s/t)||_X; within [1, 2].
  EquivalenceReport comparison;
};
RestrictedType restricted_type_space(const SpaceSpec& x, const EvaluationGrid& grid = {});

struct CriterionReport {
  bool pass = false;
  double K = 0.0;
  /// Smallest K for which every condition holds (+inf if none does).
  double smallest_K = 0.0;
  std::vector<double> t;
  /// Smallest K per grid point.
  std::vector<double> K_needed;
  double t_first_failure = 0.0;
  std::string reason;
};

using TestFamily = std::function<DecreasingStep(double t)>;

/// For each grid t: (a) S S' g_t(s) <= K phi(s)/s at every grid s and
/// (b) S S' g_t(t) >= phi(t)/(K t).
CriterionReport caracRX_check(const PhiExpr& phi, const TestFamily& g, double K = 16.0,
                              const EvaluationGrid& grid = {});
/// phi(t)/(K t) <= S S' g(t) <= K phi(t)/t at every grid t.
CriterionReport criterioDLambda_check(const PhiExpr& phi, const DecreasingStep& g, double K = 16.0,
                                      const EvaluationGrid& grid = {});

/// phi(s)/s on a geometric grid of `per_decade` steps over [lo, hi], constant
/// below lo; right-endpoint values, so the step stays below phi(s)/s there.
DecreasingStep density_step(const PhiExpr& phi, double lo = 1e-12, double hi = 1e12, int per_decade = 40);

void to_json(nlohmann::json& j, const FundamentalBracket& b);
void to_json(nlohmann::json& j, const RangeResult& r);
void to_json(nlohmann::json& j, const DomainResult& d);
void to_json(nlohmann::json& j, const CriterionReport& r);
void to_json(nlohmann::json& j, const ExistenceResult& e);

}  // namespace rispace
