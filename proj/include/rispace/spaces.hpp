#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rispace/operators.hpp"
#include "rispace/phi.hpp"
#include "rispace/step_function.hpp"

namespace rispace {

struct Lorentz {
  PhiExpr phi;
};
struct Marcinkiewicz {
  PhiExpr phi;
};
struct WeakLorentz {
  PhiExpr phi;
};
struct L1plusLinf {};
struct L1capLinf {};

/// A rearrangement-invariant space on (0, inf).
struct SpaceSpec {
  std::variant<Lorentz, Marcinkiewicz, WeakLorentz, L1plusLinf, L1capLinf> kind;

  static SpaceSpec lorentz(PhiExpr phi) { return {Lorentz{std::move(phi)}}; }
  static SpaceSpec marcinkiewicz(PhiExpr phi) { return {Marcinkiewicz{std::move(phi)}}; }
  static SpaceSpec weak_lorentz(PhiExpr phi) { return {WeakLorentz{std::move(phi)}}; }
  static SpaceSpec l1_plus_linf() { return {L1plusLinf{}}; }
  static SpaceSpec l1_cap_linf() { return {L1capLinf{}}; }

  std::string to_string() const;
  /// ||chi_(0,t)||: phi, min(1, t) or max(1, t).
  PhiExpr fundamental() const;
};

/// The parameter must be quasiconcave on the grid; throws Error(InvalidInput).
void validate(const SpaceSpec& x, const EvaluationGrid& grid = {});

/// Exact for Lorentz, weak Lorentz and the endpoint spaces; for
/// Marcinkiewicz the sup of f** phi is maximized segment by segment.
double norm(const SpaceSpec& x, const StepFunction& f);
/// Norm of a nonincreasing closure; +inf when it diverges.
double norm(const SpaceSpec& x, const Evaluable& h);

/// Lorentz(phi) <-> Marcinkiewicz(t/phi), L1+Linf <-> L1 cap Linf.
/// Throws Error(Unsupported) for weak Lorentz spaces.
SpaceSpec associate(const SpaceSpec& x);

/// Finite stand-in for "all nonincreasing g".
struct DecreasingFamily {
  std::vector<DecreasingStep> members;
  std::vector<std::string> labels;

  void add(DecreasingStep g, std::string label);
  void append(const DecreasingFamily& other);
  std::size_t size() const { return members.size(); }

  /// chi_(0,u) for each u.
  static DecreasingFamily characteristic(const std::vector<double>& u);
  /// c chi_(0,u) for every u and every c.
  static DecreasingFamily scaled_characteristic(const std::vector<double>& u, const std::vector<double>& c);
  /// `count` random nonincreasing steps from `seed`.
  static DecreasingFamily random(int count, std::uint64_t seed);
  /// Characteristic functions on the grid plus 64 random members.
  static DecreasingFamily standard(const EvaluationGrid& grid, std::uint64_t seed);
};

struct RangeBound {
  double value = 0.0;
  /// Family member that attains the bound.
  std::size_t index = 0;
  std::string label;
  /// Members that took part (all for the lower bound, feasible ones for the upper).
  std::size_t counted = 0;
};

/// max over g of int f* g / ||T'g||_{X'}: a lower bound for the norm of f in
/// the optimal range of T on X. Throws Error(Existence) when ||T'g||_{X'}
/// is infinite for every member.
RangeBound range_norm_lower(const SpaceSpec& x, const StepFunction& f, const DecreasingFamily& family,
                            const OperatorSpec& op = OperatorSpec::S());

/// f** <= (S g*)** at the breakpoints of f* and g*, below them and at 50
/// log-spaced points past them.
bool range0_membership(const SpaceSpec& x, const StepFunction& f, const StepFunction& g);

/// min of ||g||_X over the candidates g that dominate f; an upper bound for
/// the norm of f in the restricted optimal range. Throws
/// Error(NoFeasibleCandidate) when none does.
RangeBound range0_upper(const SpaceSpec& x, const StepFunction& f, const DecreasingFamily& candidates);

void to_json(nlohmann::json& j, const SpaceSpec& x);
void from_json(const nlohmann::json& j, SpaceSpec& x);
SpaceSpec parse_space(const nlohmann::json& j);

}  // namespace rispace
