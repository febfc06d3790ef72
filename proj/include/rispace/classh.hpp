#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "rispace/operators.hpp"
#include "rispace/phi.hpp"
#include "rispace/step_function.hpp"

namespace rispace {

/// One violated inequality: lhs <= rhs + tolerance failed.
struct Witness {
  /// Position in the seeded corpus; -1 for inputs given directly.
  int corpus_index = -1;
  StepFunction input;
  /// Evaluation point (s, or the primitive abscissa for HLP).
  double at = 0.0;
  /// Second parameter where the check has one: t of chi_(0,t), or the
  /// previous grid point for monotonicity.
  double t = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double tolerance = 0.0;
  /// Set when evaluating T on the input threw.
  std::string error;

  double violation() const { return lhs - rhs; }
};

struct AxiomResult {
  std::string axiom;
  bool pass = true;
  std::size_t inputs = 0;
  std::size_t evaluations = 0;
  /// Largest lhs - rhs seen, failing or not.
  double worst = -std::numeric_limits<double>::infinity();
  /// First failure per input, at most `kMaxWitnesses`.
  std::vector<Witness> witnesses;
  std::size_t failures = 0;
  /// Tabulation mesh for HLP: [t_min, t_max, count].
  std::vector<double> mesh;

  static constexpr std::size_t kMaxWitnesses = 10;
};

struct ClassHReport {
  std::string op;
  std::uint64_t seed = 0;
  int corpus_size = 0;
  std::vector<AxiomResult> sections;

  bool pass() const;
};

/// The seeded corpus: random_decreasing_step (or random_step) draws from one
/// mt19937_64 stream, so item i is reproducible from (seed, i).
std::vector<StepFunction> classh_corpus(int size, std::uint64_t seed, bool decreasing);

/// (i) T f >= 0 and nonincreasing on the grid for decreasing corpus steps;
/// adjacent differences may rise by 1e-10 max(1, |T f|).
AxiomResult verify_decreasing(const OperatorSpec& op, int corpus_size, std::uint64_t seed,
                              const EvaluationGrid& grid = {});
AxiomResult verify_decreasing(const OperatorSpec& op, const std::vector<StepFunction>& inputs,
                              const EvaluationGrid& grid = {});

/// (ii) T f < T f*, sampled: both closures are averaged over the cells of a
/// `mesh_points` log mesh on [1e-6, 1e6] (plus (0, 1e-6]), the cell steps are
/// rearranged, and the primitives compared at the mesh points with relative
/// tolerance 1e-8.
AxiomResult verify_hlp(const OperatorSpec& op, int corpus_size, std::uint64_t seed, int mesh_points = 2000);
AxiomResult verify_hlp(const OperatorSpec& op, const std::vector<StepFunction>& inputs, int mesh_points = 2000);

/// T f <= T f* pointwise on the grid for one input. Not an axiom; S' fails it
/// at chi_(1,2) while satisfying HLP.
AxiomResult pointwise_domination(const OperatorSpec& op, const StepFunction& f, const EvaluationGrid& grid = {});

/// (iii) S chi_(0,t)(s) <= S T chi_(0,t)(s) + 1e-10 for t in `t_grid`, s in `grid`.
AxiomResult verify_rle(const OperatorSpec& op, const EvaluationGrid& t_grid = {1e-3, 1e3, 31},
                       const EvaluationGrid& grid = {});

/// All three axioms on one corpus.
ClassHReport verify_class_h(const OperatorSpec& op, int corpus_size, std::uint64_t seed);
/// verify_class_h on alpha T + beta U.
ClassHReport verify_combo_closure(const OperatorSpec& t, const OperatorSpec& u, double alpha, double beta,
                                  int corpus_size, std::uint64_t seed);

void to_json(nlohmann::json& j, const Witness& w);
void to_json(nlohmann::json& j, const AxiomResult& a);
void to_json(nlohmann::json& j, const ClassHReport& r);

}  // namespace rispace
