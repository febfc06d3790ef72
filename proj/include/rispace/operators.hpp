#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rispace/phi.hpp"
#include "rispace/step_function.hpp"

namespace rispace {

/// Nonnegative function on (0, inf) produced by an operator, together with
/// what the norm routines need: its primitive, the points where it is not
/// smooth, its limit at 0, its total mass and the end of its support.
class Evaluable {
 public:
  using Fn = std::function<double(double)>;

  struct Data {
    std::string name;
    Fn value;
    /// int_0^t of the function.
    Fn primitive;
    std::vector<double> kinks;
    double at_zero = 0.0;
    double total = std::numeric_limits<double>::infinity();
    double support_end = std::numeric_limits<double>::infinity();
  };

  Evaluable();
  explicit Evaluable(Data data);

  double operator()(double t) const { return data_->value(t); }
  double primitive(double t) const { return data_->primitive(t); }
  /// primitive(t) / t; the maximal function when the closure is decreasing.
  double mean(double t) const { return primitive(t) / t; }

  const std::string& name() const { return data_->name; }
  const std::vector<double>& kinks() const { return data_->kinks; }
  double at_zero() const { return data_->at_zero; }
  double total() const { return data_->total; }
  double support_end() const { return data_->support_end; }

 private:
  std::shared_ptr<const Data> data_;
};

Evaluable scaled(const Evaluable& h, double c);
/// a h + b k.
Evaluable combine(double a, const Evaluable& h, double b, const Evaluable& k);

/// The step function itself as a closure (exact primitive).
Evaluable as_evaluable(const StepFunction& f);
/// Positive weight w given analytically; primitive by quadrature.
Evaluable as_evaluable(const PhiExpr& w);

/// S f, exact: F(t)/t with the primitive of S f in closed form.
Evaluable hardy(const StepFunction& f);
/// S' f, exact: sum of v_i log(t_i / max(t, t_{i-1})).
Evaluable hardy_adjoint(const StepFunction& f);
/// S h for a closure, by one quadrature stage.
Evaluable hardy(const Evaluable& h);
/// S' h for a closure, by one quadrature stage.
Evaluable hardy_adjoint(const Evaluable& h);

/// S f(t); t > 0.
double apply_S(const StepFunction& f, double t);
/// S' f(t); t >= 0, +inf at t = 0 when f does not vanish near 0.
double apply_Sprime(const StepFunction& f, double t);

/// S S' chi_(0,t0)(r): 1 + log(t0/r) for r <= t0 and t0/r beyond.
double ssprime_char(double t0, double r);

enum class Factor { S, Sprime };

struct OperatorSpec;

struct HardyS {};
struct AdjointSprime {};
/// Factors applied right to left: {S, Sprime} is S S'.
struct Composition {
  std::vector<Factor> factors;
};
struct RankOne {
  PhiExpr weight;
  /// as_evaluable(weight), shared so its running integral is built once.
  std::shared_ptr<const Evaluable> closure;
};
struct LinearCombo {
  double alpha = 1.0;
  std::shared_ptr<const OperatorSpec> first;
  double beta = 1.0;
  std::shared_ptr<const OperatorSpec> second;
};

struct OperatorSpec {
  std::variant<HardyS, AdjointSprime, Composition, RankOne, LinearCombo> kind;

  static OperatorSpec S() { return {HardyS{}}; }
  static OperatorSpec Sprime() { return {AdjointSprime{}}; }
  static OperatorSpec compose(std::vector<Factor> factors);
  static OperatorSpec rank_one(PhiExpr weight);
  static OperatorSpec combo(double alpha, OperatorSpec first, double beta, OperatorSpec second);

  std::string to_string() const;
};

/// Structural checks; RankOne weights are tested on `grid`. Throws
/// Error(InvalidOperator).
void validate(const OperatorSpec& spec, const EvaluationGrid& grid = {});

/// w positive, nonincreasing and w(r) >= r^{-1/2}/2 on the grid.
struct WeightCheck {
  bool pass = true;
  double t_violation = 0.0;
  std::string reason;
  /// min over the grid of w(r) / (r^{-1/2}/2).
  double margin = std::numeric_limits<double>::infinity();
};
WeightCheck check_rank_one_weight(const PhiExpr& w, const EvaluationGrid& grid = {});

/// T f as a closure. The innermost factor is exact on the step input (an
/// innermost S S' or S' S pair too, as S f + S' f), later factors are
/// quadrature stages.
Evaluable apply(const OperatorSpec& spec, const StepFunction& f);
double apply(const OperatorSpec& spec, const StepFunction& f, double t);

/// int f w, piece by piece.
double rank_one_pairing(const PhiExpr& w, const StepFunction& f);

/// T' with int (T f) g = int f (T' g).
OperatorSpec adjoint(const OperatorSpec& spec);

void to_json(nlohmann::json& j, const OperatorSpec& spec);
void from_json(const nlohmann::json& j, OperatorSpec& spec);
OperatorSpec parse_operator(const nlohmann::json& j);

}  // namespace rispace
