#include <cmath>

#include <doctest.h>

#include "rispace/classh.hpp"

using namespace rispace;

namespace {

const PhiExpr t = PhiExpr::variable();
const OperatorSpec S = OperatorSpec::S();
const OperatorSpec Sp = OperatorSpec::Sprime();

}  // namespace

TEST_CASE("decreasing") {
  CHECK(verify_decreasing(Sp, std::vector<StepFunction>{StepFunction::indicator(0, 1)}).pass);
  CHECK(verify_decreasing(S, 40, 7).pass);
  CHECK(verify_decreasing(Sp, 40, 7).pass);
  CHECK(verify_decreasing(OperatorSpec::rank_one(pow(t, -0.5)), 40, 7).pass);
}

TEST_CASE("hlp") {
  CHECK(verify_hlp(Sp, std::vector<StepFunction>{StepFunction::indicator(1, 2)}).pass);
  CHECK(verify_hlp(S, 30, 7).pass);
  CHECK(verify_hlp(OperatorSpec::combo(1, S, 0, S), 30, 7).pass);
  const AxiomResult r = verify_hlp(S, 5, 7, 500);
  REQUIRE(r.mesh.size() == 3);
  CHECK(r.mesh[2] == 500);
  CHECK(r.evaluations == 5 * 500);
}

TEST_CASE("pointwise domination fails for S' at chi_(1,2)") {
  const AxiomResult r = pointwise_domination(Sp, StepFunction::indicator(1, 2));
  CHECK_FALSE(r.pass);
  REQUIRE_FALSE(r.witnesses.empty());
  const Witness& w = r.witnesses.front();
  // S' chi_(1,2) = log 2 below 1, S' chi_(0,1) = log(1/s) there.
  CHECK(w.lhs > w.rhs);
  CHECK(pointwise_domination(S, StepFunction::indicator(1, 2)).pass);
  CHECK(pointwise_domination(Sp, StepFunction::indicator(0, 2)).pass);
}

TEST_CASE("rle") {
  CHECK(verify_rle(OperatorSpec::compose({Factor::S, Factor::Sprime})).pass);
  CHECK(verify_rle(S).pass);
  const AxiomResult low = verify_rle(OperatorSpec::combo(0.25, S, 0.25, Sp));
  CHECK_FALSE(low.pass);
  CHECK(low.failures > 0);
}

TEST_CASE("combo closure") {
  CHECK(verify_combo_closure(S, Sp, 1, 1, 30, 7).pass());
  CHECK(verify_combo_closure(S, S, 0.5, 0.5, 30, 7).pass());
  const ClassHReport r = verify_combo_closure(S, Sp, 0.3, 0.3, 30, 7);
  CHECK_FALSE(r.pass());
  REQUIRE(r.sections.size() == 3);
  CHECK(r.sections[0].pass);
  CHECK(r.sections[1].pass);
  CHECK_FALSE(r.sections[2].pass);
}

TEST_CASE("reports are reproducible") {
  const OperatorSpec op = OperatorSpec::combo(0.3, S, 0.3, Sp);
  const std::string a = nlohmann::json(verify_class_h(op, 20, 11)).dump();
  const std::string b = nlohmann::json(verify_class_h(op, 20, 11)).dump();
  CHECK(a == b);
  CHECK(classh_corpus(15, 3, false) == classh_corpus(15, 3, false));
  CHECK_FALSE(classh_corpus(15, 3, false) == classh_corpus(15, 4, false));
  for (const StepFunction& f : classh_corpus(50, 3, true)) CHECK(f.is_nonincreasing());
}

TEST_CASE("witnesses re-verify") {
  const OperatorSpec op = OperatorSpec::combo(0.3, S, 0.3, Sp);
  const AxiomResult r = verify_rle(op);
  REQUIRE_FALSE(r.witnesses.empty());
  CHECK(r.witnesses.size() <= AxiomResult::kMaxWitnesses);
  for (const Witness& w : r.witnesses) {
    const double lhs = std::min(1.0, w.t / w.at);
    const double rhs = 0.3 * hardy(w.input).mean(w.at) + 0.3 * hardy_adjoint(w.input).mean(w.at);
    CHECK(lhs - rhs > w.tolerance / 2);
    CHECK(lhs == doctest::Approx(w.lhs).epsilon(1e-12));
  }

  const AxiomResult p = pointwise_domination(Sp, StepFunction::indicator(1, 2));
  for (const Witness& w : p.witnesses) {
    CHECK(apply_Sprime(w.input, w.at) - apply_Sprime(rearrange(w.input).function(), w.at) > w.tolerance / 2);
  }
}

TEST_CASE("g is majorized by S'g on decreasing inputs") {
  const std::vector<double> grid = EvaluationGrid{1e-4, 1e4, 81}.points();
  for (const StepFunction& g : classh_corpus(40, 5, true)) {
    const PiecewiseLinear G = primitive(g);
    const Evaluable h = hardy_adjoint(g);
    for (double x : grid) CHECK(G(x) <= h.primitive(x) * (1 + 1e-12));
  }
}

TEST_CASE("json") {
  const ClassHReport r = verify_class_h(S, 5, 7);
  const nlohmann::json j = r;
  CHECK(j["pass"] == true);
  CHECK(j["seed"] == 7);
  CHECK(j["sections"].size() == 3);
  CHECK(j["sections"][1]["mesh"]["count"] == 2000);
}
