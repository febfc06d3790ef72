#include "rispace/classh.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <optional>
#include <random>
#include <thread>

#include "rispace/error.hpp"
#include "rispace/format.hpp"
#include "rispace/numerics.hpp"

namespace rispace {
namespace {

/// Outcome of one input: number of inequalities, the largest lhs - rhs and
/// the first failure.
struct Item {
  std::size_t evaluations = 0;
  std::size_t failures = 0;
  double worst = -std::numeric_limits<double>::infinity();
  std::optional<Witness> first;

  void check(const Witness& w) {
    ++evaluations;
    worst = std::max(worst, w.violation());
    if (w.lhs > w.rhs + w.tolerance) {
      ++failures;
      if (!first) first = w;
    }
  }
};

template <class Fn>
std::vector<Item> run_all(std::size_t n, const Fn& fn) {
  std::vector<Item> out(n);
  const std::size_t workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 8);
  std::vector<std::future<void>> jobs;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < n; i += workers) out[i] = fn(i);
    }));
  }
  for (auto& j : jobs) j.get();
  return out;
}

Item failed_evaluation(int index, const StepFunction& f, const std::exception& e) {
  Item item;
  Witness w;
  w.corpus_index = index;
  w.input = f;
  w.lhs = std::numeric_limits<double>::infinity();
  w.error = e.what();
  item.evaluations = 1;
  item.failures = 1;
  item.worst = w.lhs;
  item.first = w;
  return item;
}

AxiomResult assemble(std::string axiom, const std::vector<Item>& items) {
  AxiomResult r;
  r.axiom = std::move(axiom);
  r.inputs = items.size();
  for (const Item& item : items) {
    r.evaluations += item.evaluations;
    r.failures += item.failures;
    r.worst = std::max(r.worst, item.worst);
    if (item.first && r.witnesses.size() < AxiomResult::kMaxWitnesses) r.witnesses.push_back(*item.first);
  }
  r.pass = r.failures == 0;
  return r;
}

// Cell averages of h over (0, u_0], (u_0, u_1], ...; exact where the
// primitive is.
StepFunction cell_step(const Evaluable& h, const std::vector<double>& u) {
  std::vector<double> values(u.size());
  double left = 0.0;
  double P = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double Pk = h.primitive(u[k]);
    if (!std::isfinite(Pk)) fail(ErrorKind::Evaluation, "hlp: primitive not finite at " + format_number(u[k]));
    values[k] = std::max(0.0, (Pk - P) / (u[k] - left));
    left = u[k];
    P = Pk;
  }
  return StepFunction(u, std::move(values));
}

}  // namespace

bool ClassHReport::pass() const {
  return std::all_of(sections.begin(), sections.end(), [](const AxiomResult& a) { return a.pass; });
}

std::vector<StepFunction> classh_corpus(int size, std::uint64_t seed, bool decreasing) {
  if (size < 0) fail(ErrorKind::InvalidInput, "corpus size must be >= 0");
  std::mt19937_64 rng(seed);
  std::vector<StepFunction> out;
  out.reserve(static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i) {
    out.push_back(decreasing ? random_decreasing_step(rng).function() : random_step(rng));
  }
  return out;
}

AxiomResult verify_decreasing(const OperatorSpec& op, int corpus_size, std::uint64_t seed,
                              const EvaluationGrid& grid) {
  return verify_decreasing(op, classh_corpus(corpus_size, seed, true), grid);
}

AxiomResult verify_decreasing(const OperatorSpec& op, const std::vector<StepFunction>& inputs,
                              const EvaluationGrid& grid) {
  validate(op, grid);
  grid.validate();
  const std::vector<double> t = grid.points();
  const auto items = run_all(inputs.size(), [&](std::size_t i) {
    const int index = static_cast<int>(i);
    try {
      const Evaluable h = apply(op, inputs[i]);
      Item item;
      double prev = 0.0;
      for (std::size_t k = 0; k < t.size(); ++k) {
        const double v = h(t[k]);
        Witness w{index, inputs[i], t[k], 0.0, -v, 0.0, 0.0, {}};
        item.check(w);
        if (k > 0) item.check(Witness{index, inputs[i], t[k], t[k - 1], v, prev, 1e-10 * std::max(1.0, std::abs(prev)), {}});
        prev = v;
      }
      return item;
    } catch (const std::exception& e) {
      return failed_evaluation(index, inputs[i], e);
    }
  });
  return assemble("decreasing", items);
}

AxiomResult verify_hlp(const OperatorSpec& op, int corpus_size, std::uint64_t seed, int mesh_points) {
  return verify_hlp(op, classh_corpus(corpus_size, seed, false), mesh_points);
}

AxiomResult verify_hlp(const OperatorSpec& op, const std::vector<StepFunction>& inputs, int mesh_points) {
  validate(op);
  if (mesh_points < 2) fail(ErrorKind::InvalidInput, "hlp: mesh needs at least 2 points");
  constexpr double lo = 1e-6;
  constexpr double hi = 1e6;
  const std::vector<double> u = numerics::log_space(lo, hi, mesh_points);
  const auto items = run_all(inputs.size(), [&](std::size_t i) {
    const int index = static_cast<int>(i);
    try {
      const PiecewiseLinear G = primitive(rearrange(cell_step(apply(op, inputs[i]), u)).function());
      const PiecewiseLinear H =
          primitive(rearrange(cell_step(apply(op, rearrange(inputs[i]).function()), u)).function());
      Item item;
      for (double x : u) {
        const double g = G(x);
        const double h = H(x);
        item.check(Witness{index, inputs[i], x, 0.0, g, h, 1e-8 * std::abs(h), {}});
      }
      return item;
    } catch (const std::exception& e) {
      return failed_evaluation(index, inputs[i], e);
    }
  });
  AxiomResult r = assemble("hlp", items);
  r.mesh = {lo, hi, static_cast<double>(mesh_points)};
  return r;
}

AxiomResult pointwise_domination(const OperatorSpec& op, const StepFunction& f, const EvaluationGrid& grid) {
  validate(op, grid);
  grid.validate();
  Item item;
  try {
    const Evaluable h = apply(op, f);
    const Evaluable hs = apply(op, rearrange(f).function());
    for (double t : grid.points()) {
      const double a = h(t);
      const double b = hs(t);
      item.check(Witness{-1, f, t, 0.0, a, b, 1e-10 * std::max(1.0, std::abs(b)), {}});
    }
  } catch (const std::exception& e) {
    item = failed_evaluation(-1, f, e);
  }
  return assemble("pointwise", {item});
}

AxiomResult verify_rle(const OperatorSpec& op, const EvaluationGrid& t_grid, const EvaluationGrid& grid) {
  validate(op, grid);
  t_grid.validate();
  grid.validate();
  const std::vector<double> ts = t_grid.points();
  const std::vector<double> s = grid.points();
  const auto items = run_all(ts.size(), [&](std::size_t i) {
    const double t = ts[i];
    const StepFunction chi = StepFunction::indicator(0.0, t);
    try {
      const Evaluable h = apply(op, chi);
      Item item;
      for (double x : s) item.check(Witness{static_cast<int>(i), chi, x, t, std::min(1.0, t / x), h.mean(x), 1e-10, {}});
      return item;
    } catch (const std::exception& e) {
      return failed_evaluation(static_cast<int>(i), chi, e);
    }
  });
  return assemble("rle", items);
}

ClassHReport verify_class_h(const OperatorSpec& op, int corpus_size, std::uint64_t seed) {
  ClassHReport r;
  r.op = op.to_string();
  r.seed = seed;
  r.corpus_size = corpus_size;
  r.sections.push_back(verify_decreasing(op, corpus_size, seed));
  r.sections.push_back(verify_hlp(op, corpus_size, seed));
  r.sections.push_back(verify_rle(op));
  return r;
}

ClassHReport verify_combo_closure(const OperatorSpec& t, const OperatorSpec& u, double alpha, double beta,
                                  int corpus_size, std::uint64_t seed) {
  return verify_class_h(OperatorSpec::combo(alpha, t, beta, u), corpus_size, seed);
}

void to_json(nlohmann::json& j, const Witness& w) {
  j = nlohmann::json{{"corpus_index", w.corpus_index},
                     {"input", w.input},
                     {"at", json_number(w.at)},
                     {"lhs", json_number(w.lhs)},
                     {"rhs", json_number(w.rhs)},
                     {"tolerance", json_number(w.tolerance)}};
  if (w.t != 0.0) j["t"] = json_number(w.t);
  if (!w.error.empty()) j["error"] = w.error;
}

void to_json(nlohmann::json& j, const AxiomResult& a) {
  j = nlohmann::json{{"axiom", a.axiom},
                     {"pass", a.pass},
                     {"inputs", a.inputs},
                     {"evaluations", a.evaluations},
                     {"failures", a.failures},
                     {"worst", json_number(a.worst)},
                     {"witnesses", a.witnesses}};
  if (!a.mesh.empty()) j["mesh"] = {{"t_min", a.mesh[0]}, {"t_max", a.mesh[1]}, {"count", a.mesh[2]}};
}

void to_json(nlohmann::json& j, const ClassHReport& r) {
  j = nlohmann::json{{"operator", r.op},
                     {"seed", r.seed},
                     {"corpus_size", r.corpus_size},
                     {"pass", r.pass()},
                     {"sections", r.sections}};
}

}  // namespace rispace
