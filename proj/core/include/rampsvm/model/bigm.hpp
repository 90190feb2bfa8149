#pragma once

#include <functional>
#include <string>

#include "rampsvm/lp/simplex.hpp"
#include "rampsvm/model/formulations.hpp"

namespace rampsvm::bigm {

struct TraceEntry {
  std::string stage;
  std::string field;
  double old_value = 0.0;
  double new_value = 0.0;
};
using TraceSink = std::function<void(const TraceEntry&)>;

struct Algorithm1Options {
  // 0 picks variant 1 for n <= 500 and variant 2 above that.
  int variant = 0;
  int max_iters = 5;
  double min_rel_improvement = 1e-3;
  int threads = 1;  // per-individual big-M LPs can run concurrently
  lp::SimplexOptions lp_options;
};

struct Algorithm1Result {
  model::BigMBounds bounds;
  model::ClassifierSolution incumbent;
  double upper_bound = 0.0;
  int iterations = 0;
  bool incumbent_feasible = true;
  int variant_used = 1;
};

/// Maps a solved classic-model LP onto the shared decision vector: w split by
/// sign, slack above the ramp cap turns into z = 1 with xi cleared, v marks
/// the support.
model::ClassifierSolution classic_to_solution(const model::SvmInstance& inst,
                                              const lp::LpSolution& svm,
                                              const model::VarMap& map);

/// Initial feasible solution from the classic l1 model: map its optimum onto
/// the decision vector, repair the budget by dropping the smallest |w|
/// features and re-solving, then refit on the kept features/individuals.
std::pair<model::ClassifierSolution, double> initial_solution(const model::SvmInstance& inst,
                                                              const model::HyperParams& hp,
                                                              lp::SimplexSolver& solver);

/// M_i from the max same-class l-inf distance times the upper bound;
/// u = l = UB. Intercept bounds stay unset until tighten_b.
model::BigMBounds init_bounds(const model::SvmInstance& inst, double upper_bound);

/// The optional `keep_feasible` solution floors every min-update so the
/// incumbent stays inside the rebuilt model; updates are still never
/// increasing because the previous values already covered it.
void tighten_w(const model::SvmInstance& inst, const model::HyperParams& hp,
               model::BigMBounds& bounds, lp::SimplexSolver& solver, const TraceSink& trace = {},
               const model::ClassifierSolution* keep_feasible = nullptr);

void tighten_b(const model::SvmInstance& inst, const model::HyperParams& hp,
               model::BigMBounds& bounds, lp::SimplexSolver& solver,
               const TraceSink& trace = {});

void tighten_M(const model::SvmInstance& inst, const model::HyperParams& hp,
               model::BigMBounds& bounds, int variant, const lp::SimplexOptions& lp_options,
               int threads = 1, const TraceSink& trace = {},
               const model::ClassifierSolution* keep_feasible = nullptr);

Algorithm1Result run_algorithm1(const model::SvmInstance& inst, const model::HyperParams& hp,
                                const Algorithm1Options& options = {},
                                const TraceSink& trace = {}, util::Stopwatch* stopwatch = nullptr);

int pick_variant(const Algorithm1Options& options, int n);

}  // namespace rampsvm::bigm
