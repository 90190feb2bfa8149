#pragma once

#include <functional>
#include <optional>
#include <string>

#include "rampsvm/milp/solver.hpp"
#include "rampsvm/model/bigm.hpp"
#include "rampsvm/model/formulations.hpp"

namespace rampsvm::daks {

struct DaksParams {
  double delta = 0.35;  // bucket growth factor
  int p = 2;            // kernel-removal patience (feasible iterations)
  int q = 2;            // consecutive identical z values before fixing
  double t_easy = 10.0;
  double t_fea = 120.0;
  double t_inc = 160.0;
  double t_limit = 400.0;
  double possible_outlier_threshold = 1.0;
  int phase2_rounds = 3;
  // 0 = one full pass of the ordering per round; otherwise a hard cap on
  // phase-3 iterations per round.
  long phase3_iteration_cap = 0;
  util::Stopwatch::Mode clock_mode = util::Stopwatch::Mode::Deterministic;
  bigm::Algorithm1Options algo1;
};

struct TraceEntry {
  int round = 0;
  long iteration = 0;  // -1 for the kernel-seed solve of a round
  std::string stage;
  int kernel_size = 0;
  int bucket_size = 0;
  std::string status;
  double upper_bound = 0.0;
  double lb_zhat = 0.0;
  int zhat0 = 0, zhat1 = 0, zhat2 = 0;
};
using TraceSink = std::function<void(const TraceEntry&)>;

/// Outlier status codes from the initial solution: fixed outliers keep z = 1,
/// well-classified points keep z = 0, and wrong-classified points with slack
/// above the threshold stay binary ("possible outliers").
model::ZHat init_zhat(const model::ClassifierSolution& initial, double threshold = 1.0);

struct FeatureOrdering {
  std::vector<double> r;
  std::vector<int> order;    // features sorted by non-decreasing r, ties by id
  std::vector<int> kernel0;  // initial kernel
  double lb_zhat = -lp::kInf;
  model::ZHat zhat_used;
};

/// Phase 2: solve the selection-relaxed model under the current codes, pull
/// reduced costs from the fixed-z re-solve, and build the ranking vector and
/// initial kernel. `first_support` widens the kernel with the features that
/// carried the very first feasible solution. When the relaxation solve stops
/// at its limit without an incumbent, the binary z are fixed at the values of
/// `fallback` (a known-feasible assignment) and the interrupted bound stands
/// in for the relaxation value.
FeatureOrdering order_features(const model::SvmInstance& inst, const model::HyperParams& hp,
                               const model::BigMBounds& bounds, const model::ZHat& zhat,
                               const DaksParams& params,
                               const model::ClassifierSolution* first_support,
                               util::Stopwatch* clock = nullptr,
                               const model::ClassifierSolution* fallback = nullptr);

struct StreakState {
  std::vector<int> z_one;   // consecutive feasible solutions with z_i = 1
  std::vector<int> z_zero;  // consecutive feasible solutions with z_i = 0
};

/// One application of the code-update table against a feasible solution.
/// Streaks advance only here, i.e. only on feasible iterations.
model::ZHat update_zhat(const model::ZHat& zhat, const model::SvmInstance& inst,
                        const model::ClassifierSolution& current, double threshold, int q,
                        StreakState& streaks);

struct KernelState {
  std::vector<int> kernel;
  std::vector<double> r;
  std::vector<int> order;
  std::size_t cursor = 0;
  std::vector<std::uint8_t> used;  // feature consumed by the kernel or a bucket
  std::vector<int> not_selected_streak;
  int bucket_size = 0;
  double lb_zhat = -lp::kInf;
  model::ZHat lb_zhat_codes;
};

enum class IterationOutcome { Improved, NoImprovement, PassComplete };

struct Phase3Context {
  const model::SvmInstance* inst = nullptr;
  const model::HyperParams* hp = nullptr;
  model::BigMBounds* bounds = nullptr;
  const DaksParams* params = nullptr;
  util::Stopwatch* clock = nullptr;
  TraceSink trace;
  int round = 0;
  long iteration = 0;
};

/// One body of the phase-3 loop: draw the next bucket, solve the restricted
/// model with the improving-bound row, and fold the result into the kernel,
/// codes and incumbent. On Infeasible/NoIncumbent the state is untouched
/// apart from the consumed bucket.
IterationOutcome phase3_iterate(const Phase3Context& ctx, KernelState& state, model::ZHat& zhat,
                                StreakState& streaks, model::ClassifierSolution& incumbent,
                                double& upper_bound,
                                std::optional<milp::MilpStatus>& prev_status);

struct DaksResult {
  model::ClassifierSolution best;
  model::BigMBounds bounds;
  model::ZHat zhat;
  double lb_zhat = -lp::kInf;
  int rounds = 0;
  long iterations = 0;
  double elapsed_seconds = 0.0;
  bool feasible = false;
  std::string stop_reason;
};

DaksResult run_daks(const model::SvmInstance& inst, const model::HyperParams& hp,
                    const DaksParams& params = {}, const TraceSink& trace = {});

}  // namespace rampsvm::daks
