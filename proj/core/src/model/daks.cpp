#include "rampsvm/model/daks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rampsvm::daks {

using model::BigMBounds;
using model::ClassifierSolution;
using model::HyperParams;
using model::SvmInstance;
using model::ZHat;

namespace {

constexpr double kSupportTol = 1e-6;

double margin_of(const SvmInstance& inst, const ClassifierSolution& sol, int i) {
  double dot = sol.b;
  for (int k = 0; k < inst.d; ++k) dot += sol.weight(k) * inst.at(i, k);
  return inst.y[i] * dot;
}

const char* status_name(milp::MilpStatus s) {
  switch (s) {
    case milp::MilpStatus::Optimal:
      return "optimal";
    case milp::MilpStatus::FeasibleLimitHit:
      return "feasible_limit";
    case milp::MilpStatus::Infeasible:
      return "infeasible";
    default:
      return "no_incumbent";
  }
}

void emit(const TraceSink& trace, int round, long it, const std::string& stage,
          const KernelState& state, const std::string& status, double ub, const ZHat& zhat) {
  if (!trace) return;
  TraceEntry e;
  e.round = round;
  e.iteration = it;
  e.stage = stage;
  e.kernel_size = static_cast<int>(state.kernel.size());
  e.bucket_size = state.bucket_size;
  e.status = status;
  e.upper_bound = ub;
  e.lb_zhat = state.lb_zhat;
  e.zhat0 = zhat.count(0);
  e.zhat1 = zhat.count(1);
  e.zhat2 = zhat.count(2);
  trace(e);
}

// Accepted incumbents must stay inside the big-M model that later
// sub-problems are built from; rows dropped for fixed outliers do not carry
// the margin requirement, so the M value backing them is floored here.
void cover_incumbent(const SvmInstance& inst, const ClassifierSolution& sol, BigMBounds& bounds) {
  for (int i = 0; i < inst.n; ++i) {
    if (sol.z[i] != 1) continue;
    const double need = 1.0 - sol.xi[i] - margin_of(inst, sol, i);
    if (need > bounds.M[i]) bounds.M[i] = need;
  }
}

milp::SolveLimits sub_limits(const DaksParams& params) {
  milp::SolveLimits limits;
  limits.time_limit = params.t_limit;
  limits.feasibility_timeout = params.t_fea;
  limits.incumbent_stall = params.t_inc;
  return limits;
}

}  // namespace

ZHat init_zhat(const ClassifierSolution& initial, double threshold) {
  ZHat zhat;
  zhat.codes.assign(initial.z.size(), 0);
  for (std::size_t i = 0; i < initial.z.size(); ++i) {
    if (initial.z[i] == 1) {
      zhat.codes[i] = 1;
    } else if (initial.xi[i] > threshold) {
      zhat.codes[i] = 2;
    } else {
      zhat.codes[i] = 0;
    }
  }
  return zhat;
}

FeatureOrdering order_features(const SvmInstance& inst, const HyperParams& hp,
                               const BigMBounds& bounds, const ZHat& zhat,
                               const DaksParams& params,
                               const ClassifierSolution* first_support, util::Stopwatch* clock,
                               const ClassifierSolution* fallback) {
  auto relaxed = model::build_relaxed_v(inst, hp, bounds, zhat);

  milp::MilpSolver milp_solver(params.algo1.lp_options, params.clock_mode);
  milp::SolveLimits limits;
  limits.time_limit = params.t_limit;
  auto rel = milp_solver.solve(relaxed.milp, limits);
  if (clock != nullptr) clock->add_work(rel.elapsed_seconds * util::Stopwatch::kUnitsPerSecond);
  double lb_zhat;
  std::vector<std::pair<int, double>> fixes;
  if (rel.has_incumbent()) {
    lb_zhat = rel.objective + relaxed.objective_constant;
    for (int i = 0; i < inst.n; ++i) {
      const int col = relaxed.map.z[i];
      if (col >= 0) fixes.emplace_back(col, std::round((*rel.incumbent)[col]));
    }
  } else if (fallback != nullptr) {
    // Interrupted without an incumbent: the fallback assignment is feasible
    // for the sub-problem, and the proven bound stays a valid relaxation
    // value for the stop tests.
    lb_zhat = std::isfinite(rel.best_bound) ? rel.best_bound + relaxed.objective_constant
                                            : -lp::kInf;
    for (int i = 0; i < inst.n; ++i) {
      const int col = relaxed.map.z[i];
      if (col >= 0) fixes.emplace_back(col, static_cast<double>(fallback->z[i]));
    }
  } else {
    throw std::runtime_error("selection relaxation has no solution under the current codes");
  }

  // Reduced costs come from the relaxation with the binary z frozen.
  lp::SimplexSolver lp_solver(params.algo1.lp_options);
  if (clock != nullptr) lp_solver.attach_stopwatch(clock);
  lp::LpSolution fixed = lp_solver.solve_with_fixed(relaxed.milp.base, fixes);
  if (!fixed.optimal()) {
    throw std::runtime_error("fixed-z relaxation did not solve");
  }

  FeatureOrdering out;
  out.lb_zhat = lb_zhat;
  out.zhat_used = zhat;
  out.r.assign(inst.d, 0.0);
  for (int k = 0; k < inst.d; ++k) {
    const int cp = relaxed.map.w_plus[k];
    const int cm = relaxed.map.w_minus[k];
    const double wsum = fixed.primal[cp] + fixed.primal[cm];
    if (wsum > kSupportTol) {
      out.r[k] = -wsum;
      out.kernel0.push_back(k);
    } else {
      out.r[k] = std::min(fixed.reduced_cost[cp], fixed.reduced_cost[cm]);
    }
  }
  if (first_support != nullptr) {
    for (int k = 0; k < inst.d; ++k) {
      if (first_support->w_plus[k] + first_support->w_minus[k] > kSupportTol) {
        out.kernel0.push_back(k);
      }
    }
    std::sort(out.kernel0.begin(), out.kernel0.end());
    out.kernel0.erase(std::unique(out.kernel0.begin(), out.kernel0.end()), out.kernel0.end());
  }
  out.order.assign(inst.d, 0);
  std::iota(out.order.begin(), out.order.end(), 0);
  std::stable_sort(out.order.begin(), out.order.end(),
                   [&](int a, int b) { return out.r[a] < out.r[b]; });
  if (out.kernel0.empty()) out.kernel0.push_back(out.order.front());
  return out;
}

ZHat update_zhat(const ZHat& zhat, const SvmInstance& inst, const ClassifierSolution& current,
                 double threshold, int q, StreakState& streaks) {
  ZHat next = zhat;
  if (streaks.z_one.empty()) streaks.z_one.assign(inst.n, 0);
  if (streaks.z_zero.empty()) streaks.z_zero.assign(inst.n, 0);
  for (int i = 0; i < inst.n; ++i) {
    switch (zhat.codes[i]) {
      case 0:
        if (current.xi[i] >= threshold) {
          next.codes[i] = 2;
          streaks.z_one[i] = streaks.z_zero[i] = 0;
        }
        break;
      case 1:
        if (margin_of(inst, current, i) >= 0.0) {
          next.codes[i] = 2;
          streaks.z_one[i] = streaks.z_zero[i] = 0;
        }
        break;
      default:
        if (current.z[i] == 1) {
          ++streaks.z_one[i];
          streaks.z_zero[i] = 0;
        } else {
          ++streaks.z_zero[i];
          streaks.z_one[i] = 0;
        }
        if (streaks.z_one[i] >= q) {
          next.codes[i] = 1;
          streaks.z_one[i] = streaks.z_zero[i] = 0;
        } else if (streaks.z_zero[i] >= q) {
          next.codes[i] = 0;
          streaks.z_one[i] = streaks.z_zero[i] = 0;
        }
        break;
    }
  }
  return next;
}

IterationOutcome phase3_iterate(const Phase3Context& ctx, KernelState& state, ZHat& zhat,
                                StreakState& streaks, ClassifierSolution& incumbent,
                                double& upper_bound,
                                std::optional<milp::MilpStatus>& prev_status) {
  const auto& inst = *ctx.inst;
  const auto& hp = *ctx.hp;
  const auto& params = *ctx.params;

  // Draw the next bucket in ranking order, each feature at most once.
  std::vector<int> bucket;
  while (state.cursor < state.order.size() &&
         static_cast<int>(bucket.size()) < state.bucket_size) {
    const int k = state.order[state.cursor++];
    if (state.used[k]) continue;
    state.used[k] = 1;
    bucket.push_back(k);
  }
  if (bucket.empty()) return IterationOutcome::PassComplete;

  model::RestrictedOptions options;
  options.ub_row = upper_bound;
  if (prev_status.has_value() && *prev_status == milp::MilpStatus::FeasibleLimitHit) {
    options.force_row = bucket;
    for (int k : state.kernel) {
      if (incumbent.v[k] == 0) options.force_row.push_back(k);
    }
  } else {
    options.force_row = bucket;
  }

  std::vector<int> working = state.kernel;
  working.insert(working.end(), bucket.begin(), bucket.end());
  auto built = model::build_restricted(inst, hp, *ctx.bounds, working, zhat, options);

  milp::MilpSolver solver(params.algo1.lp_options, params.clock_mode);
  auto sub = solver.solve(built.milp, sub_limits(params));
  if (ctx.clock != nullptr) {
    ctx.clock->add_work(sub.elapsed_seconds * util::Stopwatch::kUnitsPerSecond);
  }
  prev_status = sub.status;

  if (sub.elapsed_seconds <= params.t_easy) {
    state.bucket_size = static_cast<int>(std::ceil((1.0 + params.delta) * state.bucket_size));
  }

  if (!sub.has_incumbent()) {
    emit(ctx.trace, ctx.round, ctx.iteration, "phase3", state, status_name(sub.status),
         upper_bound, zhat);
    return IterationOutcome::NoImprovement;
  }

  ClassifierSolution candidate =
      model::solution_from_vector(inst, hp.C, built.map, *sub.incumbent, &zhat);
  const bool improved = candidate.objective < upper_bound - 1e-12;
  if (improved) {
    incumbent = candidate;
    upper_bound = candidate.objective;
    cover_incumbent(inst, incumbent, *ctx.bounds);
  }

  // Kernel bookkeeping over feasible iterations only.
  for (int k : state.kernel) {
    if (candidate.v[k] == 1) {
      state.not_selected_streak[k] = 0;
    } else {
      ++state.not_selected_streak[k];
    }
  }
  std::vector<int> next_kernel;
  for (int k : state.kernel) {
    if (state.not_selected_streak[k] < params.p) next_kernel.push_back(k);
  }
  for (int k : bucket) {
    if (candidate.v[k] == 1) {
      next_kernel.push_back(k);
      state.not_selected_streak[k] = 0;
    }
  }
  std::sort(next_kernel.begin(), next_kernel.end());
  next_kernel.erase(std::unique(next_kernel.begin(), next_kernel.end()), next_kernel.end());
  state.kernel = std::move(next_kernel);

  zhat = update_zhat(zhat, inst, candidate, params.possible_outlier_threshold, params.q, streaks);
  emit(ctx.trace, ctx.round, ctx.iteration, "phase3", state, status_name(sub.status), upper_bound,
       zhat);
  return improved ? IterationOutcome::Improved : IterationOutcome::NoImprovement;
}

DaksResult run_daks(const SvmInstance& inst, const HyperParams& hp, const DaksParams& params,
                    const TraceSink& trace) {
  util::Stopwatch clock(params.clock_mode);

  bigm::Algorithm1Options a1opts = params.algo1;
  auto a1 = bigm::run_algorithm1(inst, hp, a1opts, {}, &clock);

  DaksResult result;
  result.bounds = std::move(a1.bounds);
  result.best = std::move(a1.incumbent);
  double upper_bound = a1.upper_bound;
  cover_incumbent(inst, result.best, result.bounds);

  ZHat zhat = init_zhat(result.best, params.possible_outlier_threshold);
  StreakState streaks;
  streaks.z_one.assign(inst.n, 0);
  streaks.z_zero.assign(inst.n, 0);

  const auto ub_tol = [](double ub) { return 1e-6 * std::max(1.0, std::abs(ub)); };
  bool first_round = true;
  bool finished = false;

  for (int round = 0; round < params.phase2_rounds && !finished; ++round) {
    result.rounds = round + 1;
    FeatureOrdering ordering;
    try {
      ordering = order_features(inst, hp, result.bounds, zhat, params,
                                first_round ? &result.best : nullptr, &clock, &result.best);
    } catch (const std::exception&) {
      // The evolved codes can in rare cases make the relaxation intractable
      // within the budget; the incumbent is still valid, so stop here.
      result.stop_reason = "phase-2 relaxation unavailable";
      break;
    }
    first_round = false;

    KernelState state;
    state.kernel = ordering.kernel0;
    state.r = ordering.r;
    state.order = ordering.order;
    state.used.assign(inst.d, 0);
    for (int k : state.kernel) state.used[k] = 1;
    state.not_selected_streak.assign(inst.d, 0);
    state.bucket_size = static_cast<int>(state.kernel.size());
    state.lb_zhat = ordering.lb_zhat;
    state.lb_zhat_codes = ordering.zhat_used;
    result.lb_zhat = ordering.lb_zhat;

    // Kernel-seed solve: restricted model over K0, no improving-bound row.
    {
      auto built = model::build_restricted(inst, hp, result.bounds, state.kernel, zhat, {});
      milp::MilpSolver solver(params.algo1.lp_options, params.clock_mode);
      const auto warm = model::solution_to_vector(result.best, built.map,
                                                  built.milp.base.num_vars());
      auto seed = solver.solve(built.milp, sub_limits(params), warm);
      clock.add_work(seed.elapsed_seconds * util::Stopwatch::kUnitsPerSecond);
      const ClassifierSolution* reference = &result.best;
      ClassifierSolution seed_sol;
      if (seed.has_incumbent()) {
        seed_sol = model::solution_from_vector(inst, hp.C, built.map, *seed.incumbent, &zhat);
        if (seed_sol.objective < upper_bound - 1e-12) {
          result.best = seed_sol;
          upper_bound = seed_sol.objective;
          cover_incumbent(inst, result.best, result.bounds);
        }
        reference = &seed_sol;
      }
      // Pre-loop "possible outlier" promotions against the fresh solution.
      for (int i = 0; i < inst.n; ++i) {
        if (zhat.codes[i] == 0 && reference->xi[i] > params.possible_outlier_threshold) {
          zhat.codes[i] = 2;
          streaks.z_one[i] = streaks.z_zero[i] = 0;
        } else if (zhat.codes[i] == 1 && margin_of(inst, *reference, i) >= 0.0) {
          zhat.codes[i] = 2;
          streaks.z_one[i] = streaks.z_zero[i] = 0;
        }
      }
      emit(trace, round, -1, "phase2", state, status_name(seed.status), upper_bound, zhat);
    }

    std::optional<milp::MilpStatus> prev_status;
    const long cap = params.phase3_iteration_cap > 0 ? params.phase3_iteration_cap
                                                     : static_cast<long>(inst.d) + 1;
    for (long it = 0; it < cap; ++it) {
      // Stop tests against the phase-2 relaxation value. The search ends only
      // if the codes still match the ones behind the relaxation value AND the
      // update table would leave them alone; otherwise new code values are in
      // play and the ordering is recomputed.
      if (std::abs(state.lb_zhat - upper_bound) <= ub_tol(upper_bound)) {
        StreakState probe = streaks;
        const ZHat next = update_zhat(zhat, inst, result.best,
                                      params.possible_outlier_threshold, params.q, probe);
        if (zhat.codes == state.lb_zhat_codes.codes && next.codes == zhat.codes) {
          result.stop_reason = "relaxation matches bound";
          finished = true;
        } else {
          result.stop_reason = "codes changed at matched bound";
        }
        break;
      }
      Phase3Context ctx{&inst, &hp, &result.bounds, &params, &clock, trace, round, it};
      ++result.iterations;
      const IterationOutcome outcome =
          phase3_iterate(ctx, state, zhat, streaks, result.best, upper_bound, prev_status);
      if (outcome == IterationOutcome::PassComplete) {
        result.stop_reason = "ordering exhausted";
        break;
      }
    }
  }

  result.zhat = zhat;
  result.elapsed_seconds = clock.seconds();
  result.best.objective = model::evaluate_objective(inst, hp.C, result.best);

  auto full = model::build_rlfs(inst, hp, result.bounds);
  const auto x = model::solution_to_vector(result.best, full.map, full.milp.base.num_vars());
  result.feasible =
      milp::max_violation(full.milp.base, x) <= 1e-6 && result.best.selected_count() <= hp.B;
  if (result.stop_reason.empty()) result.stop_reason = "round budget exhausted";
  return result;
}

}  // namespace rampsvm::daks
