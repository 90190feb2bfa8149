#include "rampsvm/model/bigm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rampsvm/util/parallel.hpp"

namespace rampsvm::bigm {

using model::BigMBounds;
using model::ClassifierSolution;
using model::HyperParams;
using model::SvmInstance;

namespace {

constexpr double kSupportTol = 1e-9;

void emit(const TraceSink& trace, const char* stage, const std::string& field, double before,
          double after) {
  if (trace) trace(TraceEntry{stage, field, before, after});
}

// Smallest M_i keeping this solution feasible in margin row i when z_i = 1.
double margin_need(const SvmInstance& inst, const ClassifierSolution& sol, int i) {
  if (sol.z[i] != 1) return 0.0;
  double dot = sol.b;
  for (int k = 0; k < inst.d; ++k) dot += sol.weight(k) * inst.at(i, k);
  return std::max(0.0, 1.0 - sol.xi[i] - inst.y[i] * dot);
}

}  // namespace

ClassifierSolution classic_to_solution(const SvmInstance& inst, const lp::LpSolution& svm,
                                       const model::VarMap& map) {
  ClassifierSolution sol;
  sol.w_plus.assign(inst.d, 0.0);
  sol.w_minus.assign(inst.d, 0.0);
  sol.xi.assign(inst.n, 0.0);
  sol.z.assign(inst.n, 0);
  sol.v.assign(inst.d, 0);
  for (int k = 0; k < inst.d; ++k) {
    const double w = map.w[k] >= 0 ? svm.primal[map.w[k]] : 0.0;
    if (w >= 0) {
      sol.w_plus[k] = w;
    } else {
      sol.w_minus[k] = -w;
    }
    sol.v[k] = std::abs(w) > kSupportTol ? 1 : 0;
  }
  sol.b = svm.primal[map.b];
  for (int i = 0; i < inst.n; ++i) {
    const double xi = svm.primal[map.xi[i]];
    if (xi <= 2.0) {
      sol.xi[i] = std::max(0.0, xi);
      sol.z[i] = 0;
    } else {
      sol.xi[i] = 0.0;
      sol.z[i] = 1;
    }
  }
  return sol;
}

std::pair<ClassifierSolution, double> initial_solution(const SvmInstance& inst,
                                                       const HyperParams& hp,
                                                       lp::SimplexSolver& solver) {
  auto classic = model::build_svm_l1(inst, hp.C);
  lp::LpSolution svm = solver.solve(classic.lp);
  if (!svm.optimal()) throw lp::NumericalFailure("classic margin LP did not solve");
  ClassifierSolution mapped = classic_to_solution(inst, svm, classic.map);

  if (mapped.selected_count() > hp.B) {
    // Budget repair: keep only the B largest |w| features and re-solve.
    std::vector<int> order(inst.d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return std::abs(mapped.weight(a)) < std::abs(mapped.weight(b));
    });
    std::vector<std::uint8_t> allowed(inst.d, 1);
    for (int r = 0; r < inst.d - hp.B; ++r) allowed[order[r]] = 0;
    auto reduced = model::build_svm_l1(inst, hp.C, &allowed);
    lp::LpSolution again = solver.solve(reduced.lp);
    if (!again.optimal()) throw lp::NumericalFailure("budget-repair LP did not solve");
    mapped = classic_to_solution(inst, again, reduced.map);
  }

  auto refit = model::build_refit_lp(inst, hp.C, mapped.v, mapped.z);
  lp::LpSolution polished = solver.solve(refit.lp);
  if (!polished.optimal()) throw lp::NumericalFailure("refit LP did not solve");

  ClassifierSolution out;
  out.w_plus.assign(inst.d, 0.0);
  out.w_minus.assign(inst.d, 0.0);
  out.xi.assign(inst.n, 0.0);
  out.z = mapped.z;
  out.v = mapped.v;
  for (int k = 0; k < inst.d; ++k) {
    if (refit.map.w_plus[k] >= 0) out.w_plus[k] = std::max(0.0, polished.primal[refit.map.w_plus[k]]);
    if (refit.map.w_minus[k] >= 0) {
      out.w_minus[k] = std::max(0.0, polished.primal[refit.map.w_minus[k]]);
    }
  }
  out.b = refit.map.b >= 0 ? polished.primal[refit.map.b] : 0.0;
  for (int i = 0; i < inst.n; ++i) {
    if (refit.map.xi[i] >= 0) out.xi[i] = std::clamp(polished.primal[refit.map.xi[i]], 0.0, 2.0);
  }
  out.objective = model::evaluate_objective(inst, hp.C, out);
  return {out, out.objective};
}

BigMBounds init_bounds(const SvmInstance& inst, double upper_bound) {
  BigMBounds bounds;
  bounds.UB = upper_bound;
  bounds.u.assign(inst.d, upper_bound);
  bounds.l.assign(inst.d, upper_bound);
  bounds.M.assign(inst.n, 0.0);
  bounds.same_class_diameter.assign(inst.n, 0.0);
  for (int i = 0; i < inst.n; ++i) {
    double diam = 0.0;
    for (int j = 0; j < inst.n; ++j) {
      if (inst.y[j] != inst.y[i]) continue;
      double dist = 0.0;
      for (int k = 0; k < inst.d; ++k) {
        dist = std::max(dist, std::abs(inst.at(i, k) - inst.at(j, k)));
      }
      diam = std::max(diam, dist);
    }
    bounds.same_class_diameter[i] = diam;
    bounds.M[i] = diam * upper_bound;
  }
  return bounds;
}

void tighten_w(const SvmInstance& inst, const HyperParams& hp, BigMBounds& bounds,
               lp::SimplexSolver& solver, const TraceSink& trace,
               const ClassifierSolution* keep_feasible) {
  auto built = model::build_ubw_lp(inst, hp, bounds);
  lp::LpSolution sol = solver.solve(built.lp);
  if (sol.status == lp::LpStatus::Unbounded) {
    throw std::invalid_argument("w-sum LP unbounded: objective upper bound missing or invalid");
  }
  if (!sol.optimal()) throw lp::NumericalFailure("w-sum tightening LP did not solve");
  const double new_ubw = std::min(bounds.UB_w, std::max(0.0, sol.objective));
  emit(trace, "tighten_w", "UB_w", bounds.UB_w, new_ubw);
  bounds.UB_w = new_ubw;
  for (int k = 0; k < inst.d; ++k) {
    bounds.u[k] = std::min(bounds.u[k], new_ubw);
    bounds.l[k] = std::min(bounds.l[k], new_ubw);
  }
  for (int i = 0; i < inst.n; ++i) {
    double next = std::min(bounds.M[i], bounds.same_class_diameter[i] * new_ubw);
    if (keep_feasible != nullptr) {
      next = std::max(next, std::min(bounds.M[i], margin_need(inst, *keep_feasible, i)));
    }
    bounds.M[i] = next;
  }
}

void tighten_b(const SvmInstance& inst, const HyperParams& hp, BigMBounds& bounds,
               lp::SimplexSolver& solver, const TraceSink& trace) {
  auto [ub_lp, lb_lp] = model::build_b_bound_lps(inst, hp, bounds);
  lp::LpSolution hi = solver.solve(ub_lp.lp);
  lp::LpSolution lo = solver.solve(lb_lp.lp);
  if (hi.status == lp::LpStatus::Unbounded || lo.status == lp::LpStatus::Unbounded) {
    throw std::logic_error("intercept LP unbounded: bound rows missing");
  }
  if (!hi.optimal() || !lo.optimal()) {
    throw lp::NumericalFailure("intercept tightening LPs did not solve");
  }
  const double new_ub = std::min(bounds.UB_b, hi.objective);
  const double new_lb = std::max(bounds.LB_b, lo.objective);
  emit(trace, "tighten_b", "UB_b", bounds.UB_b, new_ub);
  emit(trace, "tighten_b", "LB_b", bounds.LB_b, new_lb);
  bounds.UB_b = new_ub;
  bounds.LB_b = new_lb;
}

void tighten_M(const SvmInstance& inst, const HyperParams& hp, BigMBounds& bounds, int variant,
               const lp::SimplexOptions& lp_options, int threads, const TraceSink& trace,
               const ClassifierSolution* keep_feasible) {
  auto apply = [&](int i, double value) {
    double next = std::min(bounds.M[i], std::max(0.0, value));
    if (keep_feasible != nullptr) {
      next = std::max(next, std::min(bounds.M[i], margin_need(inst, *keep_feasible, i)));
    }
    if (trace && next != bounds.M[i]) {
      emit(trace, "tighten_M", "M_" + std::to_string(i), bounds.M[i], next);
    }
    bounds.M[i] = next;
  };
  if (variant == 1) {
    std::vector<double> values(inst.n, 0.0);
    util::parallel_for(inst.n, threads, [&](int i) {
      lp::SimplexSolver local(lp_options);
      auto built = model::build_ubmi_lp(inst, hp, bounds, i);
      lp::LpSolution sol = local.solve(built.lp);
      if (!sol.optimal()) throw lp::NumericalFailure("per-individual big-M LP did not solve");
      values[i] = sol.objective + built.objective_constant;
    });
    for (int i = 0; i < inst.n; ++i) apply(i, values[i]);
    return;
  }

  lp::SimplexSolver solver(lp_options);
  const auto extremes = model::compute_class_extremes(inst);
  double value_pos = lp::kInf, value_neg = lp::kInf;
  bool has_pos = false, has_neg = false;
  for (int i = 0; i < inst.n; ++i) {
    has_pos = has_pos || inst.y[i] == 1;
    has_neg = has_neg || inst.y[i] == -1;
  }
  if (has_pos) {
    auto built = model::build_ubm_class_lp(inst, hp, bounds, extremes, 1);
    lp::LpSolution sol = solver.solve(built.lp);
    if (!sol.optimal()) throw lp::NumericalFailure("class big-M LP (+1) did not solve");
    value_pos = sol.objective + built.objective_constant;
  }
  if (has_neg) {
    auto built = model::build_ubm_class_lp(inst, hp, bounds, extremes, -1);
    lp::LpSolution sol = solver.solve(built.lp);
    if (!sol.optimal()) throw lp::NumericalFailure("class big-M LP (-1) did not solve");
    value_neg = sol.objective + built.objective_constant;
  }
  for (int i = 0; i < inst.n; ++i) apply(i, inst.y[i] == 1 ? value_pos : value_neg);
}

int pick_variant(const Algorithm1Options& options, int n) {
  if (options.variant == 1 || options.variant == 2) return options.variant;
  return n <= 500 ? 1 : 2;
}

namespace {

double bound_metric(const BigMBounds& bounds) {
  double total = bounds.UB_w;
  if (bounds.has_b_bounds()) total += bounds.UB_b - bounds.LB_b;
  for (double m : bounds.M) total += m;
  return total;
}

}  // namespace

Algorithm1Result run_algorithm1(const SvmInstance& inst, const HyperParams& hp,
                                const Algorithm1Options& options, const TraceSink& trace,
                                util::Stopwatch* stopwatch) {
  lp::SimplexSolver solver(options.lp_options);
  if (stopwatch != nullptr) solver.attach_stopwatch(stopwatch);

  Algorithm1Result result;
  result.variant_used = pick_variant(options, inst.n);
  auto [incumbent, ub] = initial_solution(inst, hp, solver);
  result.incumbent = std::move(incumbent);
  result.upper_bound = ub;
  result.bounds = init_bounds(inst, ub);
  emit(trace, "init", "UB", lp::kInf, ub);
  // The refit does not constrain the margin of the dropped individuals, so
  // the displayed initial M may sit below what the incumbent needs there.
  for (int i = 0; i < inst.n; ++i) {
    const double need = margin_need(inst, result.incumbent, i);
    if (need > result.bounds.M[i]) {
      emit(trace, "init", "M_" + std::to_string(i), result.bounds.M[i], need);
      result.bounds.M[i] = need;
    }
  }

  tighten_w(inst, hp, result.bounds, solver, trace, &result.incumbent);
  tighten_b(inst, hp, result.bounds, solver, trace);

  double metric = bound_metric(result.bounds);
  for (int iter = 0; iter < options.max_iters; ++iter) {
    tighten_w(inst, hp, result.bounds, solver, trace, &result.incumbent);
    tighten_M(inst, hp, result.bounds, result.variant_used, options.lp_options, options.threads,
              trace, &result.incumbent);
    ++result.iterations;
    const double next = bound_metric(result.bounds);
    const double rel = (metric - next) / std::max(1.0, std::abs(metric));
    metric = next;
    if (rel < options.min_rel_improvement) break;
  }

  // The incumbent should sit inside the tightened model; record if not.
  auto built = model::build_rlfs(inst, hp, result.bounds);
  const auto x = model::solution_to_vector(result.incumbent, built.map, built.milp.base.num_vars());
  result.incumbent_feasible = milp::max_violation(built.milp.base, x) <= 1e-6;
  return result;
}

}  // namespace rampsvm::bigm
