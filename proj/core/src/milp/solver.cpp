#include "rampsvm/milp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace rampsvm::milp {

void MilpProblem::validate() const {
  base.validate();
  for (int j : binaries) {
    if (j < 0 || j >= base.num_vars()) {
      throw std::invalid_argument("binary id out of range");
    }
    if (base.lower[j] < -1e-12 || base.upper[j] > 1.0 + 1e-12) {
      throw std::invalid_argument("binary variable " + std::to_string(j) +
                                  " has bounds outside [0, 1]");
    }
  }
}

double max_violation(const lp::LinearProgram& lp, const std::vector<double>& x) {
  double worst = 0.0;
  for (int j = 0; j < lp.num_vars(); ++j) {
    worst = std::max(worst, lp.lower[j] - x[j]);
    worst = std::max(worst, x[j] - lp.upper[j]);
  }
  for (const auto& row : lp.rows) {
    double lhs = 0.0;
    for (const auto& [var, coeff] : row.coeffs) lhs += coeff * x[var];
    switch (row.sense) {
      case lp::RowSense::LessEqual:
        worst = std::max(worst, lhs - row.rhs);
        break;
      case lp::RowSense::GreaterEqual:
        worst = std::max(worst, row.rhs - lhs);
        break;
      case lp::RowSense::Equal:
        worst = std::max(worst, std::abs(lhs - row.rhs));
        break;
    }
  }
  return worst;
}

namespace {

struct Node {
  long id = 0;
  double bound = -lp::kInf;
  // Bound overrides relative to the root problem, innermost last.
  std::vector<std::tuple<int, double, double>> fixes;
  lp::Basis warm;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;  // min-heap on bound
    return a.id > b.id;
  }
};

double objective_of(const lp::LinearProgram& lp, const std::vector<double>& x) {
  double obj = 0.0;
  for (int j = 0; j < lp.num_vars(); ++j) obj += lp.objective[j] * x[j];
  return obj;
}

}  // namespace

MilpSolution MilpSolver::solve(const MilpProblem& problem, const SolveLimits& limits,
                               const std::optional<std::vector<double>>& warm_start,
                               const MilpEventLogger& log) {
  problem.validate();
  for (const auto& limit : {limits.time_limit, limits.feasibility_timeout,
                            limits.incumbent_stall}) {
    if (limit && *limit <= 0.0) throw std::invalid_argument("limits must be positive or absent");
  }
  if (limits.gap_tol < 0.0) throw std::invalid_argument("gap tolerance must be non-negative");
  util::Stopwatch clock(clock_mode_);
  lp::SimplexSolver lp_solver(lp_options_);
  lp_solver.attach_stopwatch(&clock);

  // Work on a minimization copy; flip the reported values at the end.
  lp::LinearProgram work = problem.base;
  const double sign = work.sense == lp::ObjSense::Maximize ? -1.0 : 1.0;
  if (work.sense == lp::ObjSense::Maximize) {
    work.sense = lp::ObjSense::Minimize;
    for (double& c : work.objective) c = -c;
  }

  MilpSolution out;
  std::optional<std::vector<double>> best;
  double best_obj = lp::kInf;
  double last_improve = 0.0;

  const double int_tol = limits.integrality_tol;
  auto integral = [&](const std::vector<double>& x) {
    for (int j : problem.binaries) {
      if (std::abs(x[j] - std::round(x[j])) > int_tol) return false;
    }
    return true;
  };

  auto accept_incumbent = [&](const std::vector<double>& x, long node_id) {
    const double obj = objective_of(work, x);
    if (obj < best_obj - 1e-9) {
      best = x;
      best_obj = obj;
      last_improve = clock.seconds();
      if (log) log(MilpEvent{clock.seconds(), node_id, sign * obj, 0.0, "incumbent"});
      return true;
    }
    return false;
  };

  if (warm_start.has_value()) {
    const auto& x = *warm_start;
    if (static_cast<int>(x.size()) == work.num_vars() && integral(x) &&
        max_violation(work, x) <= 1e-6) {
      accept_incumbent(x, -1);
    } else {
      out.warm_start_rejected = true;
    }
  }

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  long next_id = 0;
  long nodes_processed = 0;
  open.push(Node{next_id++, -lp::kInf, {}, {}});

  // Saved root bounds for restoring after each node visit.
  const std::vector<double> root_lower = work.lower;
  const std::vector<double> root_upper = work.upper;

  double heap_min_bound = -lp::kInf;
  bool limit_hit = false;

  auto gap_of = [&](double bound) {
    if (!best) return lp::kInf;
    return (best_obj - bound) / std::max(1e-10, std::abs(best_obj));
  };
  auto fathomed = [&](double bound) {
    if (!best) return false;
    const double slack = best_obj - bound;
    return slack <= 1e-9 * std::max(1.0, std::abs(best_obj)) ||
           gap_of(bound) <= limits.gap_tol + 1e-12;
  };

  auto check_limits = [&]() {
    const double t = clock.seconds();
    if (limits.time_limit && t > *limits.time_limit) return true;
    if (!best && limits.feasibility_timeout && t > *limits.feasibility_timeout) return true;
    if (best && limits.incumbent_stall && t - last_improve > *limits.incumbent_stall) return true;
    return false;
  };

  std::optional<Node> dive;
  double global_bound = -lp::kInf;

  while (dive.has_value() || !open.empty()) {
    Node node;
    if (dive.has_value()) {
      node = std::move(*dive);
      dive.reset();
    } else {
      node = open.top();
      open.pop();
    }
    heap_min_bound = open.empty() ? lp::kInf : open.top().bound;
    global_bound = std::min(node.bound, heap_min_bound);
    if (std::isfinite(node.bound) && fathomed(node.bound)) {
      continue;  // pruned by bound
    }
    if (check_limits()) {
      limit_hit = true;
      break;
    }

    for (const auto& [var, lo, hi] : node.fixes) {
      work.lower[var] = lo;
      work.upper[var] = hi;
    }
    lp::LpSolution rel;
    try {
      rel = node.warm.empty() ? lp_solver.solve(work) : lp_solver.solve(work, node.warm);
    } catch (...) {
      for (const auto& [var, lo, hi] : node.fixes) {
        work.lower[var] = root_lower[var];
        work.upper[var] = root_upper[var];
      }
      throw;
    }
    for (const auto& [var, lo, hi] : node.fixes) {
      work.lower[var] = root_lower[var];
      work.upper[var] = root_upper[var];
    }
    ++nodes_processed;

    if (rel.status == lp::LpStatus::Unbounded) {
      throw lp::NumericalFailure("relaxation unbounded; binaries cannot repair it");
    }
    if (rel.status == lp::LpStatus::Infeasible) continue;

    const double node_bound = rel.objective;
    if (log && nodes_processed % 256 == 0) {
      log(MilpEvent{clock.seconds(), nodes_processed,
                    best ? std::optional<double>(sign * best_obj) : std::nullopt,
                    sign * std::min(node_bound, heap_min_bound), "node"});
    }
    if (fathomed(node_bound)) continue;

    if (integral(rel.primal)) {
      accept_incumbent(rel.primal, nodes_processed);
      continue;
    }

    // Most fractional binary, ties by lowest id.
    int branch_var = -1;
    double best_frac = int_tol;
    for (int j : problem.binaries) {
      const double f = std::abs(rel.primal[j] - std::round(rel.primal[j]));
      if (f > best_frac + 1e-15) {
        best_frac = f;
        branch_var = j;
      }
    }
    if (branch_var < 0) {  // fractional only within tolerance
      accept_incumbent(rel.primal, nodes_processed);
      continue;
    }

    Node down{next_id++, node_bound, node.fixes, rel.basis};
    down.fixes.emplace_back(branch_var, 0.0, 0.0);
    Node up{next_id++, node_bound, node.fixes, rel.basis};
    up.fixes.emplace_back(branch_var, 1.0, 1.0);

    // Plunge toward the rounding of the fractional value, queue the sibling.
    if (rel.primal[branch_var] >= 0.5) {
      dive = std::move(up);
      open.push(std::move(down));
    } else {
      dive = std::move(down);
      open.push(std::move(up));
    }
  }

  double final_bound;
  if (limit_hit) {
    final_bound = global_bound;
    if (dive.has_value()) final_bound = std::min(final_bound, dive->bound);
    if (!open.empty()) final_bound = std::min(final_bound, open.top().bound);
  } else {
    final_bound = best ? best_obj : lp::kInf;  // search exhausted
  }
  if (best) final_bound = std::min(final_bound, best_obj);

  out.nodes = nodes_processed;
  out.elapsed_seconds = clock.seconds();
  if (best) {
    out.incumbent = std::move(best);
    out.objective = sign * best_obj;
    out.best_bound = sign * final_bound;
    out.gap = std::max(0.0, gap_of(final_bound));
    out.status = (!limit_hit && out.gap <= limits.gap_tol + 1e-12) ? MilpStatus::Optimal
                                                                   : MilpStatus::FeasibleLimitHit;
  } else {
    out.best_bound = sign * final_bound;
    out.gap = lp::kInf;
    out.status = limit_hit ? MilpStatus::NoIncumbent : MilpStatus::Infeasible;
  }
  if (log) {
    log(MilpEvent{out.elapsed_seconds, nodes_processed,
                  out.incumbent ? std::optional<double>(out.objective) : std::nullopt,
                  out.best_bound, "done"});
  }
  return out;
}

}  // namespace rampsvm::milp
