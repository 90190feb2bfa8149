#pragma once

#include <utility>
#include <vector>

#include "rampsvm/lp/model.hpp"
#include "rampsvm/util/stopwatch.hpp"

namespace rampsvm::lp {

struct SimplexOptions {
  double feas_tol = 1e-7;
  double opt_tol = 1e-7;
  double zero_tol = 1e-9;
  double pivot_tol = 1e-8;
  // 0 means the default cap of 50 * (rows + cols).
  long max_iterations = 0;
  // Consecutive non-improving iterations before switching to Bland's rule.
  long bland_trigger = 1000;
  int refactor_interval = 100;
};

/// Bounded-variable primal simplex (two phases, composite phase 1, dense LU
/// basis with product-form updates). One instance owns all mutable state and
/// is single-threaded; distinct instances may run concurrently.
class SimplexSolver {
public:
  explicit SimplexSolver(SimplexOptions options = {}) : options_(options) {}

  LpSolution solve(const LinearProgram& lp);
  /// Continues from a previous basis; bound changes are repaired in phase 1.
  LpSolution solve(const LinearProgram& lp, const Basis& warm);

  /// Solves with lower = upper = value for each listed variable. Reduced
  /// costs come back for every column, so the caller can read sensitivities
  /// of the variables that stayed free.
  LpSolution solve_with_fixed(const LinearProgram& lp,
                              const std::vector<std::pair<int, double>>& fixes);

  /// Optional shared effort meter; the solver adds its work to it.
  void attach_stopwatch(util::Stopwatch* sw) { stopwatch_ = sw; }

  const SimplexOptions& options() const { return options_; }

private:
  class Impl;
  SimplexOptions options_;
  util::Stopwatch* stopwatch_ = nullptr;
};

}  // namespace rampsvm::lp
