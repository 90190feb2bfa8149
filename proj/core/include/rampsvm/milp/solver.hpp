#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "rampsvm/lp/model.hpp"
#include "rampsvm/lp/simplex.hpp"
#include "rampsvm/util/stopwatch.hpp"

namespace rampsvm::milp {

struct MilpProblem {
  lp::LinearProgram base;
  std::vector<int> binaries;

  void validate() const;
};

/// Solve controls: a total budget, a deadline for the first incumbent, and a
/// stall deadline counted from the last strict incumbent improvement. Times
/// are seconds on the solver's effort clock.
struct SolveLimits {
  std::optional<double> time_limit;
  std::optional<double> feasibility_timeout;
  std::optional<double> incumbent_stall;
  double gap_tol = 0.0;
  double integrality_tol = 1e-9;
};

enum class MilpStatus : std::uint8_t { Optimal, FeasibleLimitHit, Infeasible, NoIncumbent };

struct MilpSolution {
  MilpStatus status = MilpStatus::NoIncumbent;
  std::optional<std::vector<double>> incumbent;
  double objective = 0.0;  // meaningful when incumbent is present
  double best_bound = 0.0;
  double gap = 0.0;
  double elapsed_seconds = 0.0;
  long nodes = 0;
  bool warm_start_rejected = false;

  bool has_incumbent() const { return incumbent.has_value(); }
};

struct MilpEvent {
  double time = 0.0;
  long node = 0;
  std::optional<double> incumbent;
  double bound = 0.0;
  const char* kind = "";
};
using MilpEventLogger = std::function<void(const MilpEvent&)>;

/// Best-first branch and bound over the binary variables, with depth-first
/// plunging after branching, LP relaxation bounds, and warm starts of child
/// node LPs from the parent basis. Branching picks the most fractional
/// binary, ties broken by lowest id.
class MilpSolver {
public:
  explicit MilpSolver(lp::SimplexOptions lp_options = {},
                      util::Stopwatch::Mode clock_mode = util::Stopwatch::Mode::Deterministic)
      : lp_options_(lp_options), clock_mode_(clock_mode) {}

  MilpSolution solve(const MilpProblem& problem, const SolveLimits& limits,
                     const std::optional<std::vector<double>>& warm_start = {},
                     const MilpEventLogger& log = {});

private:
  lp::SimplexOptions lp_options_;
  util::Stopwatch::Mode clock_mode_;
};

/// Largest absolute violation of any row or variable bound at `x`.
double max_violation(const lp::LinearProgram& lp, const std::vector<double>& x);

}  // namespace rampsvm::milp
