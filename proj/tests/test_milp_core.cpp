#include "doctest.h"

#include <bit>
#include <cmath>

#include "rampsvm/milp/solver.hpp"
#include "rampsvm/model/bigm.hpp"
#include "support/test_support.hpp"

using namespace rampsvm;
using milp::MilpProblem;
using milp::MilpSolution;
using milp::MilpSolver;
using milp::MilpStatus;
using milp::SolveLimits;
using lp::kInf;
using lp::LinearProgram;
using lp::RowSense;

namespace {

// Exhaustive reference: every binary assignment, residual LP over the rest.
double enumerate_optimum(const MilpProblem& problem, bool* feasible) {
  lp::SimplexSolver solver;
  double best = kInf;
  *feasible = false;
  const int nb = static_cast<int>(problem.binaries.size());
  for (std::uint32_t mask = 0; mask < (1u << nb); ++mask) {
    std::vector<std::pair<int, double>> fixes;
    bool valid = true;
    for (int b = 0; b < nb; ++b) {
      const int var = problem.binaries[b];
      const double value = (mask >> b) & 1u;
      if (value < problem.base.lower[var] - 1e-12 || value > problem.base.upper[var] + 1e-12) {
        valid = false;
        break;
      }
      fixes.emplace_back(var, value);
    }
    if (!valid) continue;
    const auto sol = solver.solve_with_fixed(problem.base, fixes);
    if (sol.optimal()) {
      *feasible = true;
      best = std::min(best, sol.objective);
    }
  }
  return best;
}

// When anchored, rows are built around a random mixed assignment so the
// instance is guaranteed feasible; raw instances may be infeasible.
MilpProblem random_milp(std::mt19937_64& rng, int binaries, int continuous, int rows,
                        bool anchored = true) {
  std::uniform_real_distribution<double> coeff(-4.0, 4.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  MilpProblem problem;
  std::vector<double> anchor;
  for (int b = 0; b < binaries; ++b) {
    problem.binaries.push_back(problem.base.add_variable(0.0, 1.0, coeff(rng)));
    anchor.push_back(unit(rng) < 0.5 ? 0.0 : 1.0);
  }
  for (int c = 0; c < continuous; ++c) {
    problem.base.add_variable(0.0, 2.0, coeff(rng));
    anchor.push_back(2.0 * unit(rng));
  }
  for (int r = 0; r < rows; ++r) {
    std::vector<std::pair<int, double>> terms;
    double lhs = 0.0;
    for (int j = 0; j < problem.base.num_vars(); ++j) {
      if (unit(rng) < 0.5) {
        const double a = coeff(rng);
        terms.emplace_back(j, a);
        lhs += a * anchor[j];
      }
    }
    if (terms.empty()) continue;
    const double rhs = anchored ? lhs + (unit(rng) - 0.3) : coeff(rng);
    problem.base.add_row(std::move(terms),
                         unit(rng) < 0.5 ? RowSense::LessEqual : RowSense::GreaterEqual, rhs);
  }
  return problem;
}

}  // namespace

TEST_SUITE("milp_core") {

TEST_CASE("two-variable packing") {
  MilpProblem problem;
  problem.base.sense = lp::ObjSense::Maximize;
  const int x1 = problem.base.add_variable(0.0, 1.0, 1.0);
  const int x2 = problem.base.add_variable(0.0, 1.0, 1.0);
  problem.base.add_row({{x1, 1.0}, {x2, 1.0}}, RowSense::LessEqual, 1.0);
  problem.binaries = {x1, x2};
  MilpSolver solver;
  const auto sol = solver.solve(problem, {});
  REQUIRE(sol.status == MilpStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(1.0));
}

TEST_CASE("matches exhaustive enumeration on random problems") {
  std::mt19937_64 rng(91);
  MilpSolver solver;
  int solved = 0, infeasible = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int nb = 3 + static_cast<int>(rng() % 10);  // up to 12 binaries
    auto problem = random_milp(rng, nb, 2, 4 + static_cast<int>(rng() % 4), trial % 3 != 2);
    bool feasible = false;
    const double reference = enumerate_optimum(problem, &feasible);
    const auto sol = solver.solve(problem, {});
    if (!feasible) {
      CHECK(sol.status == MilpStatus::Infeasible);
      ++infeasible;
      continue;
    }
    REQUIRE(sol.status == MilpStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(reference).epsilon(1e-9));
    CHECK(sol.best_bound == doctest::Approx(sol.objective).epsilon(1e-6));
    CHECK(sol.gap <= 1e-9);
    ++solved;
  }
  CHECK(solved + infeasible == 50);
  CHECK(solved >= 30);
}

TEST_CASE("budgeted ramp model agrees with the subset-enumeration reference") {
  // Four points, two features, budget 1: the solver against the brute force.
  model::SvmInstance inst;
  inst.n = 4;
  inst.d = 2;
  inst.x = {0.1, 0.9, 0.2, 0.3, 0.8, 0.2, 0.9, 0.8};
  inst.y = {-1, -1, 1, 1};
  const model::HyperParams hp{1.0, 1};
  const auto reference = testsupport::oracle_exact(inst, hp);

  lp::SimplexSolver lp_solver;
  auto [incumbent, ub] = bigm::initial_solution(inst, hp, lp_solver);
  auto bounds = bigm::init_bounds(inst, ub);
  auto built = model::build_rlfs(inst, hp, bounds);
  MilpSolver solver;
  const auto sol = solver.solve(built.milp, {});
  REQUIRE(sol.status == MilpStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(reference.objective).epsilon(1e-6));
}

TEST_CASE("feasibility timeout yields no incumbent") {
  // Feasible chain model with a fractional root relaxation, sized so the
  // root LP alone exhausts the effort budget before any incumbent exists.
  MilpProblem problem;
  const int n = 120;
  for (int j = 0; j < n; ++j) problem.binaries.push_back(problem.base.add_variable(0.0, 1.0, 1.0));
  for (int j = 0; j + 1 < n; ++j) {
    problem.base.add_row({{j, 1.0}, {j + 1, 1.0}}, RowSense::GreaterEqual, 0.5);
  }
  SolveLimits limits;
  limits.feasibility_timeout = 0.001;
  MilpSolver solver;
  const auto sol = solver.solve(problem, limits);
  CHECK(sol.status == MilpStatus::NoIncumbent);
  CHECK_FALSE(sol.has_incumbent());
}

TEST_CASE("incumbent sequence is non-increasing in the event log") {
  std::mt19937_64 rng(17);
  MilpSolver solver;
  for (int trial = 0; trial < 5; ++trial) {
    auto problem = random_milp(rng, 10, 2, 5);
    std::vector<double> incumbents;
    milp::MilpEventLogger logger = [&](const milp::MilpEvent& e) {
      if (std::string(e.kind) == "incumbent" && e.incumbent) incumbents.push_back(*e.incumbent);
    };
    (void)solver.solve(problem, {}, {}, logger);
    for (std::size_t i = 1; i < incumbents.size(); ++i) {
      CHECK(incumbents[i] <= incumbents[i - 1] + 1e-12);
    }
  }
}

TEST_CASE("warm starts are validated") {
  MilpProblem problem;
  const int x = problem.base.add_variable(0.0, 1.0, 1.0);
  const int y = problem.base.add_variable(0.0, 1.0, 2.0);
  problem.base.add_row({{x, 1.0}, {y, 1.0}}, RowSense::GreaterEqual, 1.0);
  problem.binaries = {x, y};
  MilpSolver solver;

  SUBCASE("feasible start becomes the first incumbent") {
    const std::vector<double> warm = {1.0, 1.0};
    const auto sol = solver.solve(problem, {}, warm);
    CHECK_FALSE(sol.warm_start_rejected);
    CHECK(sol.objective == doctest::Approx(1.0));
  }
  SUBCASE("violating start is rejected with a flag") {
    const std::vector<double> warm = {0.0, 0.0};
    const auto sol = solver.solve(problem, {}, warm);
    CHECK(sol.warm_start_rejected);
    CHECK(sol.status == MilpStatus::Optimal);
  }
  SUBCASE("fractional start is rejected") {
    const std::vector<double> warm = {0.5, 0.5};
    const auto sol = solver.solve(problem, {}, warm);
    CHECK(sol.warm_start_rejected);
  }
}

TEST_CASE("binary bound validation") {
  MilpProblem problem;
  const int x = problem.base.add_variable(0.0, 2.0, 1.0);
  problem.binaries = {x};
  MilpSolver solver;
  CHECK_THROWS_AS(solver.solve(problem, {}), std::invalid_argument);
}

TEST_CASE("incumbent stall limit stops with the current best") {
  // An easy instance: the limit must not break correctness of the incumbent.
  std::mt19937_64 rng(23);
  auto problem = random_milp(rng, 8, 2, 4);
  bool feasible = false;
  const double reference = enumerate_optimum(problem, &feasible);
  if (!feasible) return;
  SolveLimits limits;
  limits.incumbent_stall = 1e9;  // never fires on this size
  MilpSolver solver;
  const auto sol = solver.solve(problem, limits);
  REQUIRE(sol.status == MilpStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(reference).epsilon(1e-9));
}

}  // TEST_SUITE
