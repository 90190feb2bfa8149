#include "doctest.h"

#include <cmath>

#include "rampsvm/milp/solver.hpp"
#include "rampsvm/model/bigm.hpp"
#include "support/test_support.hpp"

using namespace rampsvm;
using model::HyperParams;
using model::SvmInstance;
using testsupport::oracle_exact;
using testsupport::random_instance;

TEST_SUITE("bigm_tightening") {

TEST_CASE("separable data maps cleanly with no repair") {
  SvmInstance inst;
  inst.n = 4;
  inst.d = 1;
  inst.x = {-1.0, -0.9, 0.9, 1.0};
  inst.y = {-1, -1, 1, 1};
  lp::SimplexSolver solver;
  auto [sol, ub] = bigm::initial_solution(inst, {1.0, 1}, solver);
  for (int zi : sol.z) CHECK(zi == 0);
  for (double xi : sol.xi) CHECK(xi == doctest::Approx(0.0));
  CHECK(sol.selected_count() == 1);
  CHECK(ub == doctest::Approx(sol.objective));
}

TEST_CASE("budget repair zeroes the smallest weights") {
  std::mt19937_64 rng(77);
  SvmInstance inst = random_instance(rng, 12, 5);
  // Make every feature informative so the unrestricted fit uses all five.
  for (int i = 0; i < inst.n; ++i) {
    for (int k = 1; k < inst.d; ++k) {
      inst.at(i, k) = std::clamp(inst.at(i, k) + 0.15 * (k + 1) * inst.y[i], -2.0, 2.0);
    }
  }
  const HyperParams hp{10.0, 2};
  lp::SimplexSolver solver;

  const auto unrestricted = model::build_svm_l1(inst, hp.C);
  const auto raw = solver.solve(unrestricted.lp);
  REQUIRE(raw.optimal());
  int dense_count = 0;
  for (int k = 0; k < inst.d; ++k) {
    if (std::abs(raw.primal[unrestricted.map.w[k]]) > 1e-9) ++dense_count;
  }
  if (dense_count <= hp.B) return;  // repair branch not exercised by this draw

  auto [sol, ub] = bigm::initial_solution(inst, hp, solver);
  CHECK(sol.selected_count() <= hp.B);
  // The kept features are among the B largest |w| of the unrestricted fit.
  std::vector<std::pair<double, int>> mags;
  for (int k = 0; k < inst.d; ++k) {
    mags.emplace_back(std::abs(raw.primal[unrestricted.map.w[k]]), k);
  }
  std::stable_sort(mags.begin(), mags.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (int r = 0; r < inst.d - hp.B; ++r) CHECK(sol.v[mags[r].second] == 0);
}

TEST_CASE("initial objective dominates the exact optimum") {
  std::mt19937_64 rng(80);
  lp::SimplexSolver solver;
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = random_instance(rng, 4 + static_cast<int>(rng() % 4),
                                      1 + static_cast<int>(rng() % 3));
    const HyperParams hp{0.5 + (trial % 3), 1 + static_cast<int>(rng() % inst.d)};
    auto [sol, ub] = bigm::initial_solution(inst, hp, solver);
    CHECK(ub >= oracle_exact(inst, hp).objective - 1e-7);
  }
}

TEST_CASE("initial big-M values follow the distance-times-bound rule") {
  SUBCASE("identical same-class points have zero slack need") {
    SvmInstance inst;
    inst.n = 3;
    inst.d = 2;
    inst.x = {0.4, 0.4, 0.4, 0.4, 0.9, 0.1};
    inst.y = {1, 1, -1};
    const auto bounds = bigm::init_bounds(inst, 2.5);
    CHECK(bounds.M[0] == doctest::Approx(0.0));
    CHECK(bounds.M[1] == doctest::Approx(0.0));
    CHECK(bounds.M[2] == doctest::Approx(0.0));  // single-point class
    CHECK(bounds.u == std::vector<double>{2.5, 2.5});
    CHECK(bounds.l == std::vector<double>{2.5, 2.5});
  }
  SUBCASE("distance two at bound three gives six") {
    SvmInstance inst;
    inst.n = 4;
    inst.d = 1;
    inst.x = {0.0, 2.0, 5.0, 5.5};
    inst.y = {1, 1, -1, -1};
    const auto bounds = bigm::init_bounds(inst, 3.0);
    CHECK(bounds.M[0] == doctest::Approx(6.0));
    CHECK(bounds.M[1] == doctest::Approx(6.0));
    CHECK(bounds.M[2] == doctest::Approx(1.5));
    CHECK(bounds.M[3] == doctest::Approx(1.5));
  }
  SUBCASE("initial values keep the model exact") {
    std::mt19937_64 rng(88);
    lp::SimplexSolver solver;
    milp::MilpSolver milp_solver;
    for (int trial = 0; trial < 20; ++trial) {
      const auto inst = random_instance(rng, 4 + static_cast<int>(rng() % 3), 2);
      const HyperParams hp{1.0, 1 + static_cast<int>(rng() % 2)};
      auto [sol, ub] = bigm::initial_solution(inst, hp, solver);
      const auto bounds = bigm::init_bounds(inst, ub);
      auto built = model::build_rlfs(inst, hp, bounds);
      const auto got = milp_solver.solve(built.milp, {});
      REQUIRE(got.status == milp::MilpStatus::Optimal);
      CHECK(got.objective == doctest::Approx(oracle_exact(inst, hp).objective).epsilon(1e-6));
    }
  }
}

TEST_CASE("every bound field is non-increasing across the loop") {
  std::mt19937_64 rng(92);
  for (int trial = 0; trial < 6; ++trial) {
    const auto inst = random_instance(rng, 6, 3);
    const HyperParams hp{1.0, 2};

    std::vector<double> ubw_seq;
    std::vector<double> width_seq;
    bigm::TraceSink trace = [&](const bigm::TraceEntry& e) {
      if (e.field == "UB_w") ubw_seq.push_back(e.new_value);
    };
    const auto result = bigm::run_algorithm1(inst, hp, {}, trace);
    for (std::size_t i = 1; i < ubw_seq.size(); ++i) CHECK(ubw_seq[i] <= ubw_seq[i - 1] + 1e-9);
    CHECK(result.iterations >= 1);
    CHECK(result.iterations <= 5);
    CHECK(result.incumbent_feasible);
    (void)width_seq;
  }
}

TEST_CASE("huge improvement threshold exits after one pass") {
  std::mt19937_64 rng(95);
  const auto inst = random_instance(rng, 5, 2);
  bigm::Algorithm1Options opts;
  opts.min_rel_improvement = 1e9;
  const auto result = bigm::run_algorithm1(inst, {1.0, 1}, opts);
  CHECK(result.iterations == 1);
}

TEST_CASE("tightened bounds preserve the exact optimum") {
  std::mt19937_64 rng(99);
  milp::MilpSolver milp_solver;
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = random_instance(rng, 4 + static_cast<int>(rng() % 4),
                                      1 + static_cast<int>(rng() % 3));
    const HyperParams hp{trial % 2 == 0 ? 1.0 : 0.1, 1 + static_cast<int>(rng() % inst.d)};
    const double reference = oracle_exact(inst, hp).objective;

    for (int variant : {1, 2}) {
      bigm::Algorithm1Options opts;
      opts.variant = variant;
      const auto result = bigm::run_algorithm1(inst, hp, opts);
      auto built = model::build_rlfs(inst, hp, result.bounds);
      const auto got = milp_solver.solve(built.milp, {});
      REQUIRE(got.status == milp::MilpStatus::Optimal);
      CHECK(got.objective == doctest::Approx(reference).epsilon(1e-6));
      CHECK(result.incumbent_feasible);
      CHECK(result.upper_bound >= reference - 1e-7);
    }
  }
}

TEST_CASE("variant choice follows the instance size by default") {
  bigm::Algorithm1Options opts;
  CHECK(bigm::pick_variant(opts, 200) == 1);
  CHECK(bigm::pick_variant(opts, 501) == 2);
  opts.variant = 2;
  CHECK(bigm::pick_variant(opts, 10) == 2);
}

}  // TEST_SUITE
