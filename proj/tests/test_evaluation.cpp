#include "doctest.h"

#include <cmath>

#include "rampsvm/eval/cv.hpp"
#include "support/test_support.hpp"

using namespace rampsvm;
using eval::compute_metrics;
using eval::Metrics;
using model::ClassifierSolution;

namespace {

ClassifierSolution line_model(double w0, double w1, double b) {
  ClassifierSolution sol;
  sol.w_plus = {std::max(0.0, w0), std::max(0.0, w1)};
  sol.w_minus = {std::max(0.0, -w0), std::max(0.0, -w1)};
  sol.b = b;
  sol.v = {sol.w_plus[0] + sol.w_minus[0] > 0 ? 1 : 0, sol.w_plus[1] + sol.w_minus[1] > 0 ? 1 : 0};
  return sol;
}

data::Dataset separable_dataset(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  data::Dataset ds;
  ds.instance.n = n;
  ds.instance.d = 2;
  for (int i = 0; i < n; ++i) {
    const int label = i % 2 == 0 ? 1 : -1;
    const double x0 = label == 1 ? 0.75 + 0.25 * unit(rng) : 0.25 * unit(rng);
    ds.instance.x.push_back(x0);
    ds.instance.x.push_back(unit(rng));
    ds.instance.y.push_back(label);
  }
  return ds;
}

}  // namespace

TEST_SUITE("evaluation") {

TEST_CASE("hyperplane vote") {
  const auto sol = line_model(1.0, 0.0, 0.0);
  CHECK(eval::predict(sol, {2.0, 5.0}) == 1);
  CHECK(eval::predict(sol, {0.0, 3.0}) == 1);  // on the hyperplane counts as +1
  CHECK(eval::predict(sol, {-0.5, 1.0}) == -1);

  const auto negated = line_model(-1.0, 0.0, 0.0);
  CHECK(eval::predict(negated, {2.0, 5.0}) == -1);
  CHECK(eval::predict(negated, {0.0, 3.0}) == 1);  // tie rule is not symmetric
}

TEST_CASE("confusion metrics") {
  SUBCASE("hand-computed mixed table") {
    const std::vector<int> truth = {1, 1, 1, -1, -1, -1};
    const std::vector<int> preds = {1, 1, 1, -1, -1, 1};
    const auto m = compute_metrics(preds, truth);
    CHECK(m.tp == 3);
    CHECK(m.tn == 2);
    CHECK(m.fp == 1);
    CHECK(m.fn == 0);
    CHECK(m.acc == doctest::Approx(5.0 / 6.0));
    REQUIRE(m.auc.has_value());
    CHECK(*m.auc == doctest::Approx(5.0 / 6.0));
  }
  SUBCASE("perfect predictions") {
    const std::vector<int> truth = {1, -1, 1, -1};
    const auto m = compute_metrics(truth, truth);
    CHECK(m.acc == doctest::Approx(1.0));
    CHECK(*m.auc == doctest::Approx(1.0));
  }
  SUBCASE("all-positive predictor on balanced truth") {
    const std::vector<int> truth = {1, 1, -1, -1};
    const std::vector<int> preds = {1, 1, 1, 1};
    const auto m = compute_metrics(preds, truth);
    CHECK(m.acc == doctest::Approx(0.5));
    CHECK(*m.auc == doctest::Approx(0.5));
  }
  SUBCASE("missing class leaves the balanced accuracy undefined") {
    const std::vector<int> truth = {1, 1, 1};
    const std::vector<int> preds = {1, -1, 1};
    const auto m = compute_metrics(preds, truth);
    CHECK_FALSE(m.auc.has_value());
    CHECK(m.acc == doctest::Approx(2.0 / 3.0));
  }
}

TEST_CASE("cross-validation on separable data is perfect") {
  const auto ds = separable_dataset(40, 11);
  eval::TfcvOptions options;
  options.c_grid = {1.0};
  options.b_grid = {1};
  options.fitter = eval::FitterKind::Daks;
  options.seed = 5;
  options.threads = 2;
  const auto report = eval::run_tfcv(ds, options);
  REQUIRE(report.cells.size() == 1);
  const auto& cell = report.cells[0];
  CHECK(cell.completed == 10);
  CHECK_FALSE(cell.any_failed);
  CHECK(cell.mean_acc == doctest::Approx(1.0));
  CHECK(*cell.mean_auc == doctest::Approx(1.0));
  CHECK(report.test_checksum_before == report.test_checksum_after);

  SUBCASE("same seed reproduces the report byte for byte") {
    const auto again = eval::run_tfcv(ds, options);
    CHECK(eval::cv_report_to_json(again, "x") == eval::cv_report_to_json(report, "x"));
  }
  SUBCASE("aggregation matches a manual recomputation") {
    double acc = 0.0;
    for (const auto& fr : cell.folds) acc += fr.acc;
    CHECK(cell.mean_acc == doctest::Approx(acc / 10.0));
  }
}

TEST_CASE("best case prefers accuracy, then balanced accuracy, then time") {
  const auto ds = separable_dataset(30, 21);
  eval::TfcvOptions options;
  options.c_grid = {0.1, 1.0};
  options.b_grid = {1, 2};
  options.seed = 6;
  options.threads = 2;
  const auto report = eval::run_tfcv(ds, options);
  REQUIRE(report.cells.size() == 4);
  const auto& best = report.cells[report.best_cell];
  for (const auto& cell : report.cells) {
    CHECK(best.mean_acc >= cell.mean_acc - 1e-12);
  }
  REQUIRE(report.best_per_b.size() == 2);
  for (std::size_t bi = 0; bi < 2; ++bi) {
    const auto& winner = report.cells[report.best_per_b[bi]];
    CHECK(winner.B == options.b_grid[bi]);
  }
}

TEST_CASE("plain margin fitter runs inside the harness") {
  const auto ds = separable_dataset(30, 31);
  eval::TfcvOptions options;
  options.c_grid = {1.0};
  options.b_grid = {2};
  options.fitter = eval::FitterKind::SvmL1;
  options.seed = 8;
  options.threads = 2;
  const auto report = eval::run_tfcv(ds, options);
  CHECK(report.cells[0].mean_acc == doctest::Approx(1.0));
}

TEST_CASE("exact-vs-heuristic comparison table") {
  std::mt19937_64 rng(41);
  data::Dataset ds;
  ds.instance = testsupport::random_instance(rng, 12, 4);
  ds.provenance = "synthetic";

  milp::SolveLimits limits;
  limits.time_limit = 60.0;
  const auto report = eval::validate_heuristic(ds, {0.01, 1.0}, 2, limits, {}, 3);
  REQUIRE(report.rows.size() == 2);
  double mean_pbs = 0.0;
  for (const auto& row : report.rows) {
    CHECK(row.exact_best > 0.0);
    CHECK(row.heuristic_best > 0.0);
    mean_pbs += row.pbs;
    // Tiny friction instances: the heuristic should match the exact method.
    CHECK(std::abs(row.pbs) <= 0.05);
  }
  CHECK(std::abs(mean_pbs / 2.0) <= 0.05);
  const std::string csv = eval::validation_to_csv(report, "synthetic");
  CHECK(csv.find("Data,C,t_e,GAP,t_h,%BS") == 0);
  const std::string json = eval::validation_to_json(report, "synthetic");
  CHECK(json.find("\"pbs\"") != std::string::npos);
}

TEST_CASE("csv table shape matches the report layout") {
  const auto ds = separable_dataset(30, 77);
  eval::TfcvOptions options;
  options.c_grid = {1.0};
  options.b_grid = {1};
  options.seed = 9;
  const auto report = eval::run_tfcv(ds, options);
  const std::string csv = eval::cv_report_to_csv(report, "ramp-fs");
  CHECK(csv.find("Form.,B,C,Time,Av. F,ACC,AUC") == 0);
  CHECK(csv.find("ramp-fs,1,1,") != std::string::npos);
  CHECK(csv.find("100.00%") != std::string::npos);
}

}  // TEST_SUITE
