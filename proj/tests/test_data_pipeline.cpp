#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "rampsvm/data/dataset.hpp"
#include "rampsvm/lp/simplex.hpp"
#include "rampsvm/model/formulations.hpp"

using namespace rampsvm;
using data::CsvOptions;
using data::Dataset;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << content;
  return path;
}

Dataset balanced_dataset(int n, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Dataset ds;
  ds.instance.n = n;
  ds.instance.d = d;
  ds.instance.x.resize(static_cast<std::size_t>(n) * d);
  for (auto& v : ds.instance.x) v = unit(rng);
  for (int i = 0; i < n; ++i) ds.instance.y.push_back(i % 2 == 0 ? 1 : -1);
  return ds;
}

}  // namespace

TEST_SUITE("data_pipeline") {

TEST_CASE("csv ingestion") {
  SUBCASE("plain numeric file") {
    const auto path = write_temp("rampsvm_t1.csv", "0.5,1.5,1\n0.25,2.5,-1\n0.75,3.5,1\n");
    const auto ds = data::load_csv(path.string());
    CHECK(ds.n() == 3);
    CHECK(ds.d() == 2);
    CHECK(ds.instance.y == std::vector<int>{1, -1, 1});
    CHECK(ds.instance.at(1, 1) == doctest::Approx(2.5));
  }
  SUBCASE("zero-one labels map to minus-plus") {
    const auto path = write_temp("rampsvm_t2.csv", "a,b,label\n1,2,0\n3,4,1\n");
    const auto ds = data::load_csv(path.string());
    CHECK(ds.instance.y == std::vector<int>{-1, 1});
    CHECK(ds.feature_names == std::vector<std::string>{"a", "b"});
  }
  SUBCASE("single class raises a label error") {
    const auto path = write_temp("rampsvm_t3.csv", "1,2,1\n3,4,1\n");
    CHECK_THROWS_AS(data::load_csv(path.string()), data::LabelError);
  }
  SUBCASE("parse errors carry their location") {
    const auto path = write_temp("rampsvm_t4.csv", "1,2,1\n3,oops,-1\n");
    try {
      data::load_csv(path.string());
      FAIL("expected a parse error");
    } catch (const data::ParseError& e) {
      CHECK(e.row == 2);
      CHECK(e.column == 2);
    }
  }
  SUBCASE("label column override") {
    CsvOptions opts;
    opts.label_column = 0;
    const auto path = write_temp("rampsvm_t5.csv", "1,0.5,0.6\n-1,0.7,0.8\n");
    const auto ds = data::load_csv(path.string(), opts);
    CHECK(ds.d() == 2);
    CHECK(ds.instance.y == std::vector<int>{1, -1});
  }
}

TEST_CASE("min-max scaling") {
  Dataset ds = balanced_dataset(4, 2, 1);
  ds.instance.x = {0.0, 5.0, 1.0, 5.0, 0.5, 5.0, 0.25, 5.0};  // feature 1 constant
  const auto params = data::fit_scaling(ds);
  const auto scaled = data::apply_scaling(ds, params);
  SUBCASE("unit range stays put, constants go to zero") {
    CHECK(scaled.instance.at(0, 0) == doctest::Approx(0.0));
    CHECK(scaled.instance.at(1, 0) == doctest::Approx(1.0));
    for (int i = 0; i < 4; ++i) CHECK(scaled.instance.at(i, 1) == doctest::Approx(0.0));
  }
  SUBCASE("out-of-range application passes through unclipped") {
    Dataset test = balanced_dataset(2, 2, 2);
    test.instance.x = {2.0, 7.0, -1.0, 3.0};
    const auto applied = data::apply_scaling(test, params);
    CHECK(applied.instance.at(0, 0) == doctest::Approx(2.0));
    CHECK(applied.instance.at(1, 0) == doctest::Approx(-1.0));
  }
}

TEST_CASE("stratified folds") {
  const auto ds = balanced_dataset(20, 2, 3);
  const auto plan = data::stratified_folds(ds, 42);
  REQUIRE(plan.folds.size() == 10);
  std::vector<int> seen(20, 0);
  for (const auto& fold : plan.folds) {
    CHECK(fold.size() == 2);
    int pos = 0;
    for (int i : fold) {
      ++seen[i];
      pos += ds.instance.y[i] == 1;
    }
    CHECK(pos == 1);  // one of each class per fold
  }
  for (int count : seen) CHECK(count == 1);

  const auto again = data::stratified_folds(ds, 42);
  CHECK(again.folds == plan.folds);
  const auto other = data::stratified_folds(ds, 43);
  CHECK(other.folds != plan.folds);
}

TEST_CASE("label noise injection") {
  const auto ds = balanced_dataset(100, 2, 4);
  SUBCASE("zero fraction is the identity") {
    const auto none = data::inject_label_noise(ds, 0.0, 9);
    CHECK(none.instance.y == ds.instance.y);
  }
  SUBCASE("five percent of one hundred flips exactly five") {
    const auto noisy = data::inject_label_noise(ds, 0.05, 9);
    int flips = 0;
    for (int i = 0; i < 100; ++i) flips += noisy.instance.y[i] != ds.instance.y[i];
    CHECK(flips == 5);
    CHECK(noisy.instance.x == ds.instance.x);  // features untouched
  }
  SUBCASE("same seed flips the same rows twice, restoring the labels") {
    const auto once = data::inject_label_noise(ds, 0.05, 9);
    const auto twice = data::inject_label_noise(once, 0.05, 9);
    CHECK(twice.instance.y == ds.instance.y);
  }
}

TEST_CASE("interior-point label flips") {
  SUBCASE("zero fraction is the identity") {
    const auto ds = balanced_dataset(10, 2, 5);
    const auto none = data::inject_svm_outliers(ds, 0.0, 1.0, 1);
    CHECK(none.instance.y == ds.instance.y);
  }
  SUBCASE("the most interior point of each class flips") {
    Dataset ds;
    ds.instance.n = 4;
    ds.instance.d = 1;
    ds.instance.x = {-2.0, -1.0, 1.0, 2.0};
    ds.instance.y = {-1, -1, 1, 1};
    const auto flipped = data::inject_svm_outliers(ds, 0.5, 1.0, 1);
    // Margin is largest for the deepest points x = -2 and x = 2.
    CHECK(flipped.instance.y == std::vector<int>{1, -1, 1, -1});
  }
  SUBCASE("flipped members dominate the margin of surviving classmates") {
    const auto ds = balanced_dataset(30, 3, 6);
    const double fraction = 0.2;
    const auto flipped = data::inject_svm_outliers(ds, fraction, 1.0, 1);
    // Recompute the reference margins the same way the injector does.
    auto built = model::build_svm_l1(ds.instance, 1.0);
    lp::SimplexSolver solver;
    const auto sol = solver.solve(built.lp);
    REQUIRE(sol.optimal());
    for (int cls : {1, -1}) {
      double worst_flipped = 1e30;
      double best_kept = -1e30;
      for (int i = 0; i < ds.n(); ++i) {
        if (ds.instance.y[i] != cls) continue;
        double dot = sol.primal[built.map.b];
        for (int k = 0; k < ds.d(); ++k) {
          dot += sol.primal[built.map.w[k]] * ds.instance.at(i, k);
        }
        const double margin = cls * dot;
        if (flipped.instance.y[i] != cls) {
          worst_flipped = std::min(worst_flipped, margin);
        } else {
          best_kept = std::max(best_kept, margin);
        }
      }
      CHECK(worst_flipped >= best_kept - 1e-9);
    }
  }
}

TEST_CASE("budget grid arithmetic") {
  CHECK(data::budget_grid_values(34) == std::vector<int>{34, 23, 17, 11, 7});
  CHECK(data::budget_grid_values(29) == std::vector<int>{29, 19, 15, 10, 6});
  CHECK(data::budget_grid_values(1) == std::vector<int>{1});
  CHECK(data::budget_grid_values(57) == std::vector<int>{57, 38, 29, 19, 11});
  CHECK(data::budget_grid_values(33) == std::vector<int>{33, 22, 17, 11, 7});
  CHECK(data::budget_grid_values(48) == std::vector<int>{48, 32, 24, 16, 10});
  CHECK(data::budget_grid_values(44) == std::vector<int>{44, 29, 22, 15, 9});
}

TEST_CASE("budget grid protocol averages the sampled fits") {
  const auto ds = balanced_dataset(30, 6, 8);
  // Stub fitter: always reports four selected features, so the averages and
  // the largest budget are exactly four.
  data::BudgetFitter fitter = [](const model::SvmInstance& inst,
                                 const model::HyperParams&) {
    model::ClassifierSolution sol;
    sol.w_plus.assign(inst.d, 0.0);
    sol.w_minus.assign(inst.d, 0.0);
    sol.xi.assign(inst.n, 0.0);
    sol.z.assign(inst.n, 0);
    sol.v.assign(inst.d, 0);
    for (int k = 0; k < 4; ++k) sol.v[k] = 1;
    return sol;
  };
  const auto grid = data::budget_grid(ds, {0.1, 1.0}, 3, fitter);
  CHECK(grid == data::budget_grid_values(4));
}

}  // TEST_SUITE
