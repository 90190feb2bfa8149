#include <benchmark/benchmark.h>

#include <random>

#include "rampsvm/lp/simplex.hpp"

using namespace rampsvm::lp;

namespace {

// Dense-ish random LP around a known feasible point, same flavour as the
// LPs the trainer solves but without model structure.
LinearProgram make_lp(int vars, int rows, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coeff(-2.0, 2.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  LinearProgram lp;
  std::vector<double> point(vars);
  for (int j = 0; j < vars; ++j) {
    point[j] = coeff(rng);
    lp.add_variable(point[j] - 2.0, point[j] + 2.0, coeff(rng));
  }
  for (int r = 0; r < rows; ++r) {
    std::vector<std::pair<int, double>> terms;
    double lhs = 0.0;
    for (int j = 0; j < vars; ++j) {
      if (unit(rng) < 0.3) {
        const double a = coeff(rng);
        terms.emplace_back(j, a);
        lhs += a * point[j];
      }
    }
    if (terms.empty()) continue;
    lp.add_row(std::move(terms), unit(rng) < 0.5 ? RowSense::LessEqual : RowSense::GreaterEqual,
               lhs + (unit(rng) - 0.4));
  }
  return lp;
}

}  // namespace

static void BM_SimplexSolve(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const auto lp = make_lp(size, size, 7);
  SimplexSolver solver;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solver.solve(lp));
  }
  state.SetComplexityN(size);
}
BENCHMARK(BM_SimplexSolve)->Arg(32)->Arg(64)->Arg(128)->Arg(256)->Complexity();

static void BM_SimplexWarmStart(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  auto lp = make_lp(size, size, 11);
  SimplexSolver solver;
  const auto cold = solver.solve(lp);
  lp.upper[0] -= 0.05;  // small bound change, typical of a tree node
  for (auto _ : state) {
    benchmark::DoNotOptimize(solver.solve(lp, cold.basis));
  }
}
BENCHMARK(BM_SimplexWarmStart)->Arg(64)->Arg(256);
