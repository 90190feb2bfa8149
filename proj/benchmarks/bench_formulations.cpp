#include <benchmark/benchmark.h>

#include <random>

#include "rampsvm/model/bigm.hpp"
#include "rampsvm/model/formulations.hpp"

using namespace rampsvm;

namespace {

model::SvmInstance make_instance(int n, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  model::SvmInstance inst;
  inst.n = n;
  inst.d = d;
  inst.x.resize(static_cast<std::size_t>(n) * d);
  for (auto& v : inst.x) v = unit(rng);
  for (int i = 0; i < n; ++i) {
    inst.y.push_back(i % 2 == 0 ? 1 : -1);
    inst.at(i, 0) = std::clamp(inst.at(i, 0) + 0.3 * inst.y[i], 0.0, 1.3);
  }
  return inst;
}

}  // namespace

static void BM_BuildFullModel(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto inst = make_instance(n, 30, 3);
  const model::HyperParams hp{1.0, 6};
  auto bounds = bigm::init_bounds(inst, 10.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model::build_rlfs(inst, hp, bounds));
  }
}
BENCHMARK(BM_BuildFullModel)->Arg(64)->Arg(256)->Arg(512);

static void BM_InitialSolution(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto inst = make_instance(n, 30, 5);
  const model::HyperParams hp{1.0, 6};
  for (auto _ : state) {
    lp::SimplexSolver solver;
    benchmark::DoNotOptimize(bigm::initial_solution(inst, hp, solver));
  }
}
BENCHMARK(BM_InitialSolution)->Arg(64)->Arg(128)->Arg(256);

static void BM_TightenLoop(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto inst = make_instance(n, 20, 9);
  const model::HyperParams hp{1.0, 5};
  bigm::Algorithm1Options opts;
  opts.max_iters = 1;
  opts.variant = 2;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bigm::run_algorithm1(inst, hp, opts));
  }
}
BENCHMARK(BM_TightenLoop)->Arg(64)->Arg(128);
