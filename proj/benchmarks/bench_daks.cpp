#include <benchmark/benchmark.h>

#include <random>

#include "rampsvm/model/daks.hpp"

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
    inst.at(i, 1) = std::clamp(inst.at(i, 1) + 0.2 * inst.y[i], 0.0, 1.2);
  }
  return inst;
}

}  // namespace

static void BM_HeuristicFit(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto inst = make_instance(n, 15, 21);
  const model::HyperParams hp{1.0, 4};
  daks::DaksParams params;
  params.phase2_rounds = 1;
  params.algo1.max_iters = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(daks::run_daks(inst, hp, params));
  }
}
BENCHMARK(BM_HeuristicFit)->Arg(40)->Arg(80)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
