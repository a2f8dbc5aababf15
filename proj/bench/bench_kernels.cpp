// Serial versus OpenMP two-level kernel on a 1024-node grid.

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "rci/kernels.hpp"

namespace {

struct Workload {
  std::vector<rci::kernels::cplx> alpha, beta;
  std::vector<double> half_detuning;
  std::vector<rci::kernels::StepCoefficients> steps;
};

Workload make_workload(int nodes, int steps) {
  Workload w;
  w.alpha.assign(nodes, rci::kernels::cplx{1.0 / std::sqrt(nodes), 0.0});
  w.beta.assign(nodes, rci::kernels::cplx{0.0, 0.0});
  for (int j = 0; j < nodes; ++j) w.half_detuning.push_back(1e4 * (j - nodes / 2) / nodes);
  for (int s = 0; s < steps; ++s) {
    w.steps.push_back(rci::kernels::make_step(1e-7, 2e5 * std::sin(0.001 * s), 0.01 * s));
  }
  return w;
}

void BM_EvolveSerial(benchmark::State& state) {
  auto w = make_workload(static_cast<int>(state.range(0)), 2000);
  for (auto _ : state) {
    rci::kernels::evolve_serial(w.alpha, w.beta, w.half_detuning, w.steps);
    benchmark::DoNotOptimize(w.alpha.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 2000);
}

void BM_EvolveParallel(benchmark::State& state) {
  auto w = make_workload(static_cast<int>(state.range(0)), 2000);
  const int workers = static_cast<int>(state.range(1));
  for (auto _ : state) {
    rci::kernels::evolve_parallel(w.alpha, w.beta, w.half_detuning, w.steps, workers);
    benchmark::DoNotOptimize(w.alpha.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 2000);
}

}  // namespace

BENCHMARK(BM_EvolveSerial)->Arg(256)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EvolveParallel)
    ->ArgsProduct({{256, 1024, 4096}, {2, 4}})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

BENCHMARK_MAIN();
