// Serial reference vs OpenMP kernel for the fused Monte Carlo VACF estimator.

#include "gkdiff/models.hpp"
#include "gkdiff/montecarlo.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace gkdiff;

LinearGaussianModel bench_model(int which) {
  switch (which) {
    case 0: return build_ou(1.0, 1.0);
    case 1: return build_magnetic(2.0, 1.0, 1.0);
    default: return build_gle({1.0, 1.0}, {1.0, 2.0}, 1.0);
  }
}

void run_vacf(benchmark::State& state, Execution execution) {
  const LinearGaussianModel model = bench_model(static_cast<int>(state.range(0)));
  McControls controls = default_mc_controls(model);
  controls.sim.n_paths = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) {
    VacfEstimate est = simulate_vacf(model, controls.sim, controls.max_lag, execution);
    benchmark::DoNotOptimize(est.mean);
  }
  state.SetItemsProcessed(state.iterations() * state.range(1));
}

void BM_VacfSerial(benchmark::State& state) { run_vacf(state, Execution::serial); }
void BM_VacfParallel(benchmark::State& state) { run_vacf(state, Execution::parallel); }

}  // namespace

BENCHMARK(BM_VacfSerial)->ArgsProduct({{0, 1, 2}, {1000, 10000}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_VacfParallel)->ArgsProduct({{0, 1, 2}, {1000, 10000}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
