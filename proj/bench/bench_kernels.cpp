// Serial reference vs OpenMP path for the frequency-grid and sweep kernels.
#include <benchmark/benchmark.h>

#include "mirrornoise/mna.hpp"
#include "mirrornoise/optimize.hpp"
#include "mirrornoise/sweep.hpp"
#include "mirrornoise/topologies.hpp"

using namespace mirrornoise;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(0) ? Exec::Parallel : Exec::Serial; }

void label(benchmark::State& state) { state.SetLabel(state.range(0) ? "parallel" : "serial"); }

void BM_FullIaNoise(benchmark::State& state) {
  const Circuit c = build_full_ia({});
  const auto grid = log_grid(1.0, 1e7, 201);
  for (auto _ : state) benchmark::DoNotOptimize(noise_at_output(c, grid, {}, {}, exec_of(state)));
  label(state);
}

void BM_FullIaAc(benchmark::State& state) {
  const Circuit c = build_full_ia({});
  const auto grid = log_grid(1.0, 1e7, 401);
  for (auto _ : state) benchmark::DoNotOptimize(solve_ac(c, "VIN", "vod", grid, {}, exec_of(state)));
  label(state);
}

void BM_TcHalfSweep(benchmark::State& state) {
  SweepSpec s;
  s.topology = "tc_half";
  s.variable = "r_de";
  for (int i = 0; i < 48; ++i) s.values.push_back(1e3 + 2e3 * i);
  s.observables = {"output_noise_psd", "input_referred_noise", "zin", "loop_gain"};
  for (auto _ : state) benchmark::DoNotOptimize(run_sweep(s, exec_of(state)));
  label(state);
}

void BM_MirrorOptimize(benchmark::State& state) {
  DesignSpec s;
  for (int i = 1; i <= 20; ++i) s.w3.push_back(1e-6 * i);
  for (int i = 1; i <= 8; ++i) s.l3.push_back(0.25e-6 * i);
  for (int i = 0; i <= 20; ++i) s.r_de.push_back(5e3 * i);
  for (auto _ : state) benchmark::DoNotOptimize(optimize(s, exec_of(state)));
  label(state);
}

}  // namespace

BENCHMARK(BM_FullIaNoise)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_FullIaAc)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_TcHalfSweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_MirrorOptimize)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
