// Serial reference vs OpenMP kernels.

#include <benchmark/benchmark.h>

#include "sburgers/controlled.hpp"
#include "sburgers/spde_sim.hpp"
#include "sburgers/suites.hpp"

using namespace sburgers;

namespace {

Exec exec_of(const benchmark::State& s) { return s.range(1) ? Exec::parallel : Exec::serial; }

void label(benchmark::State& s) { s.SetLabel(s.range(1) ? "parallel" : "serial"); }

GeneratorParams params(int m) {
  GeneratorParams p;
  p.m = m;
  return p;
}

void BM_apply_G(benchmark::State& state) {
  const int M = static_cast<int>(state.range(0));
  auto b = FockBasis::full({M, 3, 1});
  RngStream rng(1, "bench");
  FockVector phi = random_real_vector(b, rng, 0, 3);
  const auto p = params(M);
  for (auto _ : state) benchmark::DoNotOptimize(apply_G(phi, p, exec_of(state)));
  state.counters["basis"] = static_cast<double>(b->size());
  label(state);
}
BENCHMARK(BM_apply_G)->ArgsProduct({{8, 16}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_generator_assembly(benchmark::State& state) {
  const int M = static_cast<int>(state.range(0));
  auto b = FockBasis::full({M, 3, 1});
  for (auto _ : state) benchmark::DoNotOptimize(Generator(b, params(M), exec_of(state)));
  label(state);
}
BENCHMARK(BM_generator_assembly)->ArgsProduct({{8, 16}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_ensemble(benchmark::State& state) {
  SimConfig c;
  c.dt = 1e-4;
  c.T = 0.01;
  const auto p = params(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_batch(p, c, 64, 3, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * 64);
  label(state);
}
BENCHMARK(BM_ensemble)->ArgsProduct({{8, 16}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_hypercontractivity(benchmark::State& state) {
  auto b = FockBasis::full({4, 2, 1});
  RngStream rng(2, "bench");
  FockVector phi = random_real_vector(b, rng, 2, 2);
  for (auto _ : state) benchmark::DoNotOptimize(hypercontractivity_check(phi, 4.0, 20000, 5, exec_of(state)));
  label(state);
}
BENCHMARK(BM_hypercontractivity)->ArgsProduct({{0}, {0, 1}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
