#include <benchmark/benchmark.h>

#include "bnslab/littlewood_paley.hpp"
#include "bnslab/random_fields.hpp"
#include "bnslab/spectral_ops.hpp"
#include "bnslab/stokes_picard.hpp"

using namespace bnslab;

namespace {

GridSpec grid_of(const benchmark::State& state) { return GridSpec(static_cast<int>(state.range(0)), 6.283185307179586); }

void BM_ToPhysicalVector(benchmark::State& state) {
  const auto u = random_field(grid_of(state), FieldKind::vector, 1);
  for (auto _ : state) benchmark::DoNotOptimize(u.to_physical());
}
BENCHMARK(BM_ToPhysicalVector)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Leray(benchmark::State& state) {
  const auto u = random_field(grid_of(state), FieldKind::vector, 2, {.leray = false});
  for (auto _ : state) benchmark::DoNotOptimize(leray_project(u));
}
BENCHMARK(BM_Leray)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_TensorProduct(benchmark::State& state) {
  const auto u = random_field(grid_of(state), FieldKind::vector, 3);
  for (auto _ : state) benchmark::DoNotOptimize(tensor_product(u, u));
}
BENCHMARK(BM_TensorProduct)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_BesovNorm(benchmark::State& state) {
  const auto u = random_field(grid_of(state), FieldKind::vector, 4);
  for (auto _ : state) benchmark::DoNotOptimize(besov_norm(u, BesovIndex::critical(6.0)));
}
BENCHMARK(BM_BesovNorm)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_HeatBesovNorm(benchmark::State& state) {
  const auto u = random_field(grid_of(state), FieldKind::vector, 5);
  for (auto _ : state) benchmark::DoNotOptimize(heat_besov_norm(u, -0.5, 6.0));
}
BENCHMARK(BM_HeatBesovNorm)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_BilinearB(benchmark::State& state) {
  const GridSpec g = grid_of(state);
  const auto P0 = heat_trajectory(random_field(g, FieldKind::vector, 6), TimeGrid(1.0, 6, 4));
  for (auto _ : state) benchmark::DoNotOptimize(bilinear_B(P0, P0));
  state.counters["nodes"] = static_cast<double>(P0.size());
}
BENCHMARK(BM_BilinearB)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
