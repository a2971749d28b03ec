#include <benchmark/benchmark.h>

#include "curvox/geometry.hpp"
#include "curvox/rng.hpp"

namespace {

curvox::OccupancyGrid random_grid(int n) {
  curvox::Rng rng(7);
  curvox::OccupancyGrid g(n);
  for (double& v : g.mutable_values()) v = rng.uniform01();
  return g;
}

void BM_Laplacian6(benchmark::State& state) {
  const auto g = random_grid(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(curvox::laplacian(g, curvox::Connectivity::kFace6));
  }
}
BENCHMARK(BM_Laplacian6)->Arg(16)->Arg(32);

void BM_Laplacian26(benchmark::State& state) {
  const auto g = random_grid(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(curvox::laplacian(g, curvox::Connectivity::kFull26));
  }
}
BENCHMARK(BM_Laplacian26)->Arg(16)->Arg(32);

void BM_GradientMagnitude(benchmark::State& state) {
  const auto g = random_grid(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(curvox::gradient_magnitude(g));
  }
}
BENCHMARK(BM_GradientMagnitude)->Arg(16)->Arg(32);

void BM_SurfaceMask(benchmark::State& state) {
  const auto g = random_grid(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(curvox::surface_mask(g));
  }
}
BENCHMARK(BM_SurfaceMask)->Arg(16)->Arg(32);

}  // namespace
