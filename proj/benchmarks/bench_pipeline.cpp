#include <benchmark/benchmark.h>

#include "curvox/scene.hpp"
#include "curvox/sensor.hpp"

namespace {

using namespace curvox;

void BM_RenderDepth(benchmark::State& state) {
  Rng rng(21);
  const SceneSpec spec = random_scene_spec(SceneRandomization{}, 3.0, 16, rng);
  const OccupancyGrid grid = generate_scene(spec);
  Camera cam;
  cam.position = {1.5, 1.5, -1.2};
  cam.look_at = {1.5, 1.5, 1.5};
  for (auto _ : state) {
    benchmark::DoNotOptimize(render_depth(grid, cam));
  }
}
BENCHMARK(BM_RenderDepth)->Unit(benchmark::kMillisecond);

void BM_VoxelizeObservation(benchmark::State& state) {
  Rng rng(22);
  const SceneSpec spec = random_scene_spec(SceneRandomization{}, 3.0, 16, rng);
  const OccupancyGrid grid = generate_scene(spec);
  Camera cam;
  cam.position = {1.5, 1.5, -1.2};
  cam.look_at = {1.5, 1.5, 1.5};
  const DepthMap map = render_depth(grid, cam);
  const SparseDepthObservation obs = sparsify(map, cam, 0.05, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(voxelize_observation(obs, 16));
  }
}
BENCHMARK(BM_VoxelizeObservation);

}  // namespace
