#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "curvox/grid.hpp"
#include "curvox/rng.hpp"

namespace curvox {

// Pinhole camera. Image x (u) runs right, y (v) runs down; the camera
// frame has +z along the view direction. Depth values are z-depths in the
// camera frame, so back-projection p = depth * K^-1 (u+0.5, v+0.5, 1)
// reproduces the rendered point exactly.
struct Camera {
  double fx = 70.0;
  double fy = 70.0;
  double cx = 32.0;
  double cy = 32.0;
  int width = 64;
  int height = 64;
  std::array<double, 3> position{};
  std::array<double, 3> look_at{};
  std::array<double, 3> up{0.0, 0.0, 1.0};

  void validate() const;
  // Rows are the camera axes (x right, y down, z forward) in world frame.
  std::array<std::array<double, 3>, 3> basis() const;
};

struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> depth;
  std::vector<std::uint8_t> valid;

  int valid_count() const;
  bool all_invalid() const { return valid_count() == 0; }
};

// Marches each pixel ray through the volume at quarter-voxel steps; depth
// is the z-depth of the first sample inside an occupied voxel. Pixels whose
// rays never hit are invalid; a frustum that misses the volume entirely
// yields an all-invalid map.
DepthMap render_depth(const OccupancyGrid& grid, const Camera& camera);

struct DepthSample {
  int u = 0;
  int v = 0;
  double depth = 0.0;
};

struct SparseDepthObservation {
  std::vector<DepthSample> samples;
  Camera camera;
  int total_pixels = 0;
  int valid_pixels = 0;
};

// Exactly round(rate * valid_count) samples, uniform without replacement
// among the valid pixels. Returns them sorted by (v, u).
SparseDepthObservation sparsify(const DepthMap& map, const Camera& camera, double rate, Rng& rng);

struct ObservationGrids {
  OccupancyGrid evidence;
  OccupancyGrid mask;
  int dropped = 0;  // samples behind the camera or outside the volume
};

ObservationGrids voxelize_observation(const SparseDepthObservation& obs, int n,
                                      double extent = 3.0);

}  // namespace curvox
