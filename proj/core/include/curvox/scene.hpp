#pragma once

#include <array>
#include <vector>

#include "curvox/grid.hpp"
#include "curvox/rng.hpp"

namespace curvox {

struct Sphere {
  std::array<double, 3> center;  // meters
  double radius;                 // meters
};

struct Box {
  std::array<double, 3> min_corner;
  std::array<double, 3> extents;
};

struct SceneSpec {
  std::vector<Sphere> spheres;
  std::vector<Box> boxes;
  double extent = 3.0;  // cubic volume side, meters
  int grid_n = 16;

  // Primitives must intersect the volume and span more than one voxel.
  void validate() const;
};

// Binary ground truth: a voxel is occupied iff its center lies inside any
// primitive.
OccupancyGrid generate_scene(const SceneSpec& spec);

// Knobs for the procedural scenes that replace real captures.
struct SceneRandomization {
  int min_primitives = 2;
  int max_primitives = 4;
  double min_sphere_radius = 0.35;
  double max_sphere_radius = 0.8;
  double min_box_extent = 0.5;
  double max_box_extent = 1.2;
  double floor_probability = 0.35;
  double floor_thickness = 0.35;
};

SceneSpec random_scene_spec(const SceneRandomization& r, double extent, int grid_n, Rng& rng);

}  // namespace curvox
