#include "curvox/scene.hpp"

#include <algorithm>
#include <stdexcept>

namespace curvox {

void SceneSpec::validate() const {
  if (grid_n < 3 || extent <= 0.0) {
    throw std::invalid_argument("scene spec: grid_n >= 3 and extent > 0 required");
  }
  const double vs = extent / grid_n;
  for (const auto& s : spheres) {
    if (s.radius <= vs) {
      throw std::invalid_argument("sphere radius must exceed one voxel");
    }
    for (int a = 0; a < 3; ++a) {
      if (s.center[static_cast<std::size_t>(a)] + s.radius < 0.0 ||
          s.center[static_cast<std::size_t>(a)] - s.radius > extent) {
        throw std::invalid_argument("sphere does not intersect the volume");
      }
    }
  }
  for (const auto& b : boxes) {
    for (int a = 0; a < 3; ++a) {
      const double lo = b.min_corner[static_cast<std::size_t>(a)];
      const double ext = b.extents[static_cast<std::size_t>(a)];
      if (ext <= vs) {
        throw std::invalid_argument("box extent must exceed one voxel");
      }
      if (lo > extent || lo + ext < 0.0) {
        throw std::invalid_argument("box does not intersect the volume");
      }
    }
  }
}

OccupancyGrid generate_scene(const SceneSpec& spec) {
  spec.validate();
  const int n = spec.grid_n;
  const double vs = spec.extent / n;
  OccupancyGrid grid(n, 0.0, spec.extent);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const double x = (i + 0.5) * vs;
        const double y = (j + 0.5) * vs;
        const double z = (k + 0.5) * vs;
        bool occupied = false;
        for (const auto& s : spec.spheres) {
          const double dx = x - s.center[0];
          const double dy = y - s.center[1];
          const double dz = z - s.center[2];
          if (dx * dx + dy * dy + dz * dz <= s.radius * s.radius) {
            occupied = true;
            break;
          }
        }
        for (const auto& b : spec.boxes) {
          if (occupied) break;
          occupied = x >= b.min_corner[0] && x <= b.min_corner[0] + b.extents[0] &&
                     y >= b.min_corner[1] && y <= b.min_corner[1] + b.extents[1] &&
                     z >= b.min_corner[2] && z <= b.min_corner[2] + b.extents[2];
        }
        if (occupied) grid.at(i, j, k) = 1.0;
      }
    }
  }
  return grid;
}

SceneSpec random_scene_spec(const SceneRandomization& r, double extent, int grid_n, Rng& rng) {
  SceneSpec spec;
  spec.extent = extent;
  spec.grid_n = grid_n;
  // Primitive sizes must span more than one voxel at the requested grid.
  const double vs = extent / grid_n;
  const double min_radius = std::min(std::max(r.min_sphere_radius, 1.1 * vs), 0.45 * extent);
  const double max_radius = std::min(std::max(r.max_sphere_radius, min_radius), 0.49 * extent);
  const double min_extent = std::min(std::max(r.min_box_extent, 1.1 * vs), 0.9 * extent);
  const double max_extent = std::min(std::max(r.max_box_extent, min_extent), extent);
  const int count =
      r.min_primitives + static_cast<int>(rng.below(
                             static_cast<std::uint64_t>(r.max_primitives - r.min_primitives + 1)));
  for (int p = 0; p < count; ++p) {
    if (rng.uniform01() < 0.5) {
      Sphere s;
      s.radius = rng.uniform(min_radius, max_radius);
      for (int a = 0; a < 3; ++a) {
        s.center[static_cast<std::size_t>(a)] = rng.uniform(s.radius, extent - s.radius);
      }
      spec.spheres.push_back(s);
    } else {
      Box b;
      for (int a = 0; a < 3; ++a) {
        b.extents[static_cast<std::size_t>(a)] = rng.uniform(min_extent, max_extent);
        b.min_corner[static_cast<std::size_t>(a)] =
            rng.uniform(0.0, extent - b.extents[static_cast<std::size_t>(a)]);
      }
      spec.boxes.push_back(b);
    }
  }
  if (rng.uniform01() < r.floor_probability) {
    const double thickness = std::max(r.floor_thickness, 1.1 * vs);
    spec.boxes.push_back(Box{{0.0, 0.0, 0.0}, {extent, extent, thickness}});
  }
  return spec;
}

}  // namespace curvox
