#include "curvox/sensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace curvox {

namespace {

using Vec3 = std::array<double, 3>;

Vec3 sub3(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

Vec3 cross3(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double dot3(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

double norm3(const Vec3& a) { return std::sqrt(dot3(a, a)); }

Vec3 normalize3(const Vec3& a) {
  const double n = norm3(a);
  return {a[0] / n, a[1] / n, a[2] / n};
}

}  // namespace

void Camera::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw std::invalid_argument("camera focal lengths must be positive");
  }
  if (width < 1 || height < 1) {
    throw std::invalid_argument("camera image size must be positive");
  }
  if (norm3(sub3(look_at, position)) < 1e-12) {
    throw std::invalid_argument("camera look-at coincides with its position");
  }
}

std::array<std::array<double, 3>, 3> Camera::basis() const {
  validate();
  const Vec3 forward = normalize3(sub3(look_at, position));
  Vec3 right = cross3(forward, up);
  if (norm3(right) < 1e-9) {
    right = cross3(forward, Vec3{1.0, 0.0, 0.0});
  }
  right = normalize3(right);
  const Vec3 down = cross3(forward, right);
  return {right, down, forward};
}

int DepthMap::valid_count() const {
  int c = 0;
  for (auto v : valid) c += v != 0;
  return c;
}

namespace {

// Slab intersection of a ray with the axis-aligned volume [0, extent]^3.
bool ray_box(const Vec3& origin, const Vec3& dir, double extent, double* t0, double* t1) {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    const double o = origin[static_cast<std::size_t>(a)];
    const double d = dir[static_cast<std::size_t>(a)];
    if (std::fabs(d) < 1e-15) {
      if (o < 0.0 || o > extent) return false;
      continue;
    }
    double ta = (0.0 - o) / d;
    double tb = (extent - o) / d;
    if (ta > tb) std::swap(ta, tb);
    lo = std::max(lo, ta);
    hi = std::min(hi, tb);
  }
  if (hi <= lo) return false;
  *t0 = lo;
  *t1 = hi;
  return true;
}

}  // namespace

DepthMap render_depth(const OccupancyGrid& grid, const Camera& camera) {
  camera.validate();
  const auto basis = camera.basis();
  const int n = grid.n();
  const double extent = grid.extent();
  const double vs = grid.voxel_size();
  const double step = 0.25 * vs;

  DepthMap map;
  map.width = camera.width;
  map.height = camera.height;
  map.depth.assign(static_cast<std::size_t>(camera.width) * camera.height, 0.0);
  map.valid.assign(static_cast<std::size_t>(camera.width) * camera.height, 0);

  for (int v = 0; v < camera.height; ++v) {
    for (int u = 0; u < camera.width; ++u) {
      const double xc = (u + 0.5 - camera.cx) / camera.fx;
      const double yc = (v + 0.5 - camera.cy) / camera.fy;
      const double inv_norm = 1.0 / std::sqrt(xc * xc + yc * yc + 1.0);
      Vec3 dir;
      for (int a = 0; a < 3; ++a) {
        dir[static_cast<std::size_t>(a)] =
            (xc * basis[0][static_cast<std::size_t>(a)] + yc * basis[1][static_cast<std::size_t>(a)] +
             basis[2][static_cast<std::size_t>(a)]) *
            inv_norm;
      }
      double t0 = 0.0, t1 = 0.0;
      if (!ray_box(camera.position, dir, extent, &t0, &t1)) continue;
      t0 = std::max(t0, 0.0) + 1e-9;
      for (double t = t0; t <= t1; t += step) {
        const double px = camera.position[0] + t * dir[0];
        const double py = camera.position[1] + t * dir[1];
        const double pz = camera.position[2] + t * dir[2];
        const int i = static_cast<int>(std::floor(px / vs));
        const int j = static_cast<int>(std::floor(py / vs));
        const int k = static_cast<int>(std::floor(pz / vs));
        if (i < 0 || i >= n || j < 0 || j >= n || k < 0 || k >= n) continue;
        if (grid.at(i, j, k) > 0.5) {
          const std::size_t idx = static_cast<std::size_t>(v) * camera.width + u;
          map.depth[idx] = t * inv_norm;  // z-depth in the camera frame
          map.valid[idx] = 1;
          break;
        }
      }
    }
  }
  return map;
}

SparseDepthObservation sparsify(const DepthMap& map, const Camera& camera, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate <= 1.0)) {
    throw std::invalid_argument("sparsify: rate must be in [0,1]");
  }
  std::vector<int> valid_indices;
  for (int idx = 0; idx < static_cast<int>(map.valid.size()); ++idx) {
    if (map.valid[static_cast<std::size_t>(idx)]) valid_indices.push_back(idx);
  }
  const auto valid_count = static_cast<int>(valid_indices.size());
  const auto take = static_cast<int>(std::llround(rate * valid_count));

  // Partial Fisher-Yates: the first `take` entries are a uniform sample
  // without replacement.
  for (int i = 0; i < take; ++i) {
    const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(valid_count - i)));
    std::swap(valid_indices[static_cast<std::size_t>(i)], valid_indices[static_cast<std::size_t>(j)]);
  }
  valid_indices.resize(static_cast<std::size_t>(take));
  std::sort(valid_indices.begin(), valid_indices.end());

  SparseDepthObservation obs;
  obs.camera = camera;
  obs.total_pixels = map.width * map.height;
  obs.valid_pixels = valid_count;
  obs.samples.reserve(static_cast<std::size_t>(take));
  for (int idx : valid_indices) {
    DepthSample s;
    s.u = idx % map.width;
    s.v = idx / map.width;
    s.depth = map.depth[static_cast<std::size_t>(idx)];
    obs.samples.push_back(s);
  }
  return obs;
}

ObservationGrids voxelize_observation(const SparseDepthObservation& obs, int n, double extent) {
  const auto basis = obs.camera.basis();
  const double vs = extent / n;
  ObservationGrids out{OccupancyGrid(n, 0.0, extent), OccupancyGrid(n, 0.0, extent), 0};
  for (const auto& s : obs.samples) {
    if (s.u < 0 || s.u >= obs.camera.width || s.v < 0 || s.v >= obs.camera.height) {
      throw std::invalid_argument("observation sample outside image bounds");
    }
    if (!(s.depth > 0.0) || !std::isfinite(s.depth)) {
      ++out.dropped;
      continue;
    }
    const double xc = (s.u + 0.5 - obs.camera.cx) / obs.camera.fx * s.depth;
    const double yc = (s.v + 0.5 - obs.camera.cy) / obs.camera.fy * s.depth;
    const double zc = s.depth;
    double p[3];
    for (int a = 0; a < 3; ++a) {
      p[a] = obs.camera.position[static_cast<std::size_t>(a)] +
             xc * basis[0][static_cast<std::size_t>(a)] + yc * basis[1][static_cast<std::size_t>(a)] +
             zc * basis[2][static_cast<std::size_t>(a)];
    }
    const int i = static_cast<int>(std::floor(p[0] / vs));
    const int j = static_cast<int>(std::floor(p[1] / vs));
    const int k = static_cast<int>(std::floor(p[2] / vs));
    if (i < 0 || i >= n || j < 0 || j >= n || k < 0 || k >= n) {
      ++out.dropped;
      continue;
    }
    out.evidence.at(i, j, k) = 1.0;
    out.mask.at(i, j, k) = 1.0;
  }
  return out;
}

}  // namespace curvox
