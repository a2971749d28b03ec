#include "curvox/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace curvox {

namespace {

constexpr std::array<std::array<int, 3>, 6> kFaceOffsets = {{
    {{1, 0, 0}}, {{-1, 0, 0}}, {{0, 1, 0}}, {{0, -1, 0}}, {{0, 0, 1}}, {{0, 0, -1}},
}};

std::array<std::array<int, 3>, 26> make_full_offsets() {
  std::array<std::array<int, 3>, 26> out{};
  int idx = 0;
  for (int di = -1; di <= 1; ++di) {
    for (int dj = -1; dj <= 1; ++dj) {
      for (int dk = -1; dk <= 1; ++dk) {
        if (di == 0 && dj == 0 && dk == 0) continue;
        out[static_cast<std::size_t>(idx++)] = {di, dj, dk};
      }
    }
  }
  return out;
}

const std::array<std::array<int, 3>, 26> kFullOffsets = make_full_offsets();

inline bool in_bounds(int i, int j, int k, int n) {
  return i >= 0 && i < n && j >= 0 && j < n && k >= 0 && k < n;
}

}  // namespace

int neighbor_count(Connectivity c) { return c == Connectivity::kFace6 ? 6 : 26; }

std::span<const std::array<int, 3>> neighbor_offsets(Connectivity c) {
  if (c == Connectivity::kFace6) {
    return {kFaceOffsets.data(), kFaceOffsets.size()};
  }
  return {kFullOffsets.data(), kFullOffsets.size()};
}

namespace {

// Shared stencil core for the plain and differentiable Laplacians.
void laplacian_forward(std::span<const double> v, int n, Connectivity c, BoundaryPolicy policy,
                       double* out) {
  const auto offsets = neighbor_offsets(c);
  const int fixed_div = neighbor_count(c);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const int center = (i * n + j) * n + k;
        double acc = 0.0;
        int in_count = 0;
        for (const auto& d : offsets) {
          const int ii = i + d[0], jj = j + d[1], kk = k + d[2];
          if (!in_bounds(ii, jj, kk, n)) continue;
          acc += v[static_cast<std::size_t>((ii * n + jj) * n + kk)] -
                 v[static_cast<std::size_t>(center)];
          ++in_count;
        }
        const int div = policy == BoundaryPolicy::kFixedDivisor ? fixed_div
                                                                : (in_count > 0 ? in_count : 1);
        out[center] = acc / div;
      }
    }
  }
}

}  // namespace

CurvatureField laplacian(const OccupancyGrid& grid, Connectivity c, BoundaryPolicy policy) {
  const int n = grid.n();
  CurvatureField out(n);
  laplacian_forward(grid.values(), n, c, policy, out.mutable_values().data());
  return out;
}

BoolGrid surface_mask(std::span<const double> values, int n, double lo, double hi) {
  if (!(lo >= 0.0 && lo < hi && hi <= 1.0)) {
    throw std::invalid_argument("surface band requires 0 <= lo < hi <= 1");
  }
  BoolGrid mask(n);
  for (int idx = 0; idx < n * n * n; ++idx) {
    const double v = values[static_cast<std::size_t>(idx)];
    mask.set_flat(idx, v > lo && v < hi);
  }
  return mask;
}

BoolGrid surface_mask(const OccupancyGrid& grid, double lo, double hi) {
  return surface_mask(grid.values(), grid.n(), lo, hi);
}

namespace {

// Central difference along one axis; one-sided at the two boundary planes.
// `pos` is the coordinate along the axis, `step` the flat stride.
inline double axis_diff(std::span<const double> v, int center, int pos, int n, int step) {
  if (pos == 0) return v[static_cast<std::size_t>(center + step)] - v[static_cast<std::size_t>(center)];
  if (pos == n - 1) return v[static_cast<std::size_t>(center)] - v[static_cast<std::size_t>(center - step)];
  return 0.5 * (v[static_cast<std::size_t>(center + step)] - v[static_cast<std::size_t>(center - step)]);
}

}  // namespace

std::array<CurvatureField, 3> central_gradient(const ScalarGrid& grid) {
  const int n = grid.n();
  if (n < 3) {
    throw std::invalid_argument("central_gradient requires n >= 3");
  }
  std::array<CurvatureField, 3> out = {CurvatureField(n), CurvatureField(n), CurvatureField(n)};
  const auto v = grid.values();
  const int strides[3] = {n * n, n, 1};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const int center = (i * n + j) * n + k;
        const int pos[3] = {i, j, k};
        for (int a = 0; a < 3; ++a) {
          out[static_cast<std::size_t>(a)].mutable_values()[static_cast<std::size_t>(center)] =
              axis_diff(v, center, pos[a], n, strides[a]);
        }
      }
    }
  }
  return out;
}

CurvatureField gradient_magnitude(const ScalarGrid& grid) {
  const auto g = central_gradient(grid);
  const int n = grid.n();
  CurvatureField out(n);
  for (int idx = 0; idx < n * n * n; ++idx) {
    const double gx = g[0].values()[static_cast<std::size_t>(idx)];
    const double gy = g[1].values()[static_cast<std::size_t>(idx)];
    const double gz = g[2].values()[static_cast<std::size_t>(idx)];
    out.mutable_values()[static_cast<std::size_t>(idx)] = std::sqrt(gx * gx + gy * gy + gz * gz);
  }
  return out;
}

BoolGrid dilate(const BoolGrid& mask) {
  const int n = mask.n();
  BoolGrid out(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        bool any = mask.get(i, j, k);
        for (const auto& d : kFullOffsets) {
          if (any) break;
          const int ii = i + d[0], jj = j + d[1], kk = k + d[2];
          if (in_bounds(ii, jj, kk, n) && mask.get(ii, jj, kk)) any = true;
        }
        out.set(i, j, k, any);
      }
    }
  }
  return out;
}

BoolGrid occupied_mask(const OccupancyGrid& grid, double threshold) {
  const int n = grid.n();
  BoolGrid out(n);
  for (int idx = 0; idx < n * n * n; ++idx) {
    out.set_flat(idx, grid.values()[static_cast<std::size_t>(idx)] > threshold);
  }
  return out;
}

// ---- Differentiable stencils ------------------------------------------

ag::Tensor laplacian_t(const ag::Tensor& x, int n, Connectivity c, BoundaryPolicy policy) {
  if (x.size() != n * n * n) {
    throw std::invalid_argument("laplacian_t: tensor size " + std::to_string(x.size()) +
                                " is not n^3 for n=" + std::to_string(n));
  }
  std::vector<double> out(static_cast<std::size_t>(n) * n * n);
  laplacian_forward(x.values(), n, c, policy, out.data());
  if (!x.attached()) {
    return ag::Tensor(x.shape(), std::move(out));
  }
  // Linear stencil: backward mirrors the forward neighbor enumeration.
  return x.tape()->record("laplacian", {x}, x.shape(), std::move(out),
                          [n, c, policy](ag::OpGrads& g) {
                            auto gi = g.grad_in(0);
                            if (gi.empty()) return;
                            auto go = g.grad_out();
                            const auto offsets = neighbor_offsets(c);
                            const int fixed_div = neighbor_count(c);
                            for (int i = 0; i < n; ++i) {
                              for (int j = 0; j < n; ++j) {
                                for (int k = 0; k < n; ++k) {
                                  const int center = (i * n + j) * n + k;
                                  int in_count = 0;
                                  for (const auto& d : offsets) {
                                    if (in_bounds(i + d[0], j + d[1], k + d[2], n)) ++in_count;
                                  }
                                  const int div = policy == BoundaryPolicy::kFixedDivisor
                                                      ? fixed_div
                                                      : (in_count > 0 ? in_count : 1);
                                  const double gc = go[static_cast<std::size_t>(center)] / div;
                                  if (gc == 0.0) continue;
                                  for (const auto& d : offsets) {
                                    const int ii = i + d[0], jj = j + d[1], kk = k + d[2];
                                    if (!in_bounds(ii, jj, kk, n)) continue;
                                    gi[static_cast<std::size_t>((ii * n + jj) * n + kk)] += gc;
                                    gi[static_cast<std::size_t>(center)] -= gc;
                                  }
                                }
                              }
                            }
                          });
}

ag::Tensor central_diff_t(const ag::Tensor& x, int n, int axis) {
  if (x.size() != n * n * n) {
    throw std::invalid_argument("central_diff_t: tensor size " + std::to_string(x.size()) +
                                " is not n^3 for n=" + std::to_string(n));
  }
  if (axis < 0 || axis > 2) {
    throw std::invalid_argument("central_diff_t: axis must be 0, 1 or 2");
  }
  if (n < 3) {
    throw std::invalid_argument("central_diff_t requires n >= 3");
  }
  const int strides[3] = {n * n, n, 1};
  const int step = strides[axis];
  const auto v = x.values();
  std::vector<double> out(static_cast<std::size_t>(n) * n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const int center = (i * n + j) * n + k;
        const int pos[3] = {i, j, k};
        out[static_cast<std::size_t>(center)] = axis_diff(v, center, pos[axis], n, step);
      }
    }
  }
  if (!x.attached()) {
    return ag::Tensor(x.shape(), std::move(out));
  }
  return x.tape()->record("central_diff", {x}, x.shape(), std::move(out),
                          [n, axis, step](ag::OpGrads& g) {
                            auto gi = g.grad_in(0);
                            if (gi.empty()) return;
                            auto go = g.grad_out();
                            for (int i = 0; i < n; ++i) {
                              for (int j = 0; j < n; ++j) {
                                for (int k = 0; k < n; ++k) {
                                  const int center = (i * n + j) * n + k;
                                  const int pos[3] = {i, j, k};
                                  const double gc = go[static_cast<std::size_t>(center)];
                                  if (gc == 0.0) continue;
                                  const int p = pos[axis];
                                  if (p == 0) {
                                    gi[static_cast<std::size_t>(center + step)] += gc;
                                    gi[static_cast<std::size_t>(center)] -= gc;
                                  } else if (p == n - 1) {
                                    gi[static_cast<std::size_t>(center)] += gc;
                                    gi[static_cast<std::size_t>(center - step)] -= gc;
                                  } else {
                                    gi[static_cast<std::size_t>(center + step)] += 0.5 * gc;
                                    gi[static_cast<std::size_t>(center - step)] -= 0.5 * gc;
                                  }
                                }
                              }
                            }
                          });
}

}  // namespace curvox
