#pragma once

#include <array>
#include <span>

#include "curvox/grid.hpp"
#include "curvox/tape.hpp"

namespace curvox {

enum class Connectivity { kFace6, kFull26 };

// Out-of-bounds neighbors contribute zero difference. kFixedDivisor keeps
// the 1/6 (or 1/26) constant literal everywhere; kInBoundsCount divides by
// the number of in-bounds neighbors instead (connectivity-study switch).
enum class BoundaryPolicy { kFixedDivisor, kInBoundsCount };

int neighbor_count(Connectivity c);
std::span<const std::array<int, 3>> neighbor_offsets(Connectivity c);

// Discrete Laplacian H(i,j,k) = (1/|N|) * sum over neighbors of
// (V_neighbor - V_center); proxies mean curvature on occupancy fields.
CurvatureField laplacian(const OccupancyGrid& grid, Connectivity c,
                         BoundaryPolicy policy = BoundaryPolicy::kFixedDivisor);

// Voxels with lo < V < hi (strict), the band where the empty-to-solid
// transition concentrates.
BoolGrid surface_mask(const OccupancyGrid& grid, double lo = 0.3, double hi = 0.7);
BoolGrid surface_mask(std::span<const double> values, int n, double lo = 0.3, double hi = 0.7);

// Central differences per axis in voxel units; one-sided at the boundary.
std::array<CurvatureField, 3> central_gradient(const ScalarGrid& grid);
CurvatureField gradient_magnitude(const ScalarGrid& grid);

// One-step dilation over the 26-neighborhood (Chebyshev distance <= 1).
BoolGrid dilate(const BoolGrid& mask);
BoolGrid occupied_mask(const OccupancyGrid& grid, double threshold = 0.5);

// ---- Differentiable variants on flat n^3 tensors ----------------------

ag::Tensor laplacian_t(const ag::Tensor& x, int n, Connectivity c,
                       BoundaryPolicy policy = BoundaryPolicy::kFixedDivisor);
// axis: 0 = i, 1 = j, 2 = k
ag::Tensor central_diff_t(const ag::Tensor& x, int n, int axis);

}  // namespace curvox
