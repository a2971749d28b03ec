#pragma once

// Independent reference implementations used to cross-check the library.
// These are deliberately written as plain triple loops over explicit
// neighbor enumerations, sharing no code with the implementations they
// verify.

#include <cmath>
#include <cstdlib>
#include <vector>

#include "curvox/grid.hpp"

namespace oracle {

// Brute-force discrete Laplacian. `full` selects the 26-neighborhood;
// `renormalize` divides by the in-bounds neighbor count instead of the
// fixed 6/26.
inline std::vector<double> laplacian(const std::vector<double>& v, int n, bool full,
                                     bool renormalize = false) {
  std::vector<double> out(v.size(), 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        double acc = 0.0;
        int in_count = 0;
        for (int di = -1; di <= 1; ++di) {
          for (int dj = -1; dj <= 1; ++dj) {
            for (int dk = -1; dk <= 1; ++dk) {
              if (di == 0 && dj == 0 && dk == 0) continue;
              const int manhattan = std::abs(di) + std::abs(dj) + std::abs(dk);
              if (!full && manhattan != 1) continue;
              const int ii = i + di, jj = j + dj, kk = k + dk;
              if (ii < 0 || ii >= n || jj < 0 || jj >= n || kk < 0 || kk >= n) continue;
              acc += v[static_cast<std::size_t>((ii * n + jj) * n + kk)] -
                     v[static_cast<std::size_t>((i * n + j) * n + k)];
              ++in_count;
            }
          }
        }
        const int divisor = renormalize ? (in_count > 0 ? in_count : 1) : (full ? 26 : 6);
        out[static_cast<std::size_t>((i * n + j) * n + k)] = acc / divisor;
      }
    }
  }
  return out;
}

// Central differences, one-sided at the boundary, per axis.
inline std::vector<double> central_gradient_axis(const std::vector<double>& v, int n, int axis) {
  std::vector<double> out(v.size(), 0.0);
  auto value = [&](int i, int j, int k) {
    return v[static_cast<std::size_t>((i * n + j) * n + k)];
  };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        int c[3] = {i, j, k};
        const int p = c[axis];
        double d = 0.0;
        if (p == 0) {
          int hi[3] = {i, j, k};
          hi[axis] = 1;
          d = value(hi[0], hi[1], hi[2]) - value(i, j, k);
        } else if (p == n - 1) {
          int lo[3] = {i, j, k};
          lo[axis] = n - 2;
          d = value(i, j, k) - value(lo[0], lo[1], lo[2]);
        } else {
          int hi[3] = {i, j, k};
          int lo[3] = {i, j, k};
          hi[axis] = p + 1;
          lo[axis] = p - 1;
          d = 0.5 * (value(hi[0], hi[1], hi[2]) - value(lo[0], lo[1], lo[2]));
        }
        out[static_cast<std::size_t>((i * n + j) * n + k)] = d;
      }
    }
  }
  return out;
}

inline std::vector<double> gradient_magnitude(const std::vector<double>& v, int n) {
  const auto gx = central_gradient_axis(v, n, 0);
  const auto gy = central_gradient_axis(v, n, 1);
  const auto gz = central_gradient_axis(v, n, 2);
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::sqrt(gx[i] * gx[i] + gy[i] * gy[i] + gz[i] * gz[i]);
  }
  return out;
}

// Mean binary cross-entropy with the same clamp the implementation uses.
inline double bce(const std::vector<double>& pred, const std::vector<double>& gt) {
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    double p = pred[i];
    if (p < 1e-7) p = 1e-7;
    if (p > 1.0 - 1e-7) p = 1.0 - 1e-7;
    acc += -(gt[i] * std::log(p) + (1.0 - gt[i]) * std::log(1.0 - p));
  }
  return acc / static_cast<double>(pred.size());
}

inline double kl_gaussian(const std::vector<double>& mu, const std::vector<double>& logvar) {
  double acc = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    acc += 1.0 + logvar[i] - mu[i] * mu[i] - std::exp(logvar[i]);
  }
  return -0.5 * acc;
}

// Masked mean squared error over the strict (lo, hi) band of `band_source`.
inline double masked_curvature_mse(const std::vector<double>& c, const std::vector<double>& h,
                                   const std::vector<double>& band_source, double lo, double hi) {
  double acc = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (band_source[i] > lo && band_source[i] < hi) {
      const double d = c[i] - h[i];
      acc += d * d;
      ++count;
    }
  }
  return count == 0 ? 0.0 : acc / count;
}

// Per-voxel normal consistency: mean of (1 - cos) over the gt band where
// both gradient norms reach 1e-8.
inline double normal_consistency(const std::vector<double>& pred, const std::vector<double>& gt,
                                 int n, double lo = 0.3, double hi = 0.7) {
  const auto px = central_gradient_axis(pred, n, 0);
  const auto py = central_gradient_axis(pred, n, 1);
  const auto pz = central_gradient_axis(pred, n, 2);
  const auto gx = central_gradient_axis(gt, n, 0);
  const auto gy = central_gradient_axis(gt, n, 1);
  const auto gz = central_gradient_axis(gt, n, 2);
  double acc = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!(gt[i] > lo && gt[i] < hi)) continue;
    const double np = std::sqrt(px[i] * px[i] + py[i] * py[i] + pz[i] * pz[i]);
    const double ng = std::sqrt(gx[i] * gx[i] + gy[i] * gy[i] + gz[i] * gz[i]);
    if (np < 1e-8 || ng < 1e-8) continue;
    const double cosine = (px[i] * gx[i] + py[i] * gy[i] + pz[i] * gz[i]) / (np * ng);
    acc += 1.0 - cosine;
    ++count;
  }
  return count == 0 ? 0.0 : acc / count;
}

inline double edge_preservation(const std::vector<double>& pred, const std::vector<double>& gt,
                                int n) {
  const auto mp = gradient_magnitude(pred, n);
  const auto mg = gradient_magnitude(gt, n);
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    acc += std::fabs(mp[i] - mg[i]);
  }
  return acc / static_cast<double>(pred.size());
}

inline double l2_norm(const std::vector<std::vector<double>>& grads) {
  double sq = 0.0;
  for (const auto& g : grads) {
    for (double v : g) sq += v * v;
  }
  return std::sqrt(sq);
}

// Student-t two-sided p closed forms for small df.
inline double t_two_sided_p_df1(double t) {
  return 1.0 - (2.0 / 3.14159265358979323846) * std::atan(std::fabs(t));
}

inline double t_two_sided_p_df2(double t) {
  const double a = std::fabs(t);
  return 1.0 - a / std::sqrt(2.0 + a * a);
}

}  // namespace oracle
