#pragma once

#include <string>

#include "curvox/geometry.hpp"
#include "curvox/grid.hpp"
#include "curvox/tape.hpp"

namespace curvox {

enum class CurvatureOperator { kLaplacian6, kLaplacian26, kGradientMagnitude };

std::string to_string(CurvatureOperator op);
CurvatureOperator curvature_operator_from_string(const std::string& s);

struct LossWeights {
  double beta = 0.001;
  double lambda_curv = 0.02;
  double lambda_normal = 0.0;
  double lambda_edge = 0.0;
  CurvatureOperator curvature_operator = CurvatureOperator::kLaplacian6;

  // Surface band bounds (strict inequalities).
  double band_lo = 0.3;
  double band_hi = 0.7;

  // Curvature target and band source: predicted occupancy by default,
  // ground truth behind this switch.
  bool curvature_from_ground_truth = false;
  // When set, the computed curvature target is detached so gradients reach
  // only the curvature head, not the occupancy path.
  bool stop_gradient_target = false;
  BoundaryPolicy boundary = BoundaryPolicy::kFixedDivisor;

  void validate() const;
};

struct LossBreakdown {
  double recon = 0.0;
  double kl = 0.0;
  double curvature = 0.0;
  double normal = 0.0;
  double edge = 0.0;
  double total = 0.0;
  long long surface_voxels = 0;

  static std::string csv_header();  // "epoch,split,recon,...,surface_voxels"
  std::string csv_row(int epoch, const std::string& split) const;
};

// Binary cross-entropy, mean over all voxels. Predictions are clamped to
// [1e-7, 1-1e-7] before the logs so saturated outputs stay finite.
ag::Tensor bce(const ag::Tensor& pred, const ag::Tensor& target);

// KL(q || N(0,I)) summed over latent dims: -1/2 sum(1 + logvar - mu^2 -
// exp(logvar)). Rank-1 input is one latent vector; rank-2 [B,d] averages
// over the batch.
ag::Tensor kl_gaussian(const ag::Tensor& mu, const ag::Tensor& logvar);

struct CurvatureTerm {
  ag::Tensor loss;
  int surface_voxels = 0;
};

// Masked consistency between the curvature head and the curvature computed
// from occupancy: (1/|S|) sum over the surface band of (C - H)^2. An empty
// band yields loss 0 with count 0. `ground_truth` is required only when
// weights.curvature_from_ground_truth is set.
CurvatureTerm curvature_loss(const ag::Tensor& curvature_pred, const ag::Tensor& occupancy_pred,
                             const ag::Tensor* ground_truth, int n, const LossWeights& weights);

// Mean over gt-surface-band voxels of (1 - cosine similarity) between the
// central-gradient fields of pred and gt; voxels where either gradient norm
// is below 1e-8 are skipped. Empty band -> 0.
ag::Tensor normal_consistency_loss(const ag::Tensor& pred, const OccupancyGrid& gt,
                                   double band_lo = 0.3, double band_hi = 0.7);

// Mean absolute difference of gradient magnitudes over all voxels.
ag::Tensor edge_preservation_loss(const ag::Tensor& pred, const OccupancyGrid& gt);

// Weighted sum per Eq-style composition; unused terms enter as scalar 0.
ag::Tensor weighted_total(const ag::Tensor& recon, const ag::Tensor& kl,
                          const ag::Tensor& curvature, const ag::Tensor& normal,
                          const ag::Tensor& edge, const LossWeights& weights);

// Numeric composition; rejects non-finite components naming the offender.
LossBreakdown total_loss(double recon, double kl, double curvature, double normal, double edge,
                         const LossWeights& weights, long long surface_voxels);

}  // namespace curvox
