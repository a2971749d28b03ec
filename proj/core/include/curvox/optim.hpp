#pragma once

#include <span>
#include <vector>

#include "curvox/model.hpp"

namespace curvox {

// lr(t) = lr_final + 1/2 (lr0 - lr_final)(1 + cos(pi t / T)); endpoints are
// exactly lr0 and lr_final.
double cosine_lr(int t, int total_epochs, double lr0, double lr_final);

// Gradient buffers aligned with Parameters::entries.
using GradientVec = std::vector<std::vector<double>>;

double global_norm(const GradientVec& grads);

// Scales all gradients by max_norm / norm when the global L2 norm exceeds
// max_norm. Returns the pre-clip norm. Rejects non-finite norms.
double clip_global_norm(GradientVec& grads, double max_norm = 1.0);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 1e-5;
  // Decoupled (lr * wd * param shrinkage, outside the moments) by default;
  // the coupled form adds wd * param to the gradient before the moments.
  bool decoupled_weight_decay = true;
};

struct AdamState {
  long long step = 0;
  GradientVec m;
  GradientVec v;

  static AdamState zeros_like(const Parameters& params);
};

// One bias-corrected Adam update, in place.
void adam_step(Parameters& params, const GradientVec& grads, AdamState& state, double lr,
               const AdamConfig& config);

struct EarlyStopResult {
  bool stop = false;
  int best_epoch = -1;  // 0-based index into the history
};

// Stops once `patience` consecutive epochs fail to strictly improve the
// best validation value (ties are not improvements).
EarlyStopResult early_stop(std::span<const double> history, int patience);

}  // namespace curvox
