#pragma once

#include <filesystem>
#include <string>

#include "curvox/losses.hpp"

namespace curvox {

struct EvalResult {
  // Per-scene means; .total carries the full weighted composition.
  LossBreakdown mean;
  // The recon + beta*kl composition, reported separately from the full one.
  double total_recon_kl = 0.0;
  int scenes = 0;
};

// Deterministic test-set evaluation at the posterior mean (eps = 0), or
// with sampled latents when `sample_seed` is non-negative.
EvalResult evaluate(const std::filesystem::path& checkpoint_path,
                    const std::filesystem::path& dataset_dir, const std::string& split,
                    const LossWeights& weights, long long sample_seed = -1);

std::string eval_csv_header();
std::string eval_csv_row(const EvalResult& r);

}  // namespace curvox
