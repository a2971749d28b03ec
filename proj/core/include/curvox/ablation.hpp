#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "curvox/evaluate.hpp"
#include "curvox/trainer.hpp"

namespace curvox {

struct AblationCell {
  std::string name;
  LossWeights weights;
};

// The four studied configurations: baseline (no geometric terms),
// curvature-only, multi-geometric (curvature + normal consistency + edge
// preservation) and the gradient-magnitude alternative operator.
std::vector<AblationCell> standard_cells();

// Weights for a named cell; "custom" returns defaults untouched.
LossWeights ablation_weights(const std::string& name);
bool is_known_ablation(const std::string& name);

struct AblationConfig {
  TrainConfig base;
  std::vector<std::uint64_t> seeds = {42, 123, 456};
  int jobs = 1;
};

struct AblationRun {
  std::string cell;
  std::uint64_t seed = 0;
  bool aborted = false;
  std::string abort_reason;
  EvalResult test;
  int best_epoch = -1;   // 0-based
  int epochs_run = 0;
  std::filesystem::path run_dir;
};

struct AblationReport {
  std::vector<AblationRun> runs;
};

// Trains every (cell, seed) pair (across `jobs` worker threads), evaluates
// completed runs on the test split and records aborted runs as instability
// events. Each run writes its own artifacts under
// out_dir/<cell>/seed_<seed>/.
AblationReport run_ablation(const AblationConfig& config,
                            const std::filesystem::path& dataset_dir,
                            const std::filesystem::path& out_dir);

}  // namespace curvox
