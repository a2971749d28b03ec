#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "curvox/config.hpp"
#include "curvox/dataset.hpp"
#include "curvox/losses.hpp"
#include "curvox/model.hpp"
#include "curvox/optim.hpp"

namespace curvox {

struct TrainConfig {
  int epochs = 50;
  int batch_size = 16;
  double lr0 = 1e-4;
  double lr_final = 1e-6;
  AdamConfig adam;
  double clip_norm = 1.0;
  int patience = 20;
  std::uint64_t seed = 42;
  LossWeights weights;
  ModelConfig model;
  std::string ablation_tag = "custom";
  bool augment_flip = true;
  bool augment_depth_scale = true;
  // Test mode: re-checks the post-clip norm every step.
  bool assert_clip = false;

  void validate() const;
  KeyValueFile to_key_values() const;
  static TrainConfig from_key_values(const KeyValueFile& kv);
  static std::vector<std::string> known_keys();
};

struct EpochMetrics {
  LossBreakdown train;
  LossBreakdown val;
  double lr = 0.0;
};

struct RunRecord {
  std::vector<EpochMetrics> epochs;
  int best_epoch = -1;      // 0-based index of the best validation epoch
  int stopping_epoch = -1;  // 0-based index of the last completed epoch
  bool aborted = false;
  std::string abort_reason;
  double best_val_total = 0.0;
  long long parameter_count = 0;
  // Wall time is logged separately (timing.txt); it is excluded from the
  // deterministic artifacts.
  double wall_seconds = 0.0;
  std::filesystem::path run_dir;
  std::filesystem::path checkpoint_path;
  std::filesystem::path metrics_path;
};

// Per-example objective terms on a shared tape (or detached when the model
// was built without one). Terms whose weight is zero are scalar zeros
// unless `force_all_terms` (evaluation reports curvature regardless).
struct ExampleTerms {
  ag::Tensor recon;
  ag::Tensor kl;
  ag::Tensor curvature;
  ag::Tensor normal;
  ag::Tensor edge;
  int surface_voxels = 0;
};

ExampleTerms compute_objective_terms(const Model& model, const TrainingSample& sample,
                                     const LossWeights& weights, const ag::Tensor& eps,
                                     bool force_all_terms);

// Full training run: deterministic given (seed, config, dataset). Writes
// metrics.csv, config.snapshot, checkpoint.ckpt (best validation epoch),
// run_summary.txt and timing.txt under out_dir. A non-finite loss aborts
// the run with the offending component named in the record (not thrown).
RunRecord train(const TrainConfig& config, const std::filesystem::path& dataset_dir,
                const std::filesystem::path& out_dir);

}  // namespace curvox
