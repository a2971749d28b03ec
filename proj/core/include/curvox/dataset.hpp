#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "curvox/config.hpp"
#include "curvox/scene.hpp"
#include "curvox/sensor.hpp"

namespace curvox {

struct DatasetConfig {
  int grid_n = 16;
  double extent = 3.0;
  int train_scenes = 200;
  int val_scenes = 40;
  int test_scenes = 40;
  int image_width = 64;
  int image_height = 64;
  double focal = 70.0;
  double sample_rate = 0.05;
  std::uint64_t seed = 42;
  SceneRandomization scenes;
  double camera_distance_min = 3.2;
  double camera_distance_max = 4.2;
  int min_valid_pixels = 400;
  int max_scene_attempts = 20;

  void validate() const;
  KeyValueFile to_key_values() const;
  static DatasetConfig from_key_values(const KeyValueFile& kv);
  static std::vector<std::string> known_keys();
  std::string config_hash() const;
};

struct DatasetManifest {
  std::string split;
  std::uint64_t seed = 0;
  std::string config_hash;
  int grid_n = 0;
  double extent = 3.0;
  std::vector<std::string> scene_names;
};

void write_manifest(const std::filesystem::path& split_dir, const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::filesystem::path& split_dir);

// One scene on disk: <name>.gt.vxg, <name>.evidence.vxg, <name>.mask.vxg
// and <name>.obs (raw samples + camera, needed for depth-scaling
// augmentation).
struct TrainingSample {
  OccupancyGrid gt;
  OccupancyGrid evidence;
  OccupancyGrid mask;
  SparseDepthObservation obs;
};

void write_observation(const std::filesystem::path& path, const SparseDepthObservation& obs);
SparseDepthObservation read_observation(const std::filesystem::path& path);

TrainingSample load_sample(const std::filesystem::path& split_dir, const std::string& name,
                           double extent);

struct SplitSummary {
  std::string split;
  int scenes = 0;
  long long depth_samples = 0;
  long long evidence_voxels = 0;
  long long dropped_samples = 0;
  double mean_valid_pixels = 0.0;
};

// Deterministic generation: (seed, config) -> byte-identical files.
std::vector<SplitSummary> generate_dataset(const DatasetConfig& config,
                                           const std::filesystem::path& out_dir);

// ---- Augmentation -------------------------------------------------------

OccupancyGrid flip_x(const OccupancyGrid& grid);

// Multiplies observation depths by `factor` and re-voxelizes the evidence
// and mask channels; gt is unchanged.
TrainingSample scale_depth(const TrainingSample& sample, double factor);

struct AugmentConfig {
  bool horizontal_flip = true;
  bool depth_scaling = true;
  double depth_scale_range = 0.05;  // factor drawn from [1-r, 1+r]
};

// Depth scaling first (re-voxelize), then a 50% x-axis mirror of all grids.
TrainingSample augment(const TrainingSample& sample, const AugmentConfig& config, Rng& rng);

}  // namespace curvox
