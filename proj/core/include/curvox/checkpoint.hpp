#pragma once

#include <filesystem>
#include <string>

#include "curvox/model.hpp"

namespace curvox {

// Checkpoint format CKPT1: magic "CKPT1", a length-prefixed key=value
// config block, then name-length-prefixed parameter entries with their
// dims and values in the VXG1 scalar layout (little-endian 32-bit floats).
void save_checkpoint(const std::filesystem::path& path, const ModelConfig& config,
                     const Parameters& params);

struct Checkpoint {
  ModelConfig config;
  Parameters params;
};

Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string serialize_model_config(const ModelConfig& config);
ModelConfig parse_model_config(const std::string& text);

}  // namespace curvox
