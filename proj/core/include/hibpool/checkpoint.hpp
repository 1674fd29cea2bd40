#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "hibpool/config.hpp"
#include "hibpool/model.hpp"

namespace hibpool {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  ModelParams params;
  ExperimentConfig config;
};

/// {"format": "hibpool-checkpoint", "version", "config_hash", "config", "shape",
///  "params": {name: {"rows", "cols", "data"}}}
nlohmann::json checkpoint_to_json(const ModelParams& params, const ExperimentConfig& config);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params, const ExperimentConfig& config);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace hibpool
