// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "coherence/model/config.hpp"
#include "coherence/training/training.hpp"

namespace coherence::cli {

struct RunPaths {
  std::string train;
  std::string dev;  // empty: 9:1 split of the training corpus
  std::string test;
  std::string embeddings;
  std::string output_dir = "runs";

  bool operator==(const RunPaths&) const = default;
};

struct RunConfig {
  std::string preset;
  model::ModelConfig model;
  training::TrainConfig train;
  RunPaths paths;

  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

std::vector<std::string_view> preset_names();
// Per-domain hyperparameter presets.
RunConfig preset(std::string_view name);

nlohmann::json to_json(const RunConfig& c);
// Starts from the named preset (if any), then applies the model/train/paths
// objects field by field. Relative paths are resolved against base_dir.
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace coherence::cli
