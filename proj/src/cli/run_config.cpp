// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#include "coherence/cli/run_config.hpp"

#include <fstream>
#include <set>

#include "coherence/util/error.hpp"

namespace coherence::cli {

using nlohmann::json;

namespace {

struct PresetRow {
  std::string_view name;
  int levels;
  std::size_t embed, word, sent, para;
  double alpha, beta;
  std::size_t num_classes;
  training::SelectionMetric metric;
  std::size_t runs;
};

constexpr PresetRow kPresets[] = {
    {"wsj-like", 2, 50, 100, 100, 100, 0.7, 0.3, 1, training::SelectionMetric::kPra, 5},
    {"yahoo-like", 3, 300, 100, 100, 100, 1.0, 0.1, 3, training::SelectionMetric::kAccuracy, 10},
    {"clinton-like", 3, 300, 100, 200, 100, 1.0, 0.1, 3, training::SelectionMetric::kAccuracy, 10},
    {"enron-like", 3, 300, 100, 100, 100, 1.0, 0.2, 3, training::SelectionMetric::kAccuracy, 10},
};

std::string resolve(const std::string& path, const std::filesystem::path& base) {
  if (path.empty() || base.empty() || std::filesystem::path(path).is_absolute()) return path;
  return (base / path).lexically_normal().string();
}

}  // namespace

std::vector<std::string_view> preset_names() {
  std::vector<std::string_view> out;
  for (const auto& p : kPresets) out.push_back(p.name);
  return out;
}

RunConfig preset(std::string_view name) {
  for (const auto& p : kPresets) {
    if (p.name != name) continue;
    RunConfig c;
    c.preset = std::string(name);
    c.model.variant = model::Variant::kMtl;
    c.model.levels = p.levels;
    c.model.embed_dim = p.embed;
    c.model.word_hidden = p.word;
    c.model.sent_hidden = p.sent;
    c.model.para_hidden = p.para;
    c.model.alpha = p.alpha;
    c.model.beta = p.beta;
    c.model.num_classes = p.num_classes;
    c.train.selection_metric = p.metric;
    c.train.ensemble_runs = p.runs;
    return c;
  }
  std::string known;
  for (auto n : preset_names()) known += (known.empty() ? "" : ", ") + std::string(n);
  throw ConfigError("preset: unknown preset '" + std::string(name) + "' (known: " + known + ")");
}

void RunConfig::validate() const {
  model.validate();
  train.validate();
  if (model.binary() != (train.selection_metric == training::SelectionMetric::kPra)) {
    throw ConfigError("train.selection_metric: use pra for binary models (num_classes 1) and accuracy otherwise");
  }
}

json to_json(const RunConfig& c) {
  json j;
  if (!c.preset.empty()) j["preset"] = c.preset;
  j["model"] = c.model;
  j["train"] = c.train;
  j["paths"] = {{"train", c.paths.train},
                {"dev", c.paths.dev},
                {"test", c.paths.test},
                {"embeddings", c.paths.embeddings},
                {"output_dir", c.paths.output_dir}};
  return j;
}

RunConfig parse_run_config(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("run config: expected a JSON object");
  static const std::set<std::string> known{"preset", "model", "train", "paths"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError(key + ": unknown field");
  }
  RunConfig c;
  if (j.contains("preset")) {
    if (!j["preset"].is_string()) throw ConfigError("preset: expected a string");
    c = preset(j["preset"].get<std::string>());
  }
  if (j.contains("model")) model::from_json(j["model"], c.model);
  if (j.contains("train")) training::from_json(j["train"], c.train);
  if (j.contains("paths")) {
    const auto& p = j["paths"];
    if (!p.is_object()) throw ConfigError("paths: expected an object");
    static const std::set<std::string> path_keys{"train", "dev", "test", "embeddings", "output_dir"};
    for (const auto& [key, value] : p.items()) {
      if (!path_keys.count(key)) throw ConfigError("paths." + key + ": unknown field");
      if (!value.is_string()) throw ConfigError("paths." + key + ": expected a string");
    }
    auto read = [&](const char* key, std::string& out) {
      if (p.contains(key)) out = p[key].get<std::string>();
    };
    read("train", c.paths.train);
    read("dev", c.paths.dev);
    read("test", c.paths.test);
    read("embeddings", c.paths.embeddings);
    read("output_dir", c.paths.output_dir);
  }
  for (auto* path : {&c.paths.train, &c.paths.dev, &c.paths.test, &c.paths.embeddings, &c.paths.output_dir}) {
    *path = resolve(*path, base_dir);
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open run config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": malformed JSON: " + e.what());
  }
  return parse_run_config(j, path.parent_path());
}

}  // namespace coherence::cli
