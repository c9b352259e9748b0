// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "json.hpp"

namespace coherence::model {

enum class Variant { kStl, kMtl, kMtlSox, kConcatGrs };
enum class Aggregation { kAttention, kFinalState };

std::string_view to_string(Variant v);
std::string_view to_string(Aggregation a);
Variant parse_variant(std::string_view text);
Aggregation parse_aggregation(std::string_view text);

bool has_gr_head(Variant v);
bool uses_gr_inputs(Variant v);

struct ModelConfig {
  Variant variant = Variant::kMtl;
  int levels = 2;
  std::size_t embed_dim = 50;
  std::size_t word_hidden = 100;
  std::size_t sent_hidden = 100;
  std::size_t para_hidden = 100;  // three-level models only
  std::size_t num_classes = 1;    // 1 = binary
  double alpha = 1.0;
  double beta = 0.0;
  std::size_t gr_embed_dim = 10;  // concat_grs only
  Aggregation aggregation = Aggregation::kAttention;
  bool dropout_words = true;
  bool dropout_sentences = true;
  bool freeze_embeddings = false;

  // Throws ConfigError naming the offending field.
  void validate() const;
  // Copy with beta zeroed for variants that have no GR loss.
  ModelConfig normalized() const;

  std::size_t word_input_dim() const;
  std::size_t doc_dim() const;
  bool binary() const { return num_classes == 1; }

  bool operator==(const ModelConfig&) const = default;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
// Missing fields keep their defaults; unknown fields are rejected.
void from_json(const nlohmann::json& j, ModelConfig& c);

}  // namespace coherence::model
