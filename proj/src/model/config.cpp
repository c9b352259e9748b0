// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#include "coherence/model/config.hpp"

#include <set>

#include "coherence/util/error.hpp"

namespace coherence::model {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::kStl: return "stl";
    case Variant::kMtl: return "mtl";
    case Variant::kMtlSox: return "mtl_sox";
    case Variant::kConcatGrs: return "concat_grs";
  }
  return "?";
}

std::string_view to_string(Aggregation a) { return a == Aggregation::kAttention ? "attention" : "final_state"; }

Variant parse_variant(std::string_view text) {
  for (auto v : {Variant::kStl, Variant::kMtl, Variant::kMtlSox, Variant::kConcatGrs}) {
    if (text == to_string(v)) return v;
  }
  throw ConfigError("model.variant: expected stl, mtl, mtl_sox or concat_grs, got '" + std::string(text) + "'");
}

Aggregation parse_aggregation(std::string_view text) {
  if (text == "attention") return Aggregation::kAttention;
  if (text == "final_state") return Aggregation::kFinalState;
  throw ConfigError("model.aggregation: expected attention or final_state, got '" + std::string(text) + "'");
}

bool has_gr_head(Variant v) { return v == Variant::kMtl || v == Variant::kMtlSox; }
bool uses_gr_inputs(Variant v) { return v == Variant::kConcatGrs; }

void ModelConfig::validate() const {
  auto positive = [](std::size_t value, const char* field) {
    if (value == 0) throw ConfigError(std::string("model.") + field + ": must be positive");
  };
  if (levels != 2 && levels != 3) throw ConfigError("model.levels: must be 2 or 3, got " + std::to_string(levels));
  positive(embed_dim, "embed_dim");
  positive(word_hidden, "word_hidden");
  positive(sent_hidden, "sent_hidden");
  if (levels == 3) positive(para_hidden, "para_hidden");
  if (num_classes == 0) throw ConfigError("model.num_classes: must be 1 (binary) or at least 2");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("model.alpha: must lie in [0, 1]");
  if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("model.beta: must lie in [0, 1]");
  if (uses_gr_inputs(variant)) positive(gr_embed_dim, "gr_embed_dim");
}

ModelConfig ModelConfig::normalized() const {
  ModelConfig c = *this;
  if (!has_gr_head(c.variant)) c.beta = 0.0;
  return c;
}

std::size_t ModelConfig::word_input_dim() const {
  return embed_dim + (uses_gr_inputs(variant) ? gr_embed_dim : 0);
}

std::size_t ModelConfig::doc_dim() const { return 2 * (levels == 3 ? para_hidden : sent_hidden); }

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"variant", to_string(c.variant)},
                     {"levels", c.levels},
                     {"embed_dim", c.embed_dim},
                     {"word_hidden", c.word_hidden},
                     {"sent_hidden", c.sent_hidden},
                     {"para_hidden", c.para_hidden},
                     {"num_classes", c.num_classes},
                     {"alpha", c.alpha},
                     {"beta", c.beta},
                     {"gr_embed_dim", c.gr_embed_dim},
                     {"aggregation", to_string(c.aggregation)},
                     {"dropout_words", c.dropout_words},
                     {"dropout_sentences", c.dropout_sentences},
                     {"freeze_embeddings", c.freeze_embeddings}};
}

namespace {

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    j.at(key).get_to(out);
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("model.") + key + ": wrong type");
  }
}

}  // namespace

void from_json(const nlohmann::json& j, ModelConfig& c) {
  if (!j.is_object()) throw ConfigError("model: expected an object");
  static const std::set<std::string> known{"variant",      "levels",     "embed_dim",     "word_hidden",
                                           "sent_hidden",  "para_hidden", "num_classes",  "alpha",
                                           "beta",         "gr_embed_dim", "aggregation", "dropout_words",
                                           "dropout_sentences", "freeze_embeddings"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("model." + key + ": unknown field");
  }
  std::string text;
  if (j.contains("variant")) {
    read_field(j, "variant", text);
    c.variant = parse_variant(text);
  }
  if (j.contains("aggregation")) {
    read_field(j, "aggregation", text);
    c.aggregation = parse_aggregation(text);
  }
  read_field(j, "levels", c.levels);
  read_field(j, "embed_dim", c.embed_dim);
  read_field(j, "word_hidden", c.word_hidden);
  read_field(j, "sent_hidden", c.sent_hidden);
  read_field(j, "para_hidden", c.para_hidden);
  read_field(j, "num_classes", c.num_classes);
  read_field(j, "alpha", c.alpha);
  read_field(j, "beta", c.beta);
  read_field(j, "gr_embed_dim", c.gr_embed_dim);
  read_field(j, "dropout_words", c.dropout_words);
  read_field(j, "dropout_sentences", c.dropout_sentences);
  read_field(j, "freeze_embeddings", c.freeze_embeddings);
}

}  // namespace coherence::model
