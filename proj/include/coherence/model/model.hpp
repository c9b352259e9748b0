// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "coherence/autograd/tape.hpp"
#include "coherence/autograd/tensor.hpp"
#include "coherence/data/corpus.hpp"
#include "coherence/data/embeddings.hpp"
#include "coherence/data/gr_vocabulary.hpp"
#include "coherence/layers/layers.hpp"
#include "coherence/model/config.hpp"
#include "coherence/model/losses.hpp"

namespace coherence::model {

using autograd::Parameter;
using autograd::ParameterStore;
using autograd::Tensor;

inline constexpr const char* kUnknownWord = "<unk>";

// Lookup key for the word vocabulary (ASCII case-folded surface).
std::string word_key(std::string_view surface);

struct AttentionTrace {
  std::vector<std::vector<double>> word;       // one vector per sentence
  std::vector<std::vector<double>> sentence;   // one per paragraph (3 levels) or one for the document
  std::vector<double> paragraph;               // three-level models only
};

struct EncodeOptions {
  // Training-mode dropout; nullptr means evaluation mode.
  layers::Dropout* dropout = nullptr;
  // Feed each word embedding as a fresh input leaf so its gradient can be
  // read back (saliency).
  bool leaf_inputs = false;
};

struct Encoding {
  Var doc_vector;
  std::vector<Var> word_inputs;  // word embeddings in document order, before dropout
  std::vector<Var> word_states;  // h_t^w in document order
  std::vector<Var> word_attention;      // one per sentence
  std::vector<Var> sentence_attention;  // one per paragraph (3 levels) or one
  std::optional<Var> paragraph_attention;
};

struct CoherencePrediction {
  std::vector<double> score;
  std::optional<std::vector<std::vector<double>>> gr_probs;
  Tensor doc_vector;
  AttentionTrace attention;
};

struct DocumentLoss {
  Var total;
  Var coherence;
  std::optional<Var> gr;
};

// sigmoid(W_d d).
Var score_coherence(Var d, Var W_d);
// softmax(W_r h) for each word state.
std::vector<Var> predict_gr(std::span<const Var> word_states, Var W_r);

class CoherenceModel {
 public:
  // Word vocabulary index 0 is always the shared unknown-word row. Word rows
  // found in `pretrained` are copied from it; the rest are drawn from the init
  // stream.
  CoherenceModel(ModelConfig config, std::vector<std::string> words, std::optional<data::GrVocabulary> gr_vocab,
                 std::uint64_t seed, const data::EmbeddingMatrix* pretrained = nullptr);

  // Vocabularies from the training corpus: every case-folded training token
  // (restricted to `pretrained` when given), and the GR class set the variant
  // needs.
  static CoherenceModel build(const ModelConfig& config, const data::Corpus& train, std::uint64_t seed,
                              const data::EmbeddingMatrix* pretrained = nullptr);

  CoherenceModel(CoherenceModel&&) = default;
  CoherenceModel& operator=(CoherenceModel&&) = default;
  CoherenceModel(const CoherenceModel&) = delete;
  CoherenceModel& operator=(const CoherenceModel&) = delete;

  const ModelConfig& config() const { return config_; }
  ParameterStore& params() { return params_; }
  const ParameterStore& params() const { return params_; }
  const layers::EmbeddingTable& words() const { return words_; }
  const std::optional<data::GrVocabulary>& gr_vocab() const { return gr_vocab_; }

  Encoding encode(Tape& tape, const data::Document& doc, const EncodeOptions& options = {});
  Var score(Tape& tape, Var doc_vector);
  // Log-probabilities over the GR classes for each word state.
  std::vector<Var> gr_log_probs(Tape& tape, std::span<const Var> word_states);

  // Gold GR class per word in document order; nullopt = masked.
  std::vector<std::optional<std::size_t>> gr_targets(const data::Document& doc) const;

  DocumentLoss loss(Tape& tape, const data::Document& doc, const EncodeOptions& options = {});

  CoherencePrediction predict(const data::Document& doc);

  nlohmann::json to_json() const;
  static CoherenceModel from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static CoherenceModel load(const std::filesystem::path& path);

 private:
  struct Level {
    layers::LstmParams fwd;
    layers::LstmParams bwd;
    std::optional<layers::AttentionParams> attention;
  };

  void create_parameters(std::uint64_t seed, const data::EmbeddingMatrix* pretrained);
  Var aggregate(Tape& tape, std::span<const Var> states, const Level& level, std::optional<Var>* weights);
  Var word_input(Tape& tape, const data::Token& token, const EncodeOptions& options, Var* raw);

  ModelConfig config_;
  std::vector<std::string> word_list_;
  std::optional<data::GrVocabulary> gr_vocab_;
  ParameterStore params_;
  layers::EmbeddingTable words_;
  std::optional<layers::EmbeddingTable> gr_embedding_;
  Level word_level_;
  Level sent_level_;
  std::optional<Level> para_level_;
  Parameter* score_W_ = nullptr;
  Parameter* gr_W_ = nullptr;
};

// Predicted class: 1/0 by thresholding at 0.5 for binary models, argmax of
// the class scores otherwise.
std::size_t predicted_class(std::span<const double> score);

}  // namespace coherence::model
