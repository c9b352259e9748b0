// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#include "coherence/model/model.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include "coherence/autograd/ops.hpp"
#include "coherence/util/error.hpp"
#include "coherence/util/rng.hpp"

namespace coherence::model {

namespace ops = autograd;
using nlohmann::json;

namespace {

constexpr const char* kCheckpointFormat = "coherence-checkpoint";
constexpr int kCheckpointVersion = 1;
constexpr double kEmbeddingInitRange = 0.1;

DataError doc_error(const data::Document& doc, const std::string& what) {
  return DataError("document '" + doc.id + "': " + what);
}

Tensor random_rows(Rng& rng, std::size_t rows, std::size_t cols) {
  Tensor t(autograd::Shape{rows, cols});
  for (auto& v : t.mutable_values()) v = rng.uniform(-kEmbeddingInitRange, kEmbeddingInitRange);
  return t;
}

std::vector<double> values_of(Var v) {
  auto s = v.value().values();
  return {s.begin(), s.end()};
}

}  // namespace

std::string word_key(std::string_view surface) {
  std::string key(surface);
  for (auto& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return key;
}

Var score_coherence(Var d, Var W_d) { return ops::sigmoid(ops::matvec(W_d, d)); }

std::vector<Var> predict_gr(std::span<const Var> word_states, Var W_r) {
  std::vector<Var> out;
  out.reserve(word_states.size());
  for (Var h : word_states) out.push_back(ops::softmax(ops::matvec(W_r, h)));
  return out;
}

std::size_t predicted_class(std::span<const double> score) {
  if (score.empty()) throw ShapeError("predicted_class: empty score vector");
  if (score.size() == 1) return score[0] >= 0.5 ? 1 : 0;
  return static_cast<std::size_t>(std::max_element(score.begin(), score.end()) - score.begin());
}

CoherenceModel::CoherenceModel(ModelConfig config, std::vector<std::string> words,
                               std::optional<data::GrVocabulary> gr_vocab, std::uint64_t seed,
                               const data::EmbeddingMatrix* pretrained)
    : config_(config.normalized()), word_list_(std::move(words)) {
  config_.validate();
  if (word_list_.empty() || word_list_.front() != kUnknownWord) word_list_.insert(word_list_.begin(), kUnknownWord);
  if (has_gr_head(config_.variant) || uses_gr_inputs(config_.variant)) {
    if (!gr_vocab) throw ConfigError("model.variant: " + std::string(to_string(config_.variant)) + " needs a GR vocabulary");
    const bool want_sox = config_.variant == Variant::kMtlSox;
    if ((gr_vocab->mode() == data::GrVocabulary::Mode::kSox) != want_sox) {
      throw ConfigError("model.variant: " + std::string(to_string(config_.variant)) + " cannot use a " +
                        std::string(data::to_string(gr_vocab->mode())) + " GR vocabulary");
    }
    gr_vocab_ = std::move(gr_vocab);
  }
  if (pretrained && pretrained->dim() != config_.embed_dim) {
    throw ConfigError("model.embed_dim: " + std::to_string(config_.embed_dim) + " does not match pre-trained vectors of dimension " +
                      std::to_string(pretrained->dim()));
  }
  create_parameters(seed, pretrained);
}

void CoherenceModel::create_parameters(std::uint64_t seed, const data::EmbeddingMatrix* pretrained) {
  Rng init(Rng::derive(seed, 0));
  const auto& c = config_;

  Tensor table = random_rows(init, word_list_.size(), c.embed_dim);
  if (pretrained) {
    for (std::size_t i = 0; i < word_list_.size(); ++i) {
      if (auto vec = pretrained->find(word_list_[i])) {
        std::copy(vec->begin(), vec->end(), table.mutable_values().begin() + i * c.embed_dim);
      }
    }
  }
  words_ = layers::EmbeddingTable(word_list_, &params_.add("embedding.word", std::move(table), !c.freeze_embeddings));
  if (uses_gr_inputs(c.variant)) {
    gr_embedding_ = layers::EmbeddingTable(
        gr_vocab_->classes(), &params_.add("embedding.gr", random_rows(init, gr_vocab_->size(), c.gr_embed_dim)));
  }

  auto make_level = [&](const std::string& prefix, std::size_t in, std::size_t hidden) {
    Level level;
    level.fwd = layers::LstmParams::create(params_, prefix + "_lstm.fwd", in, hidden, init);
    level.bwd = layers::LstmParams::create(params_, prefix + "_lstm.bwd", in, hidden, init);
    if (c.aggregation == Aggregation::kAttention) {
      level.attention = layers::AttentionParams::create(params_, prefix + "_attention", 2 * hidden, 2 * hidden, init);
    }
    return level;
  };
  word_level_ = make_level("word", c.word_input_dim(), c.word_hidden);
  sent_level_ = make_level("sentence", 2 * c.word_hidden, c.sent_hidden);
  if (c.levels == 3) para_level_ = make_level("paragraph", 2 * c.sent_hidden, c.para_hidden);

  score_W_ = &params_.add("score.W", layers::glorot_uniform(init, c.num_classes, c.doc_dim()));
  // The GR head is created last so that the parameters shared with a
  // single-task model draw identical initial values.
  if (has_gr_head(c.variant)) {
    gr_W_ = &params_.add("gr_head.W", layers::glorot_uniform(init, gr_vocab_->size(), 2 * c.word_hidden));
  }
}

CoherenceModel CoherenceModel::build(const ModelConfig& config, const data::Corpus& train, std::uint64_t seed,
                                     const data::EmbeddingMatrix* pretrained) {
  std::set<std::string> keys;
  for (const auto& doc : train.documents)
    for (const auto* s : doc.sentences())
      for (const auto& t : *s) {
        auto key = word_key(t.surface);
        if (!pretrained || pretrained->find(key)) keys.insert(std::move(key));
      }
  keys.erase(kUnknownWord);
  std::optional<data::GrVocabulary> gr;
  if (config.variant == Variant::kMtlSox) {
    gr = data::GrVocabulary::sox();
  } else if (config.variant != Variant::kStl) {
    gr = data::GrVocabulary::build_full(train);
  }
  return CoherenceModel(config, {keys.begin(), keys.end()}, std::move(gr), seed, pretrained);
}

Var CoherenceModel::word_input(Tape& tape, const data::Token& token, const EncodeOptions& options, Var* raw) {
  const std::size_t index = words_.index_of(word_key(token.surface)).value_or(0);
  Var e;
  if (options.leaf_inputs) {
    const auto& table = words_.matrix()->tensor;
    const std::size_t dim = table.dim(1);
    auto row = table.values().subspan(index * dim, dim);
    e = tape.input(Tensor::vector({row.begin(), row.end()}), true);
  } else {
    e = words_.lookup(tape, index);
  }
  *raw = e;
  if (options.dropout && config_.dropout_words) e = (*options.dropout)(e, true);
  if (gr_embedding_) {
    if (!token.gr) throw DataError("token '" + token.surface + "' has no GR label; concat_grs needs one for every token");
    auto gr_index = gr_vocab_->index_of(*token.gr);
    if (!gr_index) {
      throw DataError("token '" + token.surface + "' has GR '" + *token.gr + "', which is not in the GR vocabulary");
    }
    e = ops::concat({e, gr_embedding_->lookup(tape, *gr_index)});
  }
  return e;
}

Var CoherenceModel::aggregate(Tape& tape, std::span<const Var> states, const Level& level,
                              std::optional<Var>* weights) {
  if (level.attention) {
    auto pooled = layers::attention_pool(tape, states, *level.attention);
    *weights = pooled.weights;
    return pooled.pooled;
  }
  const std::size_t h = states.front().size() / 2;
  return ops::concat({ops::slice(states.back(), 0, h), ops::slice(states.front(), h, h)});
}

Encoding CoherenceModel::encode(Tape& tape, const data::Document& doc, const EncodeOptions& options) {
  if (doc.num_sentences() == 0) throw doc_error(doc, "has no sentences");
  Encoding enc;
  std::vector<std::vector<Var>> sentence_vectors;
  for (const auto& paragraph : doc.paragraphs) {
    if (paragraph.empty()) continue;
    auto& svecs = sentence_vectors.emplace_back();
    for (const auto& sentence : paragraph) {
      if (sentence.empty()) throw doc_error(doc, "has an empty sentence");
      std::vector<Var> xs;
      xs.reserve(sentence.size());
      for (const auto& token : sentence) {
        Var raw;
        xs.push_back(word_input(tape, token, options, &raw));
        enc.word_inputs.push_back(raw);
      }
      auto hs = layers::bilstm(tape, xs, word_level_.fwd, word_level_.bwd);
      enc.word_states.insert(enc.word_states.end(), hs.begin(), hs.end());
      std::optional<Var> weights;
      Var s = aggregate(tape, hs, word_level_, &weights);
      if (weights) enc.word_attention.push_back(*weights);
      if (options.dropout && config_.dropout_sentences) s = (*options.dropout)(s, true);
      svecs.push_back(s);
    }
  }

  auto encode_sequence = [&](std::span<const Var> seq, const Level& level, std::optional<Var>* weights) {
    auto hs = layers::bilstm(tape, seq, level.fwd, level.bwd);
    return aggregate(tape, hs, level, weights);
  };

  if (config_.levels == 2) {
    std::vector<Var> all;
    for (auto& p : sentence_vectors) all.insert(all.end(), p.begin(), p.end());
    std::optional<Var> weights;
    enc.doc_vector = encode_sequence(all, sent_level_, &weights);
    if (weights) enc.sentence_attention.push_back(*weights);
  } else {
    std::vector<Var> paragraph_vectors;
    for (auto& p : sentence_vectors) {
      std::optional<Var> weights;
      paragraph_vectors.push_back(encode_sequence(p, sent_level_, &weights));
      if (weights) enc.sentence_attention.push_back(*weights);
    }
    std::optional<Var> weights;
    enc.doc_vector = encode_sequence(paragraph_vectors, *para_level_, &weights);
    enc.paragraph_attention = weights;
  }
  return enc;
}

Var CoherenceModel::score(Tape& tape, Var doc_vector) { return score_coherence(doc_vector, tape.param(*score_W_)); }

std::vector<Var> CoherenceModel::gr_log_probs(Tape& tape, std::span<const Var> word_states) {
  if (!gr_W_) throw Error("variant " + std::string(to_string(config_.variant)) + " has no GR prediction head");
  Var W = tape.param(*gr_W_);
  std::vector<Var> out;
  out.reserve(word_states.size());
  for (Var h : word_states) out.push_back(ops::log_softmax(ops::matvec(W, h)));
  return out;
}

std::vector<std::optional<std::size_t>> CoherenceModel::gr_targets(const data::Document& doc) const {
  std::vector<std::optional<std::size_t>> out;
  for (const auto* s : doc.sentences())
    for (const auto& t : *s) {
      if (gr_W_ && t.gr) {
        out.push_back(gr_vocab_->index_of(*t.gr));
      } else {
        out.push_back(std::nullopt);
      }
    }
  return out;
}

DocumentLoss CoherenceModel::loss(Tape& tape, const data::Document& doc, const EncodeOptions& options) {
  Encoding enc = encode(tape, doc, options);
  Var y_hat = score(tape, enc.doc_vector);
  Var l1;
  if (config_.binary()) {
    if (doc.label.kind != data::CoherenceLabel::Kind::kBinary) throw doc_error(doc, "binary model needs a binary label");
    l1 = loss_binary(y_hat, doc.label.value);
  } else {
    if (doc.label.kind != data::CoherenceLabel::Kind::kGraded ||
        static_cast<std::size_t>(doc.label.value) >= config_.num_classes) {
      throw doc_error(doc, "label does not fit a " + std::to_string(config_.num_classes) + "-class model");
    }
    std::vector<double> target(config_.num_classes, 0.0);
    target[static_cast<std::size_t>(doc.label.value)] = 1.0;
    l1 = loss_multiclass(y_hat, target);
  }
  std::optional<Var> l2;
  if (gr_W_) l2 = loss_gr(tape, gr_log_probs(tape, enc.word_states), gr_targets(doc));
  return {loss_total(l1, l2, config_.alpha, config_.beta), l1, l2};
}

CoherencePrediction CoherenceModel::predict(const data::Document& doc) {
  Tape tape;
  Encoding enc = encode(tape, doc);
  CoherencePrediction out;
  out.score = values_of(score(tape, enc.doc_vector));
  out.doc_vector = enc.doc_vector.value();
  if (gr_W_) {
    auto& probs = out.gr_probs.emplace();
    for (Var p : predict_gr(enc.word_states, tape.param(*gr_W_))) probs.push_back(values_of(p));
  }
  for (Var w : enc.word_attention) out.attention.word.push_back(values_of(w));
  for (Var w : enc.sentence_attention) out.attention.sentence.push_back(values_of(w));
  if (enc.paragraph_attention) out.attention.paragraph = values_of(*enc.paragraph_attention);
  return out;
}

json CoherenceModel::to_json() const {
  json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["config"] = config_;
  j["word_vocab"] = word_list_;
  if (gr_vocab_) {
    j["gr_vocab"] = {{"mode", data::to_string(gr_vocab_->mode())}, {"classes", gr_vocab_->classes()}};
  } else {
    j["gr_vocab"] = nullptr;
  }
  json params = json::array();
  for (const auto& p : params_) {
    auto v = p.tensor.values();
    params.push_back({{"name", p.name}, {"shape", p.tensor.shape()}, {"values", std::vector<double>(v.begin(), v.end())}});
  }
  j["parameters"] = std::move(params);
  return j;
}

CoherenceModel CoherenceModel::from_json(const json& j) {
  try {
    if (j.at("format") != kCheckpointFormat) throw DataError("not a coherence checkpoint");
    if (j.at("version") != kCheckpointVersion) {
      throw DataError("unsupported checkpoint version " + j.at("version").dump());
    }
    ModelConfig config = j.at("config").get<ModelConfig>();
    std::optional<data::GrVocabulary> gr;
    if (!j.at("gr_vocab").is_null()) {
      gr.emplace(data::parse_gr_mode(j["gr_vocab"].at("mode").get<std::string>()),
                 j["gr_vocab"].at("classes").get<std::vector<std::string>>());
    }
    CoherenceModel model(config, j.at("word_vocab").get<std::vector<std::string>>(), std::move(gr), 0);
    const auto& params = j.at("parameters");
    if (params.size() != model.params_.size()) {
      throw DataError("checkpoint has " + std::to_string(params.size()) + " parameters, model expects " +
                      std::to_string(model.params_.size()));
    }
    for (const auto& entry : params) {
      const auto name = entry.at("name").get<std::string>();
      Parameter* p = model.params_.find(name);
      if (!p) throw DataError("checkpoint parameter '" + name + "' is not part of the model");
      if (entry.at("shape").get<autograd::Shape>() != p->tensor.shape()) {
        throw DataError("checkpoint parameter '" + name + "' has shape " + entry.at("shape").dump() + ", expected " +
                        autograd::shape_string(p->tensor.shape()));
      }
      auto values = entry.at("values").get<std::vector<double>>();
      if (values.size() != p->tensor.size()) throw DataError("checkpoint parameter '" + name + "' has wrong size");
      std::copy(values.begin(), values.end(), p->tensor.mutable_values().begin());
    }
    return model;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  }
}

void CoherenceModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  out << to_json().dump() << '\n';
  if (!out) throw DataError("failed writing checkpoint " + path.string());
}

CoherenceModel CoherenceModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": malformed checkpoint: " + e.what());
  }
  return from_json(j);
}

}  // namespace coherence::model
