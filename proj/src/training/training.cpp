// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#include "coherence/training/training.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <set>

#include "coherence/autograd/ops.hpp"
#include "coherence/data/gr_vocabulary.hpp"
#include "coherence/evaluation/metrics.hpp"
#include "coherence/evaluation/report.hpp"
#include "coherence/util/error.hpp"
#include "coherence/util/log.hpp"
#include "coherence/util/rng.hpp"

namespace coherence::training {

using nlohmann::json;

namespace {

constexpr std::uint64_t kShuffleStream = 1;
constexpr std::uint64_t kDropoutStream = 2;

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    j.at(key).get_to(out);
  } catch (const json::exception&) {
    throw ConfigError(std::string("train.") + key + ": wrong type");
  }
}

}  // namespace

std::string_view to_string(SelectionMetric m) { return m == SelectionMetric::kPra ? "pra" : "accuracy"; }

SelectionMetric parse_selection_metric(std::string_view text) {
  if (text == "pra") return SelectionMetric::kPra;
  if (text == "accuracy") return SelectionMetric::kAccuracy;
  throw ConfigError("train.selection_metric: expected pra or accuracy, got '" + std::string(text) + "'");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("train.learning_rate: must be positive");
  if (batch_size == 0) throw ConfigError("train.batch_size: must be at least 1");
  if (epochs == 0) throw ConfigError("train.epochs: must be at least 1");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("train.dropout_rate: must lie in [0, 1)");
  if (!(rmsprop_decay >= 0.0 && rmsprop_decay < 1.0)) throw ConfigError("train.rmsprop_decay: must lie in [0, 1)");
  if (!(rmsprop_epsilon > 0.0)) throw ConfigError("train.rmsprop_epsilon: must be positive");
  if (ensemble_runs == 0) throw ConfigError("train.ensemble_runs: must be at least 1");
}

void to_json(json& j, const TrainConfig& c) {
  j = json{{"learning_rate", c.learning_rate},     {"batch_size", c.batch_size},
           {"epochs", c.epochs},                   {"dropout_rate", c.dropout_rate},
           {"rmsprop_decay", c.rmsprop_decay},     {"rmsprop_epsilon", c.rmsprop_epsilon},
           {"seed", c.seed},                       {"selection_metric", to_string(c.selection_metric)},
           {"ensemble_runs", c.ensemble_runs}};
}

void from_json(const json& j, TrainConfig& c) {
  if (!j.is_object()) throw ConfigError("train: expected an object");
  static const std::set<std::string> known{"learning_rate", "batch_size",      "epochs",
                                           "dropout_rate",  "rmsprop_decay",   "rmsprop_epsilon",
                                           "seed",          "selection_metric", "ensemble_runs"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("train." + key + ": unknown field");
  }
  read_field(j, "learning_rate", c.learning_rate);
  read_field(j, "batch_size", c.batch_size);
  read_field(j, "epochs", c.epochs);
  read_field(j, "dropout_rate", c.dropout_rate);
  read_field(j, "rmsprop_decay", c.rmsprop_decay);
  read_field(j, "rmsprop_epsilon", c.rmsprop_epsilon);
  read_field(j, "seed", c.seed);
  read_field(j, "ensemble_runs", c.ensemble_runs);
  if (j.contains("selection_metric")) {
    std::string text;
    read_field(j, "selection_metric", text);
    c.selection_metric = parse_selection_metric(text);
  }
}

RmspropState::RmspropState(const autograd::ParameterStore& params) {
  for (const auto& p : params) acc_.emplace_back(p.tensor.size(), 0.0);
}

void rmsprop_update(std::span<double> theta, std::span<const double> grad, std::span<double> acc, double lr,
                    double rho, double eps) {
  if (theta.size() != grad.size() || theta.size() != acc.size()) {
    throw ShapeError("rmsprop_update: sizes " + std::to_string(theta.size()) + ", " + std::to_string(grad.size()) +
                     ", " + std::to_string(acc.size()) + " do not align");
  }
  for (std::size_t i = 0; i < theta.size(); ++i) {
    acc[i] = rho * acc[i] + (1.0 - rho) * grad[i] * grad[i];
    theta[i] -= lr * grad[i] / (std::sqrt(acc[i]) + eps);
  }
}

void rmsprop_step(autograd::ParameterStore& params, RmspropState& state, const TrainConfig& cfg) {
  if (state.size() != params.size()) throw ShapeError("rmsprop_step: optimizer state does not match the parameters");
  std::size_t i = 0;
  for (auto& p : params) {
    auto acc = state.accumulator(i++);
    if (!p.trainable || !p.tensor.has_grad()) continue;
    rmsprop_update(p.tensor.mutable_values(), p.tensor.grad(), acc, cfg.learning_rate, cfg.rmsprop_decay,
                   cfg.rmsprop_epsilon);
  }
  params.zero_grads();
}

double batch_gradient(model::CoherenceModel& model, std::span<const data::Document* const> batch,
                      layers::Dropout* dropout) {
  if (batch.empty()) throw Error("batch_gradient: empty batch");
  model::EncodeOptions options;
  options.dropout = dropout;
  double total = 0;
  for (const auto* doc : batch) {
    autograd::Tape tape;
    auto loss = model.loss(tape, *doc, options).total;
    const double value = loss.item();
    if (!std::isfinite(value)) throw NumericError("non-finite loss on document '" + doc->id + "'");
    tape.backward(loss);
    total += value;
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (auto& p : model.params()) {
    if (!p.tensor.has_grad()) continue;
    for (auto& g : p.tensor.mutable_grad()) g *= inv;
  }
  return total * inv;
}

void write_history_csv(std::ostream& out, std::span<const EpochRecord> history) {
  out << "epoch,train_loss,dev_metric,subject_f1,object_f1\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const auto& r : history) {
    out << r.epoch << ',' << num(r.train_loss) << ',' << num(r.dev_metric) << ','
        << (r.subject_f1 ? num(*r.subject_f1) : "") << ',' << (r.object_f1 ? num(*r.object_f1) : "") << '\n';
  }
}

double dev_metric(model::CoherenceModel& model, const data::Corpus& dev, SelectionMetric metric) {
  std::vector<evaluation::DocumentScores> scores;
  scores.reserve(dev.size());
  for (const auto& doc : dev.documents) scores.push_back({model.predict(doc).score, {}});
  if (metric == SelectionMetric::kPra) {
    auto groups = evaluation::scored_groups(dev, scores);
    if (groups.empty()) throw DataError("dev corpus has no original/permutation pairs to compute PRA");
    return evaluation::pra(groups);
  }
  return *evaluation::evaluate(dev, scores, {"accuracy"}).accuracy;
}

namespace {

// Subject and object F1 of the GR head on the dev set, after reducing gold
// and predicted relations to S/O/X.
std::pair<double, double> subject_object_f1(model::CoherenceModel& model, const data::Corpus& dev) {
  const auto& vocab = *model.gr_vocab();
  std::vector<std::string> gold, pred;
  for (const auto& doc : dev.documents) {
    auto probs = *model.predict(doc).gr_probs;
    std::size_t t = 0;
    for (const auto* s : doc.sentences())
      for (const auto& token : *s) {
        const auto& p = probs[t++];
        if (!token.gr) continue;
        const auto cls = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
        const auto& name = vocab.name(cls);
        gold.emplace_back(data::reduce_sox(*token.gr));
        pred.emplace_back(vocab.mode() == data::GrVocabulary::Mode::kSox ? std::string_view(name)
                                                                         : data::reduce_sox(name));
      }
  }
  return {evaluation::f1_per_class(gold, pred, "S").f1, evaluation::f1_per_class(gold, pred, "O").f1};
}

std::vector<std::vector<double>> snapshot(const autograd::ParameterStore& params) {
  std::vector<std::vector<double>> out;
  for (const auto& p : params) out.emplace_back(p.tensor.values().begin(), p.tensor.values().end());
  return out;
}

void restore(autograd::ParameterStore& params, const std::vector<std::vector<double>>& values) {
  std::size_t i = 0;
  for (auto& p : params) {
    std::copy(values[i].begin(), values[i].end(), p.tensor.mutable_values().begin());
    ++i;
  }
}

}  // namespace

TrainResult train(const data::Corpus& train_corpus, const data::Corpus& dev, const model::ModelConfig& model_cfg,
                  const TrainConfig& cfg, const data::EmbeddingMatrix* pretrained, const EpochCallback& on_epoch) {
  cfg.validate();
  if (train_corpus.empty()) throw DataError("training corpus is empty");
  if (dev.empty()) throw DataError("dev corpus is empty");
  const bool needs_gr = model::has_gr_head(model_cfg.variant) || model::uses_gr_inputs(model_cfg.variant);
  if (needs_gr && !train_corpus.all_tokens_have_gr()) {
    throw DataError("variant " + std::string(model::to_string(model_cfg.variant)) +
                    " needs a GR label on every training token");
  }

  auto model = model::CoherenceModel::build(model_cfg, train_corpus, cfg.seed, pretrained);
  RmspropState state(model.params());
  Rng shuffle_rng(Rng::derive(cfg.seed, kShuffleStream));
  layers::Dropout dropout({cfg.dropout_rate, Rng::derive(cfg.seed, kDropoutStream).next()});

  std::vector<const data::Document*> order;
  for (const auto& d : train_corpus.documents) order.push_back(&d);

  std::vector<EpochRecord> history;
  std::vector<std::vector<double>> best_params = snapshot(model.params());
  std::size_t best_epoch = 0;
  double best_metric = -1.0;
  model.params().zero_grads();
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    double loss_sum = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t n = std::min(cfg.batch_size, order.size() - start);
      std::span<const data::Document* const> batch(order.data() + start, n);
      loss_sum += batch_gradient(model, batch, &dropout) * static_cast<double>(n);
      rmsprop_step(model.params(), state, cfg);
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(order.size());
    record.dev_metric = dev_metric(model, dev, cfg.selection_metric);
    if (model::has_gr_head(model_cfg.variant)) {
      auto [s, o] = subject_object_f1(model, dev);
      record.subject_f1 = s;
      record.object_f1 = o;
    }
    history.push_back(record);
    if (record.dev_metric > best_metric) {
      best_metric = record.dev_metric;
      best_epoch = epoch;
      best_params = snapshot(model.params());
    }
    log::info("epoch " + std::to_string(epoch) + " loss " + std::to_string(record.train_loss) + " dev " +
              std::to_string(record.dev_metric));
    if (on_epoch && !on_epoch(record, model)) break;
  }
  restore(model.params(), best_params);
  return {std::move(model), std::move(history), best_epoch, best_metric};
}

std::vector<double> ensemble_predict(std::span<model::CoherenceModel> models, const data::Document& doc) {
  if (models.empty()) throw Error("ensemble_predict: no models");
  for (const auto& m : models) {
    if (!(m.config() == models.front().config())) throw ConfigError("ensemble_predict: models have different configs");
  }
  // Running mean: exact when every model agrees.
  std::vector<double> mean;
  std::size_t k = 0;
  for (auto& m : models) {
    const auto s = m.predict(doc).score;
    if (k++ == 0) {
      mean = s;
      continue;
    }
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += (s[i] - mean[i]) / static_cast<double>(k);
  }
  return mean;
}

}  // namespace coherence::training
