// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"

#include "coherence/autograd/tensor.hpp"
#include "coherence/data/corpus.hpp"
#include "coherence/data/embeddings.hpp"
#include "coherence/layers/layers.hpp"
#include "coherence/model/model.hpp"

namespace coherence::training {

enum class SelectionMetric { kPra, kAccuracy };

std::string_view to_string(SelectionMetric m);
SelectionMetric parse_selection_metric(std::string_view text);

struct TrainConfig {
  double learning_rate = 0.001;
  std::size_t batch_size = 32;
  std::size_t epochs = 30;
  double dropout_rate = 0.5;
  double rmsprop_decay = 0.9;
  double rmsprop_epsilon = 1e-8;
  std::uint64_t seed = 1;
  SelectionMetric selection_metric = SelectionMetric::kPra;
  std::size_t ensemble_runs = 1;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

// One zero-initialized accumulator per parameter, in store order.
class RmspropState {
 public:
  explicit RmspropState(const autograd::ParameterStore& params);

  std::size_t size() const { return acc_.size(); }
  std::span<const double> accumulator(std::size_t i) const { return acc_.at(i); }
  std::span<double> accumulator(std::size_t i) { return acc_.at(i); }

 private:
  std::vector<std::vector<double>> acc_;
};

// acc <- rho acc + (1 - rho) g^2; theta <- theta - lr g / (sqrt(acc) + eps).
void rmsprop_update(std::span<double> theta, std::span<const double> grad, std::span<double> acc, double lr,
                    double rho, double eps);

// Applies rmsprop_update to every trainable parameter using its gradient,
// then zeroes the gradients.
void rmsprop_step(autograd::ParameterStore& params, RmspropState& state, const TrainConfig& cfg);

// Leaves the mean of the documents' L_total gradients in the parameter
// gradients and returns the mean loss. Throws NumericError on a non-finite
// loss.
double batch_gradient(model::CoherenceModel& model, std::span<const data::Document* const> batch,
                      layers::Dropout* dropout);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double dev_metric = 0.0;
  std::optional<double> subject_f1;
  std::optional<double> object_f1;

  bool operator==(const EpochRecord&) const = default;
};

void write_history_csv(std::ostream& out, std::span<const EpochRecord> history);

// Called after each epoch with the current (not the best) model; returning
// false ends training early.
using EpochCallback = std::function<bool(const EpochRecord&, model::CoherenceModel&)>;

struct TrainResult {
  model::CoherenceModel model;  // parameters of the best dev epoch
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_dev_metric = 0.0;
};

// PRA over original/permutation pairs, or classification accuracy.
double dev_metric(model::CoherenceModel& model, const data::Corpus& dev, SelectionMetric metric);

TrainResult train(const data::Corpus& train_corpus, const data::Corpus& dev, const model::ModelConfig& model_cfg,
                  const TrainConfig& train_cfg, const data::EmbeddingMatrix* pretrained = nullptr,
                  const EpochCallback& on_epoch = {});

// Mean of the models' score vectors. All models must share one config.
std::vector<double> ensemble_predict(std::span<model::CoherenceModel> models, const data::Document& doc);

}  // namespace coherence::training
