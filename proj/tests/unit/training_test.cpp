// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <sstream>

#include "doctest.h"

#include "coherence/autograd/ops.hpp"
#include "coherence/training/training.hpp"
#include "coherence/util/error.hpp"
#include "coherence/util/log.hpp"
#include "support/fixtures.hpp"

using namespace coherence;
using namespace coherence::training;
using autograd::Tape;
using autograd::Tensor;

namespace {

struct Quiet {
  log::ScopedSink sink{[](auto, const std::string&) {}};
};

TrainConfig quick_config(std::size_t epochs, std::uint64_t seed = 3) {
  TrainConfig c;
  c.epochs = epochs;
  c.batch_size = 4;
  c.seed = seed;
  c.learning_rate = 0.01;
  return c;
}

double gr_training_accuracy(model::CoherenceModel& m, const data::Corpus& corpus) {
  std::size_t hits = 0, total = 0;
  for (const auto& doc : corpus.documents) {
    auto probs = *m.predict(doc).gr_probs;
    auto gold = m.gr_targets(doc);
    for (std::size_t t = 0; t < gold.size(); ++t) {
      if (!gold[t]) continue;
      const auto& p = probs[t];
      hits += static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin()) == *gold[t];
      ++total;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace

TEST_CASE("TrainConfig defaults, validation and JSON") {
  TrainConfig c;
  CHECK(c.epochs == 30);
  CHECK(c.batch_size == 32);
  CHECK(c.learning_rate == 0.001);
  CHECK(c.dropout_rate == 0.5);
  c.validate();
  nlohmann::json j = c;
  CHECK(j.get<TrainConfig>() == c);
  auto bad = [](auto mutate) {
    TrainConfig b;
    mutate(b);
    return b;
  };
  CHECK_THROWS_AS(bad([](auto& b) { b.batch_size = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](auto& b) { b.epochs = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](auto& b) { b.dropout_rate = 1.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](auto& b) { b.learning_rate = 0.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(nlohmann::json({{"selection_metric", "f1"}}).get<TrainConfig>(), ConfigError);
  CHECK_THROWS_AS(nlohmann::json({{"lr", 0.1}}).get<TrainConfig>(), ConfigError);
}

TEST_CASE("rmsprop_update examples") {
  std::vector<double> theta{1.5, -2.0}, grad{0.0, 0.0}, acc{0.4, 0.0};
  rmsprop_update(theta, grad, acc, 0.001, 0.9, 1e-8);
  CHECK(theta == std::vector<double>{1.5, -2.0});
  CHECK(acc[0] == doctest::Approx(0.36).epsilon(1e-15));
  CHECK(acc[1] == 0.0);

  std::vector<double> t1{0.0}, g1{1.0}, a1{0.0};
  rmsprop_update(t1, g1, a1, 0.001, 0.9, 1e-8);
  CHECK(-t1[0] == doctest::Approx(0.001 / (std::sqrt(0.1) + 1e-8)).epsilon(1e-15));
  CHECK(-t1[0] == doctest::Approx(0.0031623).epsilon(1e-5));

  std::vector<double> short_grad{1.0};
  CHECK_THROWS_AS(rmsprop_update(theta, short_grad, acc, 0.001, 0.9, 1e-8), ShapeError);
}

TEST_CASE("rmsprop_step follows a scalar reference on a quadratic") {
  autograd::ParameterStore store;
  auto& p = store.add("theta", Tensor::scalar(0.5));
  RmspropState state(store);
  TrainConfig cfg;
  cfg.learning_rate = 0.05;

  // Independent scalar implementation.
  double theta = 0.5, acc = 0.0;
  for (int step = 0; step < 10; ++step) {
    Tape tape;
    auto d = autograd::shift(tape.param(p), -3.0);
    tape.backward(autograd::sum(autograd::mul(d, d)));
    rmsprop_step(store, state, cfg);
    for (double g : p.tensor.grad()) CHECK(g == 0.0);

    const double g = 2.0 * (theta - 3.0);
    acc = 0.9 * acc + 0.1 * g * g;
    theta = theta - 0.05 * g / (std::sqrt(acc) + 1e-8);
    CHECK(p.tensor[0] == doctest::Approx(theta).epsilon(1e-14));
    CHECK(state.accumulator(0)[0] >= 0.0);
  }
}

TEST_CASE("frozen parameters are not updated") {
  autograd::ParameterStore store;
  auto& p = store.add("frozen", Tensor::scalar(1.0), false);
  RmspropState state(store);
  p.tensor.mutable_grad()[0] = 5.0;
  rmsprop_step(store, state, TrainConfig{});
  CHECK(p.tensor[0] == 1.0);
}

TEST_CASE("batch gradient is the mean of per-document gradients") {
  Quiet q;
  auto corpus = testing::tiny_corpus();
  auto m = model::CoherenceModel::build(testing::tiny_config(model::Variant::kMtl), corpus, 4);
  std::vector<std::vector<double>> sum;
  double loss_sum = 0;
  for (const auto& doc : corpus.documents) {
    m.params().zero_grads();
    Tape tape;
    auto loss = m.loss(tape, doc).total;
    loss_sum += loss.item();
    tape.backward(loss);
    std::size_t i = 0;
    for (const auto& p : m.params()) {
      if (sum.size() <= i) sum.emplace_back(p.tensor.size(), 0.0);
      for (std::size_t k = 0; k < p.tensor.size(); ++k) sum[i][k] += p.tensor.grad()[k];
      ++i;
    }
  }
  m.params().zero_grads();
  std::vector<const data::Document*> batch{&corpus.documents[0], &corpus.documents[1]};
  const double mean_loss = batch_gradient(m, batch, nullptr);
  CHECK(mean_loss == doctest::Approx(loss_sum / 2).epsilon(1e-15));
  std::size_t i = 0;
  for (const auto& p : m.params()) {
    for (std::size_t k = 0; k < p.tensor.size(); ++k) {
      CHECK(p.tensor.grad()[k] == doctest::Approx(sum[i][k] / 2).epsilon(1e-13));
    }
    ++i;
  }
}

TEST_CASE("training is deterministic") {
  Quiet q;
  auto corpus = testing::with_permutations(data::synth_corpus({}), 2, 1);
  auto cfg = testing::tiny_config(model::Variant::kMtl);
  auto a = train(corpus, corpus, cfg, quick_config(3));
  auto b = train(corpus, corpus, cfg, quick_config(3));
  CHECK(a.history == b.history);
  CHECK(a.model.to_json() == b.model.to_json());
  auto c = train(corpus, corpus, cfg, quick_config(3, 4));
  CHECK_FALSE(a.history == c.history);
  CHECK(a.history.size() == 3);
  CHECK(a.history[0].subject_f1.has_value());
  CHECK(a.best_dev_metric == std::max({a.history[0].dev_metric, a.history[1].dev_metric, a.history[2].dev_metric}));
}

TEST_CASE("best checkpoint is the earliest epoch with the top dev metric") {
  Quiet q;
  auto corpus = testing::with_permutations(data::synth_corpus({}), 2, 1);
  std::vector<std::string> snapshots;
  auto r = train(corpus, corpus, testing::tiny_config(model::Variant::kStl), quick_config(4),
                 nullptr, [&](const EpochRecord&, model::CoherenceModel& m) {
                   snapshots.push_back(m.to_json().dump());
                   return true;
                 });
  std::size_t expected = 0;
  for (std::size_t e = 0; e < r.history.size(); ++e) {
    if (r.history[e].dev_metric > r.history[expected].dev_metric) expected = e;
  }
  CHECK(r.best_epoch == expected + 1);
  CHECK(r.model.to_json().dump() == snapshots[expected]);
}

TEST_CASE("MTL with beta = 0 reproduces STL") {
  Quiet q;
  auto corpus = testing::with_permutations(data::synth_corpus({}), 2, 1);
  auto stl_cfg = testing::tiny_config(model::Variant::kStl);
  auto mtl_cfg = testing::tiny_config(model::Variant::kMtl);
  mtl_cfg.beta = 0.0;
  auto stl = train(corpus, corpus, stl_cfg, quick_config(4));
  auto mtl = train(corpus, corpus, mtl_cfg, quick_config(4));
  REQUIRE(stl.history.size() == mtl.history.size());
  for (std::size_t e = 0; e < stl.history.size(); ++e) {
    CHECK(stl.history[e].train_loss == mtl.history[e].train_loss);
    CHECK(stl.history[e].dev_metric == mtl.history[e].dev_metric);
  }
  for (const auto& p : stl.model.params()) {
    const auto& other = mtl.model.params().get(p.name).tensor.values();
    CHECK(std::equal(p.tensor.values().begin(), p.tensor.values().end(), other.begin()));
  }
}

TEST_CASE("history CSV") {
  std::vector<EpochRecord> h{{1, 0.5, 0.75, std::nullopt, std::nullopt}, {2, 0.25, 1.0, 0.5, 0.125}};
  std::ostringstream out;
  write_history_csv(out, h);
  CHECK(out.str() == "epoch,train_loss,dev_metric,subject_f1,object_f1\n1,0.5,0.75,,\n2,0.25,1,0.5,0.125\n");
}

TEST_CASE("training preconditions") {
  Quiet q;
  auto corpus = testing::tiny_corpus();
  auto mtl = testing::tiny_config(model::Variant::kMtl);
  CHECK_THROWS_AS(train(data::Corpus{}, corpus, mtl, quick_config(1)), DataError);
  CHECK_THROWS_AS(train(corpus, data::Corpus{}, mtl, quick_config(1)), DataError);
  auto unlabeled = corpus;
  unlabeled.documents[0].paragraphs[0][0][0].gr.reset();
  CHECK_THROWS_AS(train(unlabeled, corpus, mtl, quick_config(1)), DataError);
  CHECK_NOTHROW(train(unlabeled, corpus, testing::tiny_config(model::Variant::kStl), quick_config(1)));
  auto originals_only = data::synth_corpus({});
  CHECK_THROWS_AS(train(originals_only, originals_only, testing::tiny_config(model::Variant::kStl), quick_config(1)),
                  DataError);
}

TEST_CASE("non-finite losses raise NumericError") {
  Quiet q;
  auto corpus = testing::tiny_corpus();
  auto m = model::CoherenceModel::build(testing::tiny_config(model::Variant::kStl), corpus, 1);
  m.params().get("score.W").tensor[0] = std::nan("");
  std::vector<const data::Document*> batch{&corpus.documents[0]};
  CHECK_THROWS_AS(batch_gradient(m, batch, nullptr), NumericError);
}

TEST_CASE("ensemble_predict") {
  Quiet q;
  auto corpus = testing::tiny_corpus();
  const auto& doc = corpus.documents[0];
  std::vector<model::CoherenceModel> one;
  one.push_back(model::CoherenceModel::build(testing::tiny_config(model::Variant::kStl), corpus, 1));
  CHECK(ensemble_predict(one, doc) == one[0].predict(doc).score);

  std::vector<model::CoherenceModel> two;
  two.push_back(model::CoherenceModel::build(testing::tiny_config(model::Variant::kStl), corpus, 1));
  two.push_back(model::CoherenceModel::build(testing::tiny_config(model::Variant::kStl), corpus, 2));
  const double a = two[0].predict(doc).score[0], b = two[1].predict(doc).score[0];
  CHECK(ensemble_predict(two, doc)[0] == doctest::Approx((a + b) / 2).epsilon(1e-15));

  std::vector<model::CoherenceModel> five;
  const auto snapshot = one[0].to_json();
  for (int i = 0; i < 5; ++i) five.push_back(model::CoherenceModel::from_json(snapshot));
  CHECK(ensemble_predict(five, doc) == one[0].predict(doc).score);

  two.push_back(model::CoherenceModel::build(testing::tiny_config(model::Variant::kMtl), corpus, 1));
  CHECK_THROWS_AS(ensemble_predict(two, doc), ConfigError);
  CHECK_THROWS_AS(ensemble_predict(std::span<model::CoherenceModel>{}, doc), Error);
}

TEST_CASE("STL overfits the synthetic corpus") {
  Quiet q;
  auto corpus = testing::overfit_corpus();
  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.dropout_rate = 0.0;
  cfg.epochs = 200;
  // Train until the corpus is ranked perfectly and the loss is small.
  auto r = train(corpus, corpus, testing::overfit_model_config(model::Variant::kStl), cfg, nullptr,
                 [](const EpochRecord& e, model::CoherenceModel&) { return !(e.dev_metric == 1.0 && e.train_loss < 0.05); });
  // A blip is an epoch whose loss rises by more than kBlip over the previous
  // one; smaller rises are minibatch noise.
  constexpr double kBlip = 0.01;
  std::size_t blips = 0;
  for (std::size_t e = 1; e < r.history.size(); ++e) {
    if (r.history[e].train_loss > r.history[e - 1].train_loss + kBlip) ++blips;
  }
  CHECK(r.history.size() < 200);
  CHECK(r.best_dev_metric == 1.0);
  CHECK(blips <= 5);
  CHECK(r.history.back().train_loss < 0.05);
}

TEST_CASE("MTL learns the deterministic GR assignment") {
  Quiet q;
  data::SynthSpec spec;
  spec.num_docs = 5;
  auto corpus = testing::with_permutations(data::synth_corpus(spec), 2, 1);
  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.dropout_rate = 0.0;
  cfg.epochs = 40;
  cfg.batch_size = 8;
  auto r = train(corpus, corpus, testing::overfit_model_config(model::Variant::kMtl), cfg);
  CHECK(gr_training_accuracy(r.model, corpus) >= 0.95);
}
