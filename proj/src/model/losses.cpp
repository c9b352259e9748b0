// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#include "coherence/model/losses.hpp"

#include <string>

#include "coherence/autograd/ops.hpp"
#include "coherence/util/error.hpp"
#include "coherence/util/log.hpp"

namespace coherence::model {

namespace ops = autograd;

Var loss_binary(Var y_hat, int y) {
  if (y_hat.size() != 1) throw ShapeError("loss_binary: expected a scalar score, got " + std::to_string(y_hat.size()));
  if (y != 0 && y != 1) throw Error("loss_binary: label must be 0 or 1, got " + std::to_string(y));
  Var p = ops::clamp(ops::reshape(y_hat, {1}), kScoreClamp, 1.0 - kScoreClamp);
  if (y == 0) p = ops::shift(ops::scale(p, -1.0), 1.0);
  return ops::scale(ops::log(p), -1.0);
}

Var loss_multiclass(Var y_hat, std::span<const double> y) {
  if (y_hat.size() != y.size()) {
    throw ShapeError("loss_multiclass: " + std::to_string(y_hat.size()) + " scores vs " + std::to_string(y.size()) +
                     " targets");
  }
  std::size_t ones = 0;
  for (double v : y) {
    if (v == 1.0) {
      ++ones;
    } else if (v != 0.0) {
      ones = 2;
    }
  }
  if (ones != 1) throw Error("loss_multiclass: target is not one-hot");
  Var target = y_hat.tape->constant(autograd::Tensor(y_hat.shape(), {y.begin(), y.end()}));
  Var diff = ops::sub(y_hat, target);
  return ops::mean(ops::mul(diff, diff));
}

Var loss_gr(Tape& tape, std::span<const Var> log_probs, std::span<const std::optional<std::size_t>> gold) {
  if (log_probs.size() != gold.size()) {
    throw ShapeError("loss_gr: " + std::to_string(log_probs.size()) + " predictions vs " +
                     std::to_string(gold.size()) + " gold labels");
  }
  std::vector<Var> picked;
  for (std::size_t t = 0; t < gold.size(); ++t) {
    if (!gold[t]) continue;
    if (*gold[t] >= log_probs[t].size()) {
      throw Error("loss_gr: gold class " + std::to_string(*gold[t]) + " outside a vocabulary of " +
                  std::to_string(log_probs[t].size()));
    }
    picked.push_back(ops::pick(log_probs[t], *gold[t]));
  }
  if (picked.empty()) {
    log::warn("loss_gr: every word is masked; GR loss is 0");
    return tape.constant(autograd::Tensor::scalar(0.0));
  }
  return ops::scale(ops::sum(ops::concat(picked)), -1.0);
}

namespace {

void check_weights(double alpha, double beta) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("loss_total: alpha must lie in [0, 1]");
  if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("loss_total: beta must lie in [0, 1]");
}

}  // namespace

Var loss_total(Var l1, std::optional<Var> l2, double alpha, double beta) {
  check_weights(alpha, beta);
  Var main = ops::scale(l1, alpha);
  if (!l2) return main;
  return ops::add(main, ops::scale(*l2, beta));
}

double loss_total(double l1, double l2, double alpha, double beta) {
  check_weights(alpha, beta);
  return alpha * l1 + beta * l2;
}

}  // namespace coherence::model
