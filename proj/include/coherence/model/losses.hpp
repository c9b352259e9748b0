// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>

#include "coherence/autograd/tape.hpp"

namespace coherence::model {

using autograd::Tape;
using autograd::Var;

inline constexpr double kScoreClamp = 1e-7;

// Negative log-likelihood of a binary label; y_hat is clamped to
// [1e-7, 1 - 1e-7] first.
Var loss_binary(Var y_hat, int y);

// Mean squared error against a one-hot target.
Var loss_multiclass(Var y_hat, std::span<const double> y);

// -sum_t log P(gold_t) over the words that have a gold class. log_probs[t]
// is the log-softmax output for word t. Returns 0 (with a warning) when every
// word is masked.
Var loss_gr(Tape& tape, std::span<const Var> log_probs, std::span<const std::optional<std::size_t>> gold);

// alpha * L1 + beta * L2, or alpha * L1 alone when there is no GR loss.
Var loss_total(Var l1, std::optional<Var> l2, double alpha, double beta);
double loss_total(double l1, double l2, double alpha, double beta);

}  // namespace coherence::model
