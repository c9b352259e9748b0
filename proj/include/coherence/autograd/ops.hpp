// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "coherence/autograd/tape.hpp"

namespace coherence::autograd {

// Differentiable ops. Every op records its result on the tape of its inputs
// together with the exact local gradient. Inputs must share one tape.
//
// Broadcasting is limited to add() of a last-axis bias vector; every other
// shape disagreement throws ShapeError naming both shapes.

// [m x k] . [k x n] -> [m x n]
Var matmul(Var a, Var b);
// [m x k] . [k] -> [m]
Var matvec(Var w, Var x);
// sum_k W_k . x_k (+ bias), fused into one node.
Var affine(std::span<const std::pair<Var, Var>> terms, std::optional<Var> bias = std::nullopt);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var shift(Var a, double offset);

Var tanh(Var a);
Var sigmoid(Var a);
Var log(Var a);
// Gradient passes only where lo <= a <= hi.
Var clamp(Var a, double lo, double hi);

Var concat(std::span<const Var> parts);
inline Var concat(std::initializer_list<Var> parts) {
  return concat(std::span<const Var>(parts.begin(), parts.size()));
}
Var sum(Var a);
Var mean(Var a);

// Max-subtracted softmax / log-softmax over a non-empty vector.
Var softmax(Var a);
Var log_softmax(Var a);

// Element i of a vector as a scalar.
Var pick(Var a, std::size_t i);
// Rows of equal length -> [n x d].
Var stack(std::span<const Var> rows);
// Row i of a matrix -> [cols]. Backward touches only that row.
Var row(Var m, std::size_t i);
// Elements [begin, begin + length) of a vector.
Var slice(Var a, std::size_t begin, std::size_t length);
Var transpose(Var m);
Var reshape(Var a, Shape shape);

// Name-dispatched form of the elementwise/reduction ops: tanh, sigmoid, add,
// mul, scale (uses factor), concat_last_axis, sum, mean. Unknown names and
// wrong arities throw Error.
Var pointwise(std::string_view op, std::span<const Var> inputs, double factor = 1.0);

}  // namespace coherence::autograd
