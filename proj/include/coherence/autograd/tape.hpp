// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "coherence/autograd/tensor.hpp"

namespace coherence::autograd {

class Tape;

// Handle to a value recorded on a tape. Cheap to copy; valid as long as the
// tape is alive.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t size() const { return value().size(); }
  double item() const { return value().item(); }
};

// View handed to an op's backward closure.
class BackwardContext {
 public:
  BackwardContext(Tape& tape, std::size_t node) : tape_(tape), node_(node) {}

  const Tensor& out() const;
  std::span<const double> out_grad() const;
  std::size_t num_inputs() const;
  const Tensor& in(std::size_t k) const;
  // Empty when input k does not need a gradient.
  std::span<double> in_grad(std::size_t k);

 private:
  Tape& tape_;
  std::size_t node_;
};

using BackwardFn = std::function<void(BackwardContext&)>;

// Linear record of executed ops. Nodes are appended in execution order, so
// every node's inputs precede it and a reverse sweep is a valid reverse
// topological order. Parameter leaves read the parameter's values in place
// (parameters must not be modified while a tape that uses them is alive) and
// write their gradients straight into its grad buffer, accumulating.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var input(Tensor value, bool requires_grad);
  // One leaf per parameter per tape; repeated calls return the same Var.
  Var param(Parameter& p);

  // For op implementations.
  Var record(Tensor value, std::vector<std::size_t> inputs, BackwardFn backward);

  const Tensor& value(std::size_t id) const {
    const Node& n = nodes_.at(id);
    return n.param != nullptr ? n.param->tensor : n.value;
  }
  bool needs_grad(std::size_t id) const { return nodes_.at(id).needs_grad; }

  // Gradient of the last backward() with respect to a recorded value; empty
  // when the node does not need one.
  std::span<const double> grad(Var v) const;

  // Reverse sweep from a scalar loss. Intermediate gradients are reset on
  // each call; parameter gradients accumulate across calls.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }
  // Node visits performed by the most recent backward().
  std::size_t backward_visits() const { return visits_; }

 private:
  friend class BackwardContext;

  struct Node {
    Tensor value;
    std::vector<double> grad;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    Parameter* param = nullptr;
    bool needs_grad = false;
  };

  std::span<double> grad_sink(std::size_t id);

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> param_nodes_;
  std::size_t visits_ = 0;
};

}  // namespace coherence::autograd
