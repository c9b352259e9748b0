// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#include "coherence/autograd/tape.hpp"

#include <algorithm>

#include "coherence/util/error.hpp"

namespace coherence::autograd {

const Tensor& Var::value() const {
  if (tape == nullptr) throw Error("use of a Var that is not attached to a tape");
  return tape->value(id);
}

const Tensor& BackwardContext::out() const { return tape_.value(node_); }

std::span<const double> BackwardContext::out_grad() const { return tape_.nodes_[node_].grad; }

std::size_t BackwardContext::num_inputs() const { return tape_.nodes_[node_].inputs.size(); }

const Tensor& BackwardContext::in(std::size_t k) const {
  return tape_.value(tape_.nodes_[node_].inputs[k]);
}

std::span<double> BackwardContext::in_grad(std::size_t k) {
  return tape_.grad_sink(tape_.nodes_[node_].inputs[k]);
}

Var Tape::constant(Tensor value) {
  value.set_requires_grad(false);
  nodes_.push_back(Node{std::move(value), {}, {}, {}, nullptr, false});
  return Var{this, nodes_.size() - 1};
}

Var Tape::input(Tensor value, bool requires_grad) {
  nodes_.push_back(Node{std::move(value), {}, {}, {}, nullptr, requires_grad});
  return Var{this, nodes_.size() - 1};
}

Var Tape::param(Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var{this, it->second};
  nodes_.push_back(Node{Tensor{}, {}, {}, {}, &p, p.trainable});
  param_nodes_.emplace(&p, nodes_.size() - 1);
  return Var{this, nodes_.size() - 1};
}

Var Tape::record(Tensor value, std::vector<std::size_t> inputs, BackwardFn backward) {
  bool needs = false;
  for (auto in : inputs) {
    if (in >= nodes_.size()) throw Error("op input refers to a node not on this tape");
    needs = needs || nodes_[in].needs_grad;
  }
  nodes_.push_back(Node{std::move(value), {}, std::move(inputs), std::move(backward), nullptr, needs});
  return Var{this, nodes_.size() - 1};
}

std::span<double> Tape::grad_sink(std::size_t id) {
  Node& n = nodes_[id];
  if (!n.needs_grad) return {};
  if (n.param != nullptr) return n.param->tensor.mutable_grad();
  return n.grad;
}

std::span<const double> Tape::grad(Var v) const {
  const Node& n = nodes_.at(v.id);
  if (!n.needs_grad) return {};
  if (n.param != nullptr) return n.param->tensor.grad();
  return n.grad;
}

void Tape::backward(Var loss) {
  if (loss.tape != this || loss.id >= nodes_.size()) {
    throw Error("backward: loss is not attached to this tape");
  }
  if (value(loss.id).size() != 1) {
    throw ShapeError("backward: loss must be a scalar, got shape " +
                     shape_string(value(loss.id).shape()));
  }
  for (auto& n : nodes_) {
    if (n.needs_grad && n.param == nullptr) {
      n.grad.assign(n.value.size(), 0.0);
    } else {
      n.grad.clear();
    }
  }
  visits_ = 0;
  if (!nodes_[loss.id].needs_grad) {
    visits_ = loss.id + 1;
    return;
  }
  grad_sink(loss.id)[0] += 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    ++visits_;
    Node& n = nodes_[i];
    if (!n.needs_grad || !n.backward) continue;
    BackwardContext ctx(*this, i);
    n.backward(ctx);
  }
}

}  // namespace coherence::autograd
