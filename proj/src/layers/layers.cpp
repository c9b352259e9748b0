// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#include "coherence/layers/layers.hpp"

#include <cmath>

#include "coherence/util/error.hpp"

namespace coherence::layers {

namespace ag = coherence::autograd;

Tensor glorot_uniform(Rng& rng, std::size_t rows, std::size_t cols) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Tensor t(ag::Shape{rows, cols});
  for (auto& v : t.mutable_values()) v = rng.uniform(-limit, limit);
  return t;
}

LstmParams LstmParams::create(ParameterStore& store, const std::string& prefix, std::size_t input_dim,
                              std::size_t hidden_dim, Rng& init) {
  if (input_dim == 0 || hidden_dim == 0) throw ConfigError("LSTM dimensions must be positive");
  LstmParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  Parameter** input_mats[] = {&p.W_ii, &p.W_if, &p.W_ig, &p.W_io};
  Parameter** hidden_mats[] = {&p.W_hi, &p.W_hf, &p.W_hg, &p.W_ho};
  Parameter** biases[] = {&p.b_i, &p.b_f, &p.b_g, &p.b_o};
  const char* gates = "ifgo";
  for (int g = 0; g < 4; ++g)
    *input_mats[g] = &store.add(prefix + ".W_i" + gates[g], glorot_uniform(init, hidden_dim, input_dim));
  for (int g = 0; g < 4; ++g)
    *hidden_mats[g] = &store.add(prefix + ".W_h" + gates[g], glorot_uniform(init, hidden_dim, hidden_dim));
  for (int g = 0; g < 4; ++g) *biases[g] = &store.add(prefix + ".b_" + gates[g], Tensor(ag::Shape{hidden_dim}));
  return p;
}

LstmParams LstmParams::bind(ParameterStore& store, const std::string& prefix) {
  LstmParams p;
  const char* gates = "ifgo";
  Parameter** input_mats[] = {&p.W_ii, &p.W_if, &p.W_ig, &p.W_io};
  Parameter** hidden_mats[] = {&p.W_hi, &p.W_hf, &p.W_hg, &p.W_ho};
  Parameter** biases[] = {&p.b_i, &p.b_f, &p.b_g, &p.b_o};
  for (int g = 0; g < 4; ++g) {
    *input_mats[g] = &store.get(prefix + ".W_i" + gates[g]);
    *hidden_mats[g] = &store.get(prefix + ".W_h" + gates[g]);
    *biases[g] = &store.get(prefix + ".b_" + gates[g]);
  }
  p.hidden_dim = p.W_ii->tensor.dim(0);
  p.input_dim = p.W_ii->tensor.dim(1);
  for (int g = 0; g < 4; ++g) {
    if ((*input_mats[g])->tensor.shape() != ag::Shape{p.hidden_dim, p.input_dim} ||
        (*hidden_mats[g])->tensor.shape() != ag::Shape{p.hidden_dim, p.hidden_dim} ||
        (*biases[g])->tensor.shape() != ag::Shape{p.hidden_dim}) {
      throw ShapeError("LSTM '" + prefix + "' has inconsistent parameter shapes");
    }
  }
  return p;
}

LstmState lstm_step(Tape& tape, Var x, Var h_prev, Var c_prev, const LstmParams& p) {
  if (x.shape() != ag::Shape{p.input_dim}) {
    throw ShapeError("lstm_step: input " + ag::shape_string(x.shape()) + " vs expected [" +
                     std::to_string(p.input_dim) + "]");
  }
  if (h_prev.shape() != ag::Shape{p.hidden_dim} || c_prev.shape() != ag::Shape{p.hidden_dim}) {
    throw ShapeError("lstm_step: state " + ag::shape_string(h_prev.shape()) + "/" +
                     ag::shape_string(c_prev.shape()) + " vs expected [" + std::to_string(p.hidden_dim) + "]");
  }
  auto gate = [&](Parameter* wi, Parameter* wh, Parameter* b) {
    const std::pair<Var, Var> terms[] = {{tape.param(*wi), x}, {tape.param(*wh), h_prev}};
    return ag::affine(terms, tape.param(*b));
  };
  Var i = ag::sigmoid(gate(p.W_ii, p.W_hi, p.b_i));
  Var f = ag::sigmoid(gate(p.W_if, p.W_hf, p.b_f));
  Var g = ag::tanh(gate(p.W_ig, p.W_hg, p.b_g));
  Var o = ag::sigmoid(gate(p.W_io, p.W_ho, p.b_o));
  Var c = ag::add(ag::mul(f, c_prev), ag::mul(i, g));
  Var h = ag::mul(o, ag::tanh(c));
  return {h, c};
}

std::vector<Var> bilstm(Tape& tape, std::span<const Var> seq, const LstmParams& fwd, const LstmParams& bwd) {
  if (seq.empty()) throw ShapeError("bilstm: empty sequence");
  if (fwd.hidden_dim != bwd.hidden_dim) throw ShapeError("bilstm: directions disagree on hidden_dim");
  const std::size_t n = seq.size();
  std::vector<Var> forward(n), backward(n);
  {
    Var h = tape.constant(Tensor(ag::Shape{fwd.hidden_dim}));
    Var c = h;
    for (std::size_t t = 0; t < n; ++t) {
      auto s = lstm_step(tape, seq[t], h, c, fwd);
      h = forward[t] = s.h;
      c = s.c;
    }
  }
  {
    Var h = tape.constant(Tensor(ag::Shape{bwd.hidden_dim}));
    Var c = h;
    for (std::size_t t = n; t-- > 0;) {
      auto s = lstm_step(tape, seq[t], h, c, bwd);
      h = backward[t] = s.h;
      c = s.c;
    }
  }
  std::vector<Var> out(n);
  for (std::size_t t = 0; t < n; ++t) out[t] = ag::concat({forward[t], backward[t]});
  return out;
}

AttentionParams AttentionParams::create(ParameterStore& store, const std::string& prefix, std::size_t state_dim,
                                        std::size_t att_dim, Rng& init) {
  AttentionParams p;
  p.W = &store.add(prefix + ".W", glorot_uniform(init, att_dim, state_dim));
  // v is a [1 x att_dim] map stored flat.
  auto v = glorot_uniform(init, 1, att_dim);
  p.v = &store.add(prefix + ".v", Tensor(ag::Shape{att_dim}, {v.values().begin(), v.values().end()}));
  return p;
}

AttentionParams AttentionParams::bind(ParameterStore& store, const std::string& prefix) {
  AttentionParams p{&store.get(prefix + ".W"), &store.get(prefix + ".v")};
  if (p.W->tensor.rank() != 2 || p.v->tensor.shape() != ag::Shape{p.W->tensor.dim(0)}) {
    throw ShapeError("attention '" + prefix + "': W rows must equal v length");
  }
  return p;
}

Pooled attention_pool(Tape& tape, std::span<const Var> states, const AttentionParams& p) {
  if (states.empty()) throw ShapeError("attention_pool: empty state list");
  Var W = tape.param(*p.W);
  Var v = tape.param(*p.v);
  Var H = ag::stack(states);                             // [n x D]
  Var U = ag::tanh(ag::matmul(H, ag::transpose(W)));     // [n x A]
  Var weights = ag::softmax(ag::matvec(U, v));           // [n]
  Var pooled = ag::matvec(ag::transpose(H), weights);    // [D]
  return {pooled, weights};
}

Var linear(Var x, Var W, std::optional<Var> bias) {
  const std::pair<Var, Var> term{W, x};
  return ag::affine(std::span<const std::pair<Var, Var>>(&term, 1), bias);
}

EmbeddingTable::EmbeddingTable(std::vector<std::string> tokens, Parameter* matrix)
    : tokens_(std::move(tokens)), matrix_(matrix) {
  if (matrix_ == nullptr || matrix_->tensor.rank() != 2 || matrix_->tensor.dim(0) != tokens_.size()) {
    throw ShapeError("embedding matrix rows must match the vocabulary size");
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], i).second) throw ConfigError("duplicate vocabulary entry '" + tokens_[i] + "'");
  }
}

std::optional<std::size_t> EmbeddingTable::index_of(const std::string& token) const {
  if (auto it = index_.find(token); it != index_.end()) return it->second;
  return std::nullopt;
}

std::size_t EmbeddingTable::dim() const { return matrix_ ? matrix_->tensor.dim(1) : 0; }

Var EmbeddingTable::lookup(Tape& tape, std::size_t index) const {
  if (index >= tokens_.size()) {
    throw ShapeError("embedding index " + std::to_string(index) + " out of range " + std::to_string(tokens_.size()));
  }
  return ag::row(tape.param(*matrix_), index);
}

Dropout::Dropout(DropoutSpec spec) : rate_(spec.rate), rng_(spec.seed) {
  if (!(rate_ >= 0.0 && rate_ < 1.0)) throw ConfigError("dropout rate must be in [0, 1)");
}

Var Dropout::operator()(Var x, bool training) {
  if (!training || rate_ == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - rate_);
  Tensor mask(x.shape());
  for (auto& m : mask.mutable_values()) m = rng_.bernoulli(rate_) ? 0.0 : keep_scale;
  return ag::mul(x, x.tape->constant(std::move(mask)));
}

Var dropout(Var x, const DropoutSpec& spec, bool training) {
  Dropout d(spec);
  return d(x, training);
}

}  // namespace coherence::layers
