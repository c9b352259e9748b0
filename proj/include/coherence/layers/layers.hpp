// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "coherence/autograd/ops.hpp"
#include "coherence/autograd/tape.hpp"
#include "coherence/autograd/tensor.hpp"
#include "coherence/util/rng.hpp"

namespace coherence::layers {

using autograd::Parameter;
using autograd::ParameterStore;
using autograd::Tape;
using autograd::Tensor;
using autograd::Var;

// Glorot-uniform matrix on +-sqrt(6 / (fan_in + fan_out)).
Tensor glorot_uniform(Rng& rng, std::size_t rows, std::size_t cols);

// Four-gate LSTM without peepholes. Parameters are registered as
// "<prefix>.W_ii", ..., "<prefix>.b_o" in that fixed order.
struct LstmParams {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  Parameter* W_ii = nullptr;
  Parameter* W_if = nullptr;
  Parameter* W_ig = nullptr;
  Parameter* W_io = nullptr;
  Parameter* W_hi = nullptr;
  Parameter* W_hf = nullptr;
  Parameter* W_hg = nullptr;
  Parameter* W_ho = nullptr;
  Parameter* b_i = nullptr;
  Parameter* b_f = nullptr;
  Parameter* b_g = nullptr;
  Parameter* b_o = nullptr;

  static LstmParams create(ParameterStore& store, const std::string& prefix, std::size_t input_dim,
                           std::size_t hidden_dim, Rng& init);
  // Rebinds to parameters that already exist in the store (checkpoint load).
  static LstmParams bind(ParameterStore& store, const std::string& prefix);
};

struct LstmState {
  Var h;
  Var c;
};

LstmState lstm_step(Tape& tape, Var x, Var h_prev, Var c_prev, const LstmParams& p);

// Output t is [forward h_t ; backward h_t]; both directions start from zero
// states.
std::vector<Var> bilstm(Tape& tape, std::span<const Var> seq, const LstmParams& fwd, const LstmParams& bwd);

struct AttentionParams {
  Parameter* W = nullptr;  // [att_dim x state_dim]
  Parameter* v = nullptr;  // [att_dim]

  static AttentionParams create(ParameterStore& store, const std::string& prefix, std::size_t state_dim,
                                std::size_t att_dim, Rng& init);
  static AttentionParams bind(ParameterStore& store, const std::string& prefix);
};

struct Pooled {
  Var pooled;   // [state_dim]
  Var weights;  // [n]
};

// u_t = tanh(W h_t), a = softmax(v . u), pooled = sum_t a_t h_t.
Pooled attention_pool(Tape& tape, std::span<const Var> states, const AttentionParams& p);

// W x (+ bias).
Var linear(Var x, Var W, std::optional<Var> bias = std::nullopt);

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::vector<std::string> tokens, Parameter* matrix);

  std::optional<std::size_t> index_of(const std::string& token) const;
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }
  std::size_t dim() const;
  bool trainable() const { return matrix_ != nullptr && matrix_->trainable; }
  Parameter* matrix() const { return matrix_; }

  Var lookup(Tape& tape, std::size_t index) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
  Parameter* matrix_ = nullptr;
};

struct DropoutSpec {
  double rate = 0.0;
  std::uint64_t seed = 0;
};

// Inverted dropout: at train time each element is zeroed with probability
// rate and survivors are scaled by 1/(1-rate); at eval time it is the
// identity. Owns its RNG so a training run draws one reproducible stream.
class Dropout {
 public:
  explicit Dropout(DropoutSpec spec);

  double rate() const { return rate_; }
  Var operator()(Var x, bool training);

 private:
  double rate_;
  Rng rng_;
};

// One-shot form with a fresh RNG seeded from spec.seed.
Var dropout(Var x, const DropoutSpec& spec, bool training);

}  // namespace coherence::layers
