// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

// Small corpora and configurations shared by the model, training and
// evaluation tests.

#pragma once

#include "coherence/data/corpus.hpp"
#include "coherence/data/permutations.hpp"
#include "coherence/data/synth.hpp"
#include "coherence/model/config.hpp"

namespace coherence::testing {

inline model::ModelConfig tiny_config(model::Variant variant, int levels = 2) {
  model::ModelConfig c;
  c.variant = variant;
  c.levels = levels;
  c.embed_dim = 4;
  c.word_hidden = 3;
  c.sent_hidden = 3;
  c.para_hidden = 3;
  c.gr_embed_dim = 2;
  c.num_classes = levels == 3 ? 3 : 1;
  c.alpha = levels == 3 ? 1.0 : 0.7;
  c.beta = model::has_gr_head(variant) ? 0.3 : 0.0;
  return c;
}

// Originals plus up to k permutations each (binary labels).
inline data::Corpus with_permutations(const data::Corpus& originals, std::size_t k, std::uint64_t seed) {
  data::Corpus out;
  for (const auto& d : originals.documents) {
    out.documents.push_back(d);
    for (auto& p : data::generate_permutations(d, k, seed)) out.documents.push_back(std::move(p));
  }
  return out;
}

// Two short documents: one coherent original and one permutation of it, or
// two graded three-paragraph documents for three-level models.
inline data::Corpus tiny_corpus(int levels = 2, std::uint64_t seed = 3) {
  data::SynthSpec spec;
  spec.num_docs = levels == 3 ? 2 : 1;
  spec.vocab_size = 6;
  spec.sents_per_doc = 3;
  spec.words_per_sent = 3;
  spec.seed = seed;
  if (levels == 3) {
    spec.paragraphs_per_doc = 2;
    spec.graded = true;
    return data::synth_corpus(spec);
  }
  return with_permutations(data::synth_corpus(spec), 1, seed);
}

}  // namespace coherence::testing

namespace coherence::testing {

// The bundled overfit corpus: 20 synthetic originals over a 50-word
// vocabulary with up to 5 permutations each.
inline data::Corpus overfit_corpus() {
  data::SynthSpec spec;
  spec.num_docs = 20;
  spec.vocab_size = 50;
  return with_permutations(data::synth_corpus(spec), 5, 1);
}

inline model::ModelConfig overfit_model_config(model::Variant variant) {
  model::ModelConfig c;
  c.variant = variant;
  c.embed_dim = 16;
  c.word_hidden = 16;
  c.sent_hidden = 16;
  c.alpha = 0.7;
  c.beta = model::has_gr_head(variant) ? 0.3 : 0.0;
  return c;
}

}  // namespace coherence::testing
