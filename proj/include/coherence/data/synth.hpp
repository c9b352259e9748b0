// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "coherence/data/corpus.hpp"

namespace coherence::data {

// Maps a token's position within its sentence to a relation. Written as a
// comma-separated list of key=relation entries where key is "first" (or
// "first-token"), "last" (or "last-token"), "else", or a 0-based index.
// Precedence: index, first, last, else. Positions with no matching entry get
// no relation.
class GrRule {
 public:
  static GrRule parse(const std::string& text);

  std::optional<std::string> relation(std::size_t position, std::size_t sentence_length) const;
  const std::string& text() const { return text_; }

 private:
  std::string text_;
  std::map<std::size_t, std::string> by_index_;
  std::optional<std::string> first_, last_, other_;
};

inline constexpr const char* kDefaultGrRule = "first=nsubj,1=root,2=dobj,last=punct,else=amod";

struct SynthSpec {
  std::size_t num_docs = 20;
  std::size_t vocab_size = 50;
  std::size_t sents_per_doc = 5;
  std::size_t words_per_sent = 6;
  std::string gr_rule = kDefaultGrRule;
  std::uint64_t seed = 1;
  // Paragraphs per document; sentences are split as evenly as possible.
  std::size_t paragraphs_per_doc = 1;
  // Graded corpora label each document low/medium/high: high keeps the
  // generated order, medium swaps one adjacent sentence pair and low is a
  // random non-identity shuffle.
  bool graded = false;
};

// Documents are walks of a Markov chain over tokens "w0".."w{V-1}": each
// token advances the previous one by 0, 1 or 2 (mod V) and the walk runs on
// across sentence boundaries, so sentence order is recoverable from content.
// Deterministic in the spec (including seed).
Corpus synth_corpus(const SynthSpec& spec);

}  // namespace coherence::data
