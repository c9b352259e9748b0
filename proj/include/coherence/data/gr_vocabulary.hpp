// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "coherence/data/corpus.hpp"

namespace coherence::data {

// The 32 main relation types and 7 retained subtypes extracted from the WSJ
// training data by the Stanford dependency parser (UD v1 naming).
std::span<const std::string_view> reference_gr_types();

// Lower-cases a DEPREL and maps it onto the UD v1 inventory: the UD v2
// passive/object relations are renamed (obj -> dobj, nsubj:pass ->
// nsubjpass, csubj:pass -> csubjpass, aux:pass -> auxpass) and subtypes that
// are not in reference_gr_types() collapse to their main type.
std::string canonical_gr(std::string_view deprel);

// Subject / object / other reduction.
std::string_view reduce_sox(std::string_view gr);

// Closed, ordered set of GR classes.
class GrVocabulary {
 public:
  enum class Mode { kFull, kSox };

  GrVocabulary() = default;
  GrVocabulary(Mode mode, std::vector<std::string> classes);

  // Every relation seen in the (training) corpus plus "root", sorted.
  static GrVocabulary build_full(const Corpus& train);
  static GrVocabulary sox();

  Mode mode() const { return mode_; }
  const std::vector<std::string>& classes() const { return classes_; }
  std::size_t size() const { return classes_.size(); }
  const std::string& name(std::size_t index) const { return classes_.at(index); }

  // Class of a token's relation. SOX mode reduces first, so every labelled
  // token has a class; full mode returns nullopt for unseen relations
  // (masked out of the GR loss).
  std::optional<std::size_t> index_of(std::string_view gr) const;

  bool operator==(const GrVocabulary& other) const {
    return mode_ == other.mode_ && classes_ == other.classes_;
  }

 private:
  Mode mode_ = Mode::kFull;
  std::vector<std::string> classes_;
  std::unordered_map<std::string, std::size_t> index_;
};

std::string_view to_string(GrVocabulary::Mode mode);
GrVocabulary::Mode parse_gr_mode(std::string_view text);

}  // namespace coherence::data
