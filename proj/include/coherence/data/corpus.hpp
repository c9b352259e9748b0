// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace coherence::data {

struct Token {
  std::string surface;
  // Relation of the token to its head ("root" for the root word). Kept as the
  // canonical relation string; class ids come from a GrVocabulary.
  std::optional<std::string> gr;

  bool operator==(const Token&) const = default;
};

using Sentence = std::vector<Token>;
using Paragraph = std::vector<Sentence>;

struct CoherenceLabel {
  enum class Kind { kBinary, kGraded };

  Kind kind = Kind::kBinary;
  // Binary: 1 coherent, 0 incoherent. Graded: 0 low, 1 medium, 2 high.
  int value = 1;

  static CoherenceLabel coherent() { return {Kind::kBinary, 1}; }
  static CoherenceLabel incoherent() { return {Kind::kBinary, 0}; }
  static CoherenceLabel graded(int cls);

  bool operator==(const CoherenceLabel&) const = default;
};

struct Origin {
  // Empty for original documents.
  std::optional<std::string> source_id;
  std::size_t index = 0;
  // order[i] is the original position of the sentence now at position i.
  std::vector<std::size_t> order;

  bool is_original() const { return !source_id.has_value(); }
  static Origin original() { return {}; }
  static Origin permutation_of(std::string id, std::size_t index, std::vector<std::size_t> order) {
    return {std::move(id), index, std::move(order)};
  }

  bool operator==(const Origin&) const = default;
};

struct Document {
  std::string id;
  std::vector<Paragraph> paragraphs;
  CoherenceLabel label;
  Origin origin;

  std::size_t num_sentences() const;
  std::size_t num_tokens() const;
  // Sentences in document order across paragraph boundaries.
  std::vector<const Sentence*> sentences() const;

  bool operator==(const Document&) const = default;
};

struct Corpus {
  std::vector<Document> documents;

  std::size_t size() const { return documents.size(); }
  bool empty() const { return documents.empty(); }
  // True when any document has more than one paragraph.
  bool has_paragraphs() const;
  bool all_tokens_have_gr() const;
  const Document* find(const std::string& id) const;

  bool operator==(const Corpus&) const = default;
};

// An original document's index together with the indices of its permutations
// in the same corpus.
struct PermutationGroup {
  std::size_t original = 0;
  std::vector<std::size_t> permutations;
};

// Groups originals with their own permutations; originals without any
// permutation in the corpus are skipped.
std::vector<PermutationGroup> permutation_groups(const Corpus& corpus);

// Drops documents with fewer than two sentences (with a warning); returns the
// number removed.
std::size_t remove_single_sentence_documents(Corpus& corpus);

// Seeded train/dev split by original document: permutations always follow
// their source. train_fraction of the groups go to train.
std::pair<Corpus, Corpus> split_by_original(const Corpus& corpus, double train_fraction, std::uint64_t seed);

}  // namespace coherence::data
