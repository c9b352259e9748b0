// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace coherence::evaluation {

// An original document's score and the scores of its own permutations.
struct ScoredGroup {
  double original = 0.0;
  std::vector<double> permuted;
};

struct PairCounts {
  std::size_t correct = 0;
  std::size_t total = 0;
  double ratio() const { return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total); }
};

// Pairs where the original scores strictly higher; ties count as incorrect.
PairCounts pra_counts(std::span<const ScoredGroup> groups);
// Every original against every permuted document in the set.
PairCounts tpra_counts(std::span<const ScoredGroup> groups);
double pra(std::span<const ScoredGroup> groups);
double tpra(std::span<const ScoredGroup> groups);

// Fraction of exact matches.
double accuracy(std::span<const std::size_t> gold, std::span<const std::size_t> pred);
// accuracy() restricted to the three classes {0, 1, 2}.
double accuracy_3way(std::span<const std::size_t> gold, std::span<const std::size_t> pred);

// Sample Pearson correlation. Throws NumericError when either input is
// constant.
double pearson(std::span<const double> x, std::span<const double> y);

// 1 - inversions / (n (n - 1) / 2); 1 for n < 2.
double similarity_from_transpositions(std::span<const std::size_t> perm, std::span<const std::size_t> original);

struct F1Score {
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  // The class was neither predicted nor present in the gold labels.
  bool undefined = false;
};

F1Score f1_per_class(std::span<const std::string> gold, std::span<const std::string> pred, std::string_view cls);

}  // namespace coherence::evaluation
