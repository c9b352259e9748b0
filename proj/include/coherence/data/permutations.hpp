// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "coherence/data/corpus.hpp"

namespace coherence::data {

// Up to k distinct sentence orderings of doc, none equal to the original.
// When n! - 1 <= k every non-identity ordering is returned (lexicographic);
// otherwise orderings are drawn with a seeded Fisher-Yates shuffle and
// rejected if seen before. Outputs are labelled incoherent, tagged
// permutation_of(doc.id, i), and keep the original paragraph sizes.
std::vector<Document> generate_permutations(const Document& doc, std::size_t k, std::uint64_t seed);

// Number of adjacent swaps that turn perm into original (the inversion count
// of perm relative to original), by merge-sort counting.
std::uint64_t min_adjacent_transpositions(std::span<const std::size_t> perm, std::span<const std::size_t> original);

// Document with its sentences rearranged: sentence i of the result is
// sentence order[i] of doc. Paragraph sizes are kept.
Document reorder_sentences(const Document& doc, std::span<const std::size_t> order);

}  // namespace coherence::data
