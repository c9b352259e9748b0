// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#include "coherence/data/permutations.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <set>
#include <unordered_map>

#include "coherence/util/error.hpp"
#include "coherence/util/rng.hpp"

namespace coherence::data {
namespace {

// n! - 1 saturated at `cap`.
std::size_t non_identity_count(std::size_t n, std::size_t cap) {
  cap = std::min(cap, SIZE_MAX - 1);
  std::size_t f = 1;
  for (std::size_t i = 2; i <= n; ++i) {
    if (f > (cap + 1) / i) return cap + 1;
    f *= i;
  }
  return f - 1;
}

std::uint64_t merge_count(std::vector<std::size_t>& v, std::vector<std::size_t>& tmp, std::size_t lo,
                          std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t count = merge_count(v, tmp, lo, mid) + merge_count(v, tmp, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      count += mid - i;
      tmp[k++] = v[j++];
    } else {
      tmp[k++] = v[i++];
    }
  }
  while (i < mid) tmp[k++] = v[i++];
  while (j < hi) tmp[k++] = v[j++];
  std::copy(tmp.begin() + lo, tmp.begin() + hi, v.begin() + lo);
  return count;
}

}  // namespace

Document reorder_sentences(const Document& doc, std::span<const std::size_t> order) {
  const auto sentences = doc.sentences();
  if (order.size() != sentences.size()) throw DataError("reorder: order length does not match sentence count");
  Document out;
  out.id = doc.id;
  out.label = doc.label;
  out.origin = doc.origin;
  std::size_t next = 0;
  for (const auto& p : doc.paragraphs) {
    Paragraph para;
    for (std::size_t s = 0; s < p.size(); ++s) para.push_back(*sentences.at(order[next++]));
    out.paragraphs.push_back(std::move(para));
  }
  return out;
}

std::vector<Document> generate_permutations(const Document& doc, std::size_t k, std::uint64_t seed) {
  const std::size_t n = doc.num_sentences();
  if (n < 2) throw DataError("cannot permute document '" + doc.id + "': it has fewer than two sentences");

  std::vector<std::size_t> identity(n);
  std::iota(identity.begin(), identity.end(), 0);
  std::vector<std::vector<std::size_t>> orders;

  if (non_identity_count(n, k) <= k) {
    auto p = identity;
    while (std::next_permutation(p.begin(), p.end())) orders.push_back(p);
  } else {
    Rng rng(seed);
    std::set<std::vector<std::size_t>> seen{identity};
    while (orders.size() < k) {
      auto p = identity;
      for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng.below(i)]);
      if (seen.insert(p).second) orders.push_back(std::move(p));
    }
  }

  std::vector<Document> out;
  out.reserve(orders.size());
  for (std::size_t i = 0; i < orders.size(); ++i) {
    Document d = reorder_sentences(doc, orders[i]);
    d.id = doc.id + "-perm-" + std::to_string(i);
    d.label = CoherenceLabel::incoherent();
    d.origin = Origin::permutation_of(doc.id, i, orders[i]);
    out.push_back(std::move(d));
  }
  return out;
}

std::uint64_t min_adjacent_transpositions(std::span<const std::size_t> perm, std::span<const std::size_t> original) {
  if (perm.size() != original.size()) throw DataError("not a permutation: lengths differ");
  std::unordered_map<std::size_t, std::size_t> position;
  for (std::size_t i = 0; i < original.size(); ++i) {
    if (!position.emplace(original[i], i).second) throw DataError("not a permutation: repeated element in original");
  }
  std::vector<std::size_t> ranks(perm.size());
  std::vector<bool> used(perm.size(), false);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    auto it = position.find(perm[i]);
    if (it == position.end() || used[it->second]) throw DataError("not a permutation of the original ordering");
    used[it->second] = true;
    ranks[i] = it->second;
  }
  std::vector<std::size_t> tmp(ranks.size());
  return merge_count(ranks, tmp, 0, ranks.size());
}

}  // namespace coherence::data
