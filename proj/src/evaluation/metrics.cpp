// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#include "coherence/evaluation/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "coherence/data/permutations.hpp"
#include "coherence/util/error.hpp"

namespace coherence::evaluation {

namespace {

void check_groups(std::span<const ScoredGroup> groups, const char* name) {
  if (groups.empty()) throw Error(std::string(name) + ": no scored documents");
  for (const auto& g : groups) {
    if (g.permuted.empty()) throw Error(std::string(name) + ": an original document has no permutations");
  }
}

void check_lengths(std::size_t a, std::size_t b, const char* name) {
  if (a != b) {
    throw ShapeError(std::string(name) + ": length mismatch " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace

PairCounts pra_counts(std::span<const ScoredGroup> groups) {
  check_groups(groups, "pra");
  PairCounts c;
  for (const auto& g : groups) {
    for (double p : g.permuted) c.correct += g.original > p ? 1 : 0;
    c.total += g.permuted.size();
  }
  return c;
}

PairCounts tpra_counts(std::span<const ScoredGroup> groups) {
  check_groups(groups, "tpra");
  std::vector<double> pool;
  for (const auto& g : groups) pool.insert(pool.end(), g.permuted.begin(), g.permuted.end());
  std::sort(pool.begin(), pool.end());
  PairCounts c;
  for (const auto& g : groups) {
    c.correct += static_cast<std::size_t>(std::lower_bound(pool.begin(), pool.end(), g.original) - pool.begin());
  }
  c.total = groups.size() * pool.size();
  return c;
}

double pra(std::span<const ScoredGroup> groups) { return pra_counts(groups).ratio(); }
double tpra(std::span<const ScoredGroup> groups) { return tpra_counts(groups).ratio(); }

double accuracy(std::span<const std::size_t> gold, std::span<const std::size_t> pred) {
  check_lengths(gold.size(), pred.size(), "accuracy");
  if (gold.empty()) throw Error("accuracy: no labels");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) hits += gold[i] == pred[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(gold.size());
}

double accuracy_3way(std::span<const std::size_t> gold, std::span<const std::size_t> pred) {
  auto in_range = [](std::size_t c) { return c <= 2; };
  if (!std::all_of(gold.begin(), gold.end(), in_range) || !std::all_of(pred.begin(), pred.end(), in_range)) {
    throw Error("accuracy_3way: classes must be 0, 1 or 2");
  }
  return accuracy(gold, pred);
}

double pearson(std::span<const double> x, std::span<const double> y) {
  check_lengths(x.size(), y.size(), "pearson");
  if (x.size() < 2) throw Error("pearson: need at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw NumericError("pearson: correlation is undefined for a constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double similarity_from_transpositions(std::span<const std::size_t> perm, std::span<const std::size_t> original) {
  const auto inversions = data::min_adjacent_transpositions(perm, original);
  const std::size_t n = perm.size();
  if (n < 2) return 1.0;
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return 1.0 - static_cast<double>(inversions) / pairs;
}

F1Score f1_per_class(std::span<const std::string> gold, std::span<const std::string> pred, std::string_view cls) {
  check_lengths(gold.size(), pred.size(), "f1_per_class");
  F1Score s;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool g = gold[i] == cls, p = pred[i] == cls;
    if (g && p) ++s.true_positives;
    if (!g && p) ++s.false_positives;
    if (g && !p) ++s.false_negatives;
  }
  const auto tp = static_cast<double>(s.true_positives);
  const auto predicted = tp + static_cast<double>(s.false_positives);
  const auto present = tp + static_cast<double>(s.false_negatives);
  s.undefined = predicted == 0 && present == 0;
  s.precision = predicted > 0 ? tp / predicted : 0.0;
  s.recall = present > 0 ? tp / present : 0.0;
  s.f1 = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

}  // namespace coherence::evaluation
