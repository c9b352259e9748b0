// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#include "coherence/data/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "coherence/util/error.hpp"
#include "coherence/util/log.hpp"
#include "coherence/util/rng.hpp"

namespace coherence::data {

CoherenceLabel CoherenceLabel::graded(int cls) {
  if (cls < 0 || cls > 2) throw DataError("graded label must be 0, 1 or 2, got " + std::to_string(cls));
  return {Kind::kGraded, cls};
}

std::size_t Document::num_sentences() const {
  std::size_t n = 0;
  for (const auto& p : paragraphs) n += p.size();
  return n;
}

std::size_t Document::num_tokens() const {
  std::size_t n = 0;
  for (const auto& p : paragraphs)
    for (const auto& s : p) n += s.size();
  return n;
}

std::vector<const Sentence*> Document::sentences() const {
  std::vector<const Sentence*> out;
  for (const auto& p : paragraphs)
    for (const auto& s : p) out.push_back(&s);
  return out;
}

bool Corpus::has_paragraphs() const {
  return std::any_of(documents.begin(), documents.end(), [](const Document& d) { return d.paragraphs.size() > 1; });
}

bool Corpus::all_tokens_have_gr() const {
  for (const auto& d : documents)
    for (const auto& p : d.paragraphs)
      for (const auto& s : p)
        for (const auto& t : s)
          if (!t.gr) return false;
  return true;
}

const Document* Corpus::find(const std::string& id) const {
  for (const auto& d : documents)
    if (d.id == id) return &d;
  return nullptr;
}

std::vector<PermutationGroup> permutation_groups(const Corpus& corpus) {
  std::map<std::string, std::size_t> original_index;
  std::vector<PermutationGroup> groups;
  for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
    const auto& d = corpus.documents[i];
    if (d.origin.is_original()) {
      original_index.emplace(d.id, groups.size());
      groups.push_back({i, {}});
    }
  }
  for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
    const auto& d = corpus.documents[i];
    if (d.origin.is_original()) continue;
    auto it = original_index.find(*d.origin.source_id);
    if (it == original_index.end()) {
      log::warn("permutation '" + d.id + "' has no original '" + *d.origin.source_id + "' in the corpus");
      continue;
    }
    groups[it->second].permutations.push_back(i);
  }
  std::erase_if(groups, [](const PermutationGroup& g) { return g.permutations.empty(); });
  return groups;
}

std::size_t remove_single_sentence_documents(Corpus& corpus) {
  const auto before = corpus.documents.size();
  std::erase_if(corpus.documents, [](const Document& d) {
    if (d.num_sentences() >= 2) return false;
    log::warn("skipping document '" + d.id + "': fewer than two sentences");
    return true;
  });
  return before - corpus.documents.size();
}

std::pair<Corpus, Corpus> split_by_original(const Corpus& corpus, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train fraction must be in (0, 1)");
  // Group key: own id for originals, source id for permutations.
  std::vector<std::string> keys;
  std::map<std::string, std::size_t> seen;
  for (const auto& d : corpus.documents) {
    const std::string key = d.origin.is_original() ? d.id : *d.origin.source_id;
    if (seen.emplace(key, keys.size()).second) keys.push_back(key);
  }
  std::vector<std::size_t> order(keys.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(keys.size())));
  // Keep both sides non-empty whenever there are at least two groups.
  if (keys.size() >= 2) n_train = std::clamp<std::size_t>(n_train, 1, keys.size() - 1);
  std::vector<bool> is_train(keys.size(), false);
  for (std::size_t i = 0; i < n_train; ++i) is_train[order[i]] = true;

  Corpus train, dev;
  for (const auto& d : corpus.documents) {
    const std::string key = d.origin.is_original() ? d.id : *d.origin.source_id;
    (is_train[seen.at(key)] ? train : dev).documents.push_back(d);
  }
  return {std::move(train), std::move(dev)};
}

}  // namespace coherence::data
