// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#include "coherence/data/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "coherence/data/permutations.hpp"
#include "coherence/util/error.hpp"
#include "coherence/util/rng.hpp"

namespace coherence::data {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

bool all_digits(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

}  // namespace

GrRule GrRule::parse(const std::string& text) {
  GrRule rule;
  rule.text_ = text;
  std::istringstream ss(text);
  for (std::string entry; std::getline(ss, entry, ',');) {
    entry = trim(entry);
    if (entry.empty()) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) throw ConfigError("gr_rule entry '" + entry + "' is missing '='");
    const std::string key = trim(entry.substr(0, eq));
    const std::string rel = trim(entry.substr(eq + 1));
    if (rel.empty()) throw ConfigError("gr_rule entry '" + entry + "' has an empty relation");
    if (key == "first" || key == "first-token") {
      rule.first_ = rel;
    } else if (key == "last" || key == "last-token") {
      rule.last_ = rel;
    } else if (key == "else") {
      rule.other_ = rel;
    } else if (all_digits(key)) {
      rule.by_index_[std::stoul(key)] = rel;
    } else {
      throw ConfigError("gr_rule key '" + key + "' is not first, last, else or an index");
    }
  }
  return rule;
}

std::optional<std::string> GrRule::relation(std::size_t position, std::size_t sentence_length) const {
  if (auto it = by_index_.find(position); it != by_index_.end()) return it->second;
  if (position == 0 && first_) return first_;
  if (position + 1 == sentence_length && last_) return last_;
  return other_;
}

Corpus synth_corpus(const SynthSpec& spec) {
  if (spec.num_docs == 0 || spec.vocab_size == 0 || spec.sents_per_doc == 0 || spec.words_per_sent == 0 ||
      spec.paragraphs_per_doc == 0) {
    throw ConfigError("synthetic corpus spec fields must be positive");
  }
  if (spec.vocab_size < spec.words_per_sent) {
    throw ConfigError("vocab_size " + std::to_string(spec.vocab_size) + " is smaller than words_per_sent " +
                      std::to_string(spec.words_per_sent));
  }
  if (spec.paragraphs_per_doc > spec.sents_per_doc) {
    throw ConfigError("paragraphs_per_doc cannot exceed sents_per_doc");
  }
  if (spec.graded && spec.sents_per_doc < 2) throw ConfigError("graded corpora need at least two sentences");
  const GrRule rule = GrRule::parse(spec.gr_rule);
  Rng rng(spec.seed);

  Corpus corpus;
  for (std::size_t d = 0; d < spec.num_docs; ++d) {
    char id[32];
    std::snprintf(id, sizeof id, "synth-%04zu", d);
    Document doc;
    doc.id = id;

    std::vector<Sentence> sentences;
    std::size_t word = rng.below(spec.vocab_size);
    for (std::size_t s = 0; s < spec.sents_per_doc; ++s) {
      Sentence sentence;
      for (std::size_t w = 0; w < spec.words_per_sent; ++w) {
        if (s + w > 0) word = (word + rng.below(3)) % spec.vocab_size;
        sentence.push_back(Token{"w" + std::to_string(word), rule.relation(w, spec.words_per_sent)});
      }
      sentences.push_back(std::move(sentence));
    }

    const std::size_t base = spec.sents_per_doc / spec.paragraphs_per_doc;
    const std::size_t extra = spec.sents_per_doc % spec.paragraphs_per_doc;
    std::size_t next = 0;
    for (std::size_t p = 0; p < spec.paragraphs_per_doc; ++p) {
      Paragraph para;
      const std::size_t count = base + (p < extra ? 1 : 0);
      for (std::size_t i = 0; i < count; ++i) para.push_back(std::move(sentences[next++]));
      doc.paragraphs.push_back(std::move(para));
    }

    if (spec.graded) {
      const int cls = static_cast<int>(rng.below(3));
      std::vector<std::size_t> order(spec.sents_per_doc);
      std::iota(order.begin(), order.end(), 0);
      if (cls == 1) {
        const std::size_t i = rng.below(spec.sents_per_doc - 1);
        std::swap(order[i], order[i + 1]);
      } else if (cls == 0) {
        do {
          for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        } while (std::is_sorted(order.begin(), order.end()));
      }
      doc = reorder_sentences(doc, order);
      doc.label = CoherenceLabel::graded(cls);
    } else {
      doc.label = CoherenceLabel::coherent();
    }
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

}  // namespace coherence::data
