// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#include "coherence/data/gr_vocabulary.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>

#include "coherence/util/error.hpp"

namespace coherence::data {
namespace {

constexpr std::array<std::string_view, 39> kReferenceTypes = {
    "acl",   "acl:relcl", "advcl",     "advmod", "amod",      "appos",     "aux",       "auxpass",
    "case",  "cc",        "cc:preconj", "ccomp", "compound",  "compound:prt", "conj",   "cop",
    "csubj", "csubjpass", "dep",       "det",    "det:predet", "discourse", "dobj",     "expl",
    "iobj",  "mark",      "mwe",       "neg",    "nmod",      "nmod:tmod", "nmod:poss", "nmod:npmod",
    "nsubj", "nsubjpass", "nummod",    "parataxis", "punct",  "root",      "xcomp",
};

}  // namespace

std::span<const std::string_view> reference_gr_types() { return kReferenceTypes; }

std::string canonical_gr(std::string_view deprel) {
  std::string gr(deprel);
  std::transform(gr.begin(), gr.end(), gr.begin(), [](unsigned char c) { return std::tolower(c); });
  if (gr == "obj") return "dobj";
  if (gr == "nsubj:pass") return "nsubjpass";
  if (gr == "csubj:pass") return "csubjpass";
  if (gr == "aux:pass") return "auxpass";
  if (auto colon = gr.find(':'); colon != std::string::npos) {
    if (std::find(kReferenceTypes.begin(), kReferenceTypes.end(), gr) == kReferenceTypes.end()) gr.resize(colon);
  }
  return gr;
}

std::string_view reduce_sox(std::string_view gr) {
  if (gr == "nsubj" || gr == "csubj") return "S";
  if (gr == "dobj" || gr == "iobj" || gr == "nsubjpass" || gr == "csubjpass") return "O";
  return "X";
}

GrVocabulary::GrVocabulary(Mode mode, std::vector<std::string> classes) : mode_(mode), classes_(std::move(classes)) {
  if (classes_.size() < 2) throw ConfigError("a GR vocabulary needs at least two classes");
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    if (!index_.emplace(classes_[i], i).second) throw ConfigError("duplicate GR class '" + classes_[i] + "'");
  }
  if (mode_ == Mode::kSox && classes_ != std::vector<std::string>{"S", "O", "X"}) {
    throw ConfigError("SOX vocabulary must be exactly {S, O, X}");
  }
  if (mode_ == Mode::kFull && !index_.count("root")) throw ConfigError("full GR vocabulary must contain 'root'");
}

GrVocabulary GrVocabulary::build_full(const Corpus& train) {
  std::set<std::string> seen{"root"};
  for (const auto& d : train.documents)
    for (const auto& p : d.paragraphs)
      for (const auto& s : p)
        for (const auto& t : s)
          if (t.gr) seen.insert(*t.gr);
  return GrVocabulary(Mode::kFull, {seen.begin(), seen.end()});
}

GrVocabulary GrVocabulary::sox() { return GrVocabulary(Mode::kSox, {"S", "O", "X"}); }

std::optional<std::size_t> GrVocabulary::index_of(std::string_view gr) const {
  const std::string key(mode_ == Mode::kSox ? reduce_sox(gr) : gr);
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  return std::nullopt;
}

std::string_view to_string(GrVocabulary::Mode mode) { return mode == GrVocabulary::Mode::kSox ? "sox" : "full"; }

GrVocabulary::Mode parse_gr_mode(std::string_view text) {
  if (text == "full") return GrVocabulary::Mode::kFull;
  if (text == "sox") return GrVocabulary::Mode::kSox;
  throw ConfigError("unknown GR vocabulary mode '" + std::string(text) + "'");
}

}  // namespace coherence::data
