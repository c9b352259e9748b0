// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "coherence/data/corpus.hpp"
#include "coherence/evaluation/metrics.hpp"
#include "coherence/evaluation/saliency.hpp"

namespace coherence::evaluation {

struct EvalReport {
  std::optional<double> pra;
  std::optional<double> tpra;
  std::optional<double> accuracy;
  // Against normalized transposition similarity, and against the raw
  // inversion count.
  std::optional<double> pearson_r;
  std::optional<double> pearson_r_raw;
  std::map<std::string, double> f1_per_class;
  std::map<std::string, std::vector<TokenSaliency>> saliency;
  std::map<std::string, std::size_t> counts;

  nlohmann::json to_json() const;
};

// Known metric names: pra, tpra, accuracy, pearson, f1.
std::set<std::string> parse_metrics(const std::string& csv);

// Per-document inputs to evaluate(), aligned with corpus.documents.
struct DocumentScores {
  std::vector<double> score;
  // Predicted GR class name per token (empty for models without a GR head).
  std::vector<std::string> gr;
};

// pra/tpra/pearson use the first score component; accuracy compares the
// predicted class with graded labels; f1 scores subject/object/other over
// tokens that carry a gold GR.
EvalReport evaluate(const data::Corpus& corpus, std::span<const DocumentScores> scores,
                    const std::set<std::string>& metrics);

// Groups the first score component by original document.
std::vector<ScoredGroup> scored_groups(const data::Corpus& corpus, std::span<const DocumentScores> scores);

}  // namespace coherence::evaluation
