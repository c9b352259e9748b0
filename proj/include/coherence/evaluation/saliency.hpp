// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "coherence/data/corpus.hpp"
#include "coherence/model/model.hpp"

namespace coherence::evaluation {

struct TokenSaliency {
  std::string token;
  double norm = 0.0;
};

// L2 norm of the gradient of the coherence score (the highest-scoring class
// for multiclass models) with respect to each word's input embedding, with
// dropout off. Clears the model's parameter gradients.
std::vector<TokenSaliency> saliency(model::CoherenceModel& model, const data::Document& doc);

// Standalone HTML page: one paragraph per sentence and one shaded span per
// token, opacity proportional to norm / max norm.
std::string saliency_html(const data::Document& doc, std::span<const TokenSaliency> scores);

}  // namespace coherence::evaluation
