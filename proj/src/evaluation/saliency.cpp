// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#include "coherence/evaluation/saliency.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "coherence/autograd/ops.hpp"
#include "coherence/util/error.hpp"

namespace coherence::evaluation {

std::vector<TokenSaliency> saliency(model::CoherenceModel& model, const data::Document& doc) {
  autograd::Tape tape;
  model::EncodeOptions options;
  options.leaf_inputs = true;
  auto enc = model.encode(tape, doc, options);
  auto y = model.score(tape, enc.doc_vector);
  auto scores = y.value().values();
  const auto target = static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
  model.params().zero_grads();
  tape.backward(autograd::pick(y, target));
  model.params().zero_grads();

  std::vector<TokenSaliency> out;
  std::size_t t = 0;
  for (const auto* s : doc.sentences()) {
    for (const auto& token : *s) {
      double sq = 0;
      for (double g : tape.grad(enc.word_inputs[t])) sq += g * g;
      out.push_back({token.surface, std::sqrt(sq)});
      ++t;
    }
  }
  return out;
}

namespace {

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string saliency_html(const data::Document& doc, std::span<const TokenSaliency> scores) {
  if (scores.size() != doc.num_tokens()) {
    throw ShapeError("saliency_html: " + std::to_string(scores.size()) + " scores for " +
                     std::to_string(doc.num_tokens()) + " tokens");
  }
  double max_norm = 0;
  for (const auto& s : scores) max_norm = std::max(max_norm, s.norm);

  std::string html =
      "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>" + escape(doc.id) +
      "</title>\n</head>\n<body style=\"font-family: sans-serif; line-height: 1.8\">\n<h1 style=\"font-size: "
      "1.1em\">" +
      escape(doc.id) + "</h1>\n";
  std::size_t t = 0;
  char buf[160];
  for (const auto* s : doc.sentences()) {
    html += "<p>";
    for (std::size_t i = 0; i < s->size(); ++i, ++t) {
      const double alpha = max_norm > 0 ? scores[t].norm / max_norm : 0.0;
      std::snprintf(buf, sizeof buf, "<span style=\"background-color: rgba(214, 39, 40, %.3f)\" title=\"%.6g\">",
                    alpha, scores[t].norm);
      if (i > 0) html += ' ';
      html += buf + escape(scores[t].token) + "</span>";
    }
    html += "</p>\n";
  }
  html += "</body>\n</html>\n";
  return html;
}

}  // namespace coherence::evaluation
