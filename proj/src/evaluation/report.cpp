// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#include "coherence/evaluation/report.hpp"

#include <sstream>

#include "coherence/data/gr_vocabulary.hpp"
#include "coherence/data/permutations.hpp"
#include "coherence/model/model.hpp"
#include "coherence/util/error.hpp"

namespace coherence::evaluation {

using nlohmann::json;

json EvalReport::to_json() const {
  json j;
  auto optional = [&](const char* key, const std::optional<double>& v) {
    if (v) j[key] = *v;
  };
  optional("pra", pra);
  optional("tpra", tpra);
  optional("accuracy", accuracy);
  optional("pearson_r", pearson_r);
  optional("pearson_r_raw", pearson_r_raw);
  if (!f1_per_class.empty()) j["f1_per_class"] = f1_per_class;
  if (!saliency.empty()) {
    json s = json::object();
    for (const auto& [id, tokens] : saliency) {
      json list = json::array();
      for (const auto& t : tokens) list.push_back({t.token, t.norm});
      s[id] = std::move(list);
    }
    j["saliency"] = std::move(s);
  }
  j["counts"] = counts;
  return j;
}

std::set<std::string> parse_metrics(const std::string& csv) {
  static const std::set<std::string> known{"pra", "tpra", "accuracy", "pearson", "f1"};
  std::set<std::string> out;
  std::stringstream in(csv);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    if (!known.count(item)) throw ConfigError("--metrics: unknown metric '" + item + "'");
    out.insert(item);
  }
  if (out.empty()) throw ConfigError("--metrics: no metrics requested");
  return out;
}

std::vector<ScoredGroup> scored_groups(const data::Corpus& corpus, std::span<const DocumentScores> scores) {
  if (scores.size() != corpus.size()) throw ShapeError("scored_groups: scores do not align with the corpus");
  std::vector<ScoredGroup> out;
  for (const auto& g : data::permutation_groups(corpus)) {
    ScoredGroup sg;
    sg.original = scores[g.original].score.at(0);
    for (auto i : g.permutations) sg.permuted.push_back(scores[i].score.at(0));
    if (!sg.permuted.empty()) out.push_back(std::move(sg));
  }
  return out;
}

EvalReport evaluate(const data::Corpus& corpus, std::span<const DocumentScores> scores,
                    const std::set<std::string>& metrics) {
  if (scores.size() != corpus.size()) throw ShapeError("evaluate: scores do not align with the corpus");
  EvalReport r;
  r.counts["documents"] = corpus.size();

  if (metrics.count("pra") || metrics.count("tpra")) {
    auto groups = scored_groups(corpus, scores);
    if (groups.empty()) throw DataError("PRA needs original documents together with their permutations");
    r.counts["originals"] = groups.size();
    if (metrics.count("pra")) {
      auto c = pra_counts(groups);
      r.pra = c.ratio();
      r.counts["pra_correct"] = c.correct;
      r.counts["pra_pairs"] = c.total;
    }
    if (metrics.count("tpra")) {
      auto c = tpra_counts(groups);
      r.tpra = c.ratio();
      r.counts["tpra_correct"] = c.correct;
      r.counts["tpra_pairs"] = c.total;
    }
  }

  if (metrics.count("accuracy")) {
    std::vector<std::size_t> gold, pred;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      gold.push_back(static_cast<std::size_t>(corpus.documents[i].label.value));
      pred.push_back(model::predicted_class(scores[i].score));
    }
    r.accuracy = accuracy(gold, pred);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) hits += gold[i] == pred[i];
    r.counts["accuracy_correct"] = hits;
    r.counts["accuracy_total"] = gold.size();
  }

  if (metrics.count("pearson")) {
    std::vector<double> similarity, inversions, predicted;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const auto& order = corpus.documents[i].origin.order;
      if (corpus.documents[i].origin.is_original() || order.empty()) continue;
      std::vector<std::size_t> identity(order.size());
      for (std::size_t k = 0; k < identity.size(); ++k) identity[k] = k;
      similarity.push_back(similarity_from_transpositions(order, identity));
      inversions.push_back(static_cast<double>(data::min_adjacent_transpositions(order, identity)));
      predicted.push_back(scores[i].score.at(0));
    }
    r.pearson_r = pearson(similarity, predicted);
    r.pearson_r_raw = pearson(inversions, predicted);
    r.counts["pearson_points"] = predicted.size();
  }

  if (metrics.count("f1")) {
    std::vector<std::string> gold, pred;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (scores[i].gr.empty()) continue;
      std::size_t t = 0;
      for (const auto* s : corpus.documents[i].sentences())
        for (const auto& token : *s) {
          const auto& p = scores[i].gr.at(t++);
          if (!token.gr) continue;
          gold.emplace_back(data::reduce_sox(*token.gr));
          pred.emplace_back(p == "S" || p == "O" || p == "X" ? std::string_view(p) : data::reduce_sox(p));
        }
    }
    if (gold.empty()) throw DataError("f1 needs GR predictions and gold GR labels");
    for (const char* cls : {"S", "O", "X"}) r.f1_per_class[cls] = f1_per_class(gold, pred, cls).f1;
    r.counts["gr_tokens"] = gold.size();
  }
  return r;
}

}  // namespace coherence::evaluation
