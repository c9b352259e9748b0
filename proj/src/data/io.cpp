// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#include "coherence/data/io.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include "json.hpp"

#include "coherence/data/gr_vocabulary.hpp"
#include "coherence/util/error.hpp"

namespace coherence::data {
namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cols;
  std::string::size_type start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    cols.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return cols;
}

CoherenceLabel parse_label(const std::string& text, const std::string& source, std::size_t line) {
  if (text == "0") return CoherenceLabel::incoherent();
  if (text == "1") return CoherenceLabel::coherent();
  if (text == "low") return CoherenceLabel::graded(0);
  if (text == "medium") return CoherenceLabel::graded(1);
  if (text == "high") return CoherenceLabel::graded(2);
  throw DataError(source, line, "unknown document label '" + text + "'");
}

class ConlluBuilder {
 public:
  explicit ConlluBuilder(Corpus& corpus) : corpus_(corpus) {}

  void new_document(std::string id) {
    finish_document();
    start_document(std::move(id));
  }

  void new_paragraph() {
    finish_sentence();
    ensure_document();
    if (!current_->paragraphs.back().empty()) current_->paragraphs.emplace_back();
  }

  void set_label(CoherenceLabel label) {
    ensure_document();
    current_->label = label;
  }

  void add_token(Token token) { sentence_.push_back(std::move(token)); }

  void finish_sentence() {
    if (sentence_.empty()) return;
    ensure_document();
    current_->paragraphs.back().push_back(std::move(sentence_));
    sentence_.clear();
  }

  void finish_document() {
    finish_sentence();
    if (!current_) return;
    std::erase_if(current_->paragraphs, [](const Paragraph& p) { return p.empty(); });
    if (!current_->paragraphs.empty()) corpus_.documents.push_back(std::move(*current_));
    current_.reset();
  }

 private:
  void start_document(std::string id) {
    current_ = Document{};
    current_->id = id.empty() ? "doc-" + std::to_string(corpus_.documents.size()) : std::move(id);
    current_->paragraphs.emplace_back();
  }

  void ensure_document() {
    if (!current_) start_document("");
  }

  Corpus& corpus_;
  std::optional<Document> current_;
  Sentence sentence_;
};

json label_to_json(const CoherenceLabel& label) {
  return {{"kind", label.kind == CoherenceLabel::Kind::kBinary ? "binary" : "graded"}, {"value", label.value}};
}

}  // namespace

Corpus read_conllu(std::istream& in, const std::string& source) {
  Corpus corpus;
  ConlluBuilder builder(corpus);
  std::string raw;
  std::size_t line_number = 0;
  while (std::getline(in, raw)) {
    ++line_number;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::string line = trim(raw);
    if (line.empty()) {
      builder.finish_sentence();
      continue;
    }
    if (line[0] == '#') {
      const std::string body = trim(line.substr(1));
      if (body.rfind("newdoc", 0) == 0) {
        std::string id;
        if (auto eq = body.find('='); eq != std::string::npos && trim(body.substr(6, eq - 6)) == "id") {
          id = trim(body.substr(eq + 1));
        }
        builder.new_document(std::move(id));
      } else if (body.rfind("newpar", 0) == 0) {
        builder.new_paragraph();
      } else if (auto eq = body.find('='); eq != std::string::npos && trim(body.substr(0, eq)) == "label") {
        builder.set_label(parse_label(trim(body.substr(eq + 1)), source, line_number));
      }
      continue;
    }
    const auto cols = split_tabs(raw);
    if (cols.size() != 10) {
      throw DataError(source, line_number, "expected 10 tab-separated columns, got " + std::to_string(cols.size()));
    }
    const std::string& id = cols[0];
    if (id.find('-') != std::string::npos || id.find('.') != std::string::npos) continue;
    Token token{cols[1], std::nullopt};
    if (cols[6] == "0") {
      token.gr = "root";
    } else if (cols[7] != "_" && !cols[7].empty()) {
      token.gr = canonical_gr(cols[7]);
    }
    builder.add_token(std::move(token));
  }
  builder.finish_document();
  return corpus;
}

Corpus ingest_conllu(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open CoNLL-U file " + path.string());
  return read_conllu(in, path.string());
}

std::string document_to_json_line(const Document& doc) {
  json paragraphs = json::array();
  for (const auto& p : doc.paragraphs) {
    json sentences = json::array();
    for (const auto& s : p) {
      json tokens = json::array();
      for (const auto& t : s) tokens.push_back(t.gr ? json::array({t.surface, *t.gr}) : json::array({t.surface}));
      sentences.push_back(std::move(tokens));
    }
    paragraphs.push_back(std::move(sentences));
  }
  json origin = "original";
  if (!doc.origin.is_original()) {
    origin = {{"permutation_of", *doc.origin.source_id}, {"index", doc.origin.index}, {"order", doc.origin.order}};
  }
  json j = {{"id", doc.id}, {"label", label_to_json(doc.label)}, {"paragraphs", std::move(paragraphs)},
            {"origin", std::move(origin)}};
  return j.dump();
}

Document document_from_json_line(const std::string& line, const std::string& source, std::size_t line_number) {
  auto fail = [&](const std::string& what) -> DataError { return DataError(source, line_number, what); };
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw fail(std::string("invalid JSON: ") + e.what());
  }
  try {
    Document doc;
    doc.id = j.at("id").get<std::string>();
    const auto& label = j.at("label");
    const auto kind = label.at("kind").get<std::string>();
    const int value = label.at("value").get<int>();
    if (kind == "binary") {
      if (value != 0 && value != 1) throw fail("binary label must be 0 or 1");
      doc.label = value ? CoherenceLabel::coherent() : CoherenceLabel::incoherent();
    } else if (kind == "graded") {
      doc.label = CoherenceLabel::graded(value);
    } else {
      throw fail("unknown label kind '" + kind + "'");
    }
    for (const auto& p : j.at("paragraphs")) {
      Paragraph paragraph;
      for (const auto& s : p) {
        Sentence sentence;
        for (const auto& t : s) {
          if (!t.is_array() || t.empty() || t.size() > 2) throw fail("token must be [surface] or [surface, gr]");
          Token token{t[0].get<std::string>(), std::nullopt};
          if (t.size() == 2) token.gr = t[1].get<std::string>();
          sentence.push_back(std::move(token));
        }
        if (sentence.empty()) throw fail("empty sentence in document '" + doc.id + "'");
        paragraph.push_back(std::move(sentence));
      }
      if (paragraph.empty()) throw fail("empty paragraph in document '" + doc.id + "'");
      doc.paragraphs.push_back(std::move(paragraph));
    }
    const auto& origin = j.at("origin");
    if (origin.is_string()) {
      if (origin.get<std::string>() != "original") throw fail("origin must be \"original\" or an object");
    } else {
      doc.origin = Origin::permutation_of(origin.at("permutation_of").get<std::string>(),
                                          origin.at("index").get<std::size_t>(),
                                          origin.at("order").get<std::vector<std::size_t>>());
    }
    return doc;
  } catch (const json::exception& e) {
    throw fail(std::string("malformed document: ") + e.what());
  }
}

void write_corpus_jsonl(std::ostream& out, const Corpus& corpus) {
  for (const auto& d : corpus.documents) out << document_to_json_line(d) << '\n';
}

void write_corpus_jsonl(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_corpus_jsonl(out, corpus);
}

Corpus read_corpus_jsonl(std::istream& in, const std::string& source) {
  Corpus corpus;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    corpus.documents.push_back(document_from_json_line(line, source, n));
  }
  return corpus;
}

Corpus read_corpus_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus " + path.string());
  return read_corpus_jsonl(in, path.string());
}

}  // namespace coherence::data
