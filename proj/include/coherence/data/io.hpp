// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "coherence/data/corpus.hpp"

namespace coherence::data {

// CoNLL-U reader. Sentences are separated by blank lines, documents by
// "# newdoc" comments (an optional "id = X" names the document) and
// paragraphs by "# newpar". A "# label = ..." comment inside a document sets
// its label (0/1 for binary, low/medium/high for graded); documents default
// to coherent. Multiword ranges and empty nodes are skipped. Each token gets
// FORM as surface and canonical_gr(DEPREL) as relation, "root" when HEAD is 0
// and none when DEPREL is "_".
Corpus read_conllu(std::istream& in, const std::string& source = "<conllu>");
Corpus ingest_conllu(const std::filesystem::path& path);

// Corpus exchange format: one JSON object per line,
//   {"id": ..., "label": {"kind": "binary"|"graded", "value": n},
//    "paragraphs": [[[[surface, gr?], ...], ...], ...],
//    "origin": "original" | {"permutation_of": id, "index": k, "order": [...]}}
// paragraphs nest paragraph -> sentence -> token.
std::string document_to_json_line(const Document& doc);
Document document_from_json_line(const std::string& line, const std::string& source = "<jsonl>",
                                 std::size_t line_number = 0);

void write_corpus_jsonl(std::ostream& out, const Corpus& corpus);
void write_corpus_jsonl(const std::filesystem::path& path, const Corpus& corpus);
Corpus read_corpus_jsonl(std::istream& in, const std::string& source = "<jsonl>");
Corpus read_corpus_jsonl(const std::filesystem::path& path);

}  // namespace coherence::data
