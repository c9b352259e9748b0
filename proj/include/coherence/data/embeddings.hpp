// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace coherence::data {

// Pre-trained word vectors sharing one dimension.
class EmbeddingMatrix {
 public:
  explicit EmbeddingMatrix(std::size_t dim = 0) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  // Returns false (and keeps the existing vector) for duplicates.
  bool insert(std::string token, std::vector<double> vector);
  std::optional<std::span<const double>> find(const std::string& token) const;

 private:
  std::size_t dim_;
  std::vector<std::string> tokens_;
  std::vector<double> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Whitespace-delimited text vectors: each non-blank line is a token followed
// by exactly dim numbers. Duplicate tokens keep the first vector and warn.
EmbeddingMatrix read_embeddings(std::istream& in, std::size_t dim, const std::string& source = "<embeddings>");
EmbeddingMatrix load_embeddings(const std::filesystem::path& path, std::size_t dim);

}  // namespace coherence::data
