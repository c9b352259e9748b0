// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#include "coherence/data/embeddings.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "coherence/util/error.hpp"
#include "coherence/util/log.hpp"

namespace coherence::data {

bool EmbeddingMatrix::insert(std::string token, std::vector<double> vector) {
  if (vector.size() != dim_) throw DataError("embedding for '" + token + "' has the wrong dimension");
  if (index_.count(token)) return false;
  index_.emplace(token, tokens_.size());
  tokens_.push_back(std::move(token));
  values_.insert(values_.end(), vector.begin(), vector.end());
  return true;
}

std::optional<std::span<const double>> EmbeddingMatrix::find(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return std::span<const double>(values_.data() + it->second * dim_, dim_);
}

namespace {

bool is_count(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

}  // namespace

EmbeddingMatrix read_embeddings(std::istream& in, std::size_t dim, const std::string& source) {
  if (dim == 0) throw ConfigError("embedding dimension must be positive");
  EmbeddingMatrix matrix(dim);
  std::string line;
  std::size_t line_number = 0;
  std::vector<std::string> fields;
  bool seen_line = false;
  while (std::getline(in, line)) {
    ++line_number;
    std::istringstream ss(line);
    fields.clear();
    for (std::string f; ss >> f;) fields.push_back(std::move(f));
    if (fields.empty()) continue;
    // word2vec text files start with a "count dim" header line.
    const bool first = !seen_line;
    seen_line = true;
    if (first && dim != 1 && fields.size() == 2 && is_count(fields[0]) && fields[1] == std::to_string(dim)) continue;
    if (fields.size() != dim + 1) {
      throw DataError(source, line_number,
                      "expected a token and " + std::to_string(dim) + " values, got " +
                          std::to_string(fields.size() - 1) + " values");
    }
    std::vector<double> vec(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      const char* s = fields[i + 1].c_str();
      char* end = nullptr;
      errno = 0;
      vec[i] = std::strtod(s, &end);
      if (end == s || *end != '\0' || errno == ERANGE || !std::isfinite(vec[i])) {
        throw DataError(source, line_number, "invalid number '" + fields[i + 1] + "'");
      }
    }
    if (!matrix.insert(fields[0], std::move(vec))) {
      log::warn(source + ":" + std::to_string(line_number) + ": duplicate token '" + fields[0] +
                "', keeping the first vector");
    }
  }
  return matrix;
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path, std::size_t dim) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embeddings " + path.string());
  return read_embeddings(in, dim, path.string());
}

}  // namespace coherence::data
