// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace coherence {

// Base of every error the library throws. The CLI maps the subclasses onto
// process exit codes (usage=1, data=2, numeric=3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
  DataError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  // 0 when the error is not tied to a line.
  std::size_t line() const { return line_; }

 private:
  std::size_t line_ = 0;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace coherence
