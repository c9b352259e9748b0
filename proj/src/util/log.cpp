// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#include "coherence/util/log.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace coherence::log {
namespace {

void default_sink(Level level, const std::string& message) {
  if (level == Level::kWarning) std::cerr << "warning: " << message << '\n';
}

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

Sink& current_sink() {
  static Sink sink = default_sink;
  return sink;
}

void emit(Level level, const std::string& message) {
  Sink sink;
  {
    std::lock_guard<std::mutex> lock(sink_mutex());
    sink = current_sink();
  }
  if (sink) sink(level, message);
}

}  // namespace

Sink set_sink(Sink sink) {
  std::lock_guard<std::mutex> lock(sink_mutex());
  if (!sink) sink = default_sink;
  return std::exchange(current_sink(), std::move(sink));
}

void info(const std::string& message) { emit(Level::kInfo, message); }
void warn(const std::string& message) { emit(Level::kWarning, message); }

}  // namespace coherence::log
