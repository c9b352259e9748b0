// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>

namespace coherence::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNumericError = 3 };

// Entry point of the `coherence` tool. Never throws; library errors are
// reported on err and mapped to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace coherence::cli
