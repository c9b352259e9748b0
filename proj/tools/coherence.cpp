// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "coherence/cli/commands.hpp"

int main(int argc, char** argv) { return coherence::cli::run(argc, argv, std::cout, std::cerr); }
