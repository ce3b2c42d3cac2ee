// Copyright 2026 The seedalign Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ostream>
#include <span>
#include <string>

namespace seedalign::cli {

/// Process exit statuses.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,       // anything not covered below
  kUsage = 2,         // unknown flag, bad value, invalid configuration
  kIo = 3,            // missing or malformed file
  kShapeMismatch = 4, // incompatible SAEs or datasets
  kDivergence = 5,    // training loss turned non-finite
};

/// Runs one subcommand. `args` excludes the program name. Every subcommand
/// writes manifest.json into its --out-dir, also when it fails.
int dispatch(std::span<const std::string> args, std::ostream& out, std::ostream& err);

const char* version() noexcept;

}  // namespace seedalign::cli
