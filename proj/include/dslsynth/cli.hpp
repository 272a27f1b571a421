// Copyright 2026 The dslsynth Authors.
// SPDX-License-Identifier: Apache-2.0

/// \file
/// The dslsynth command line, callable in-process.
#ifndef DSLSYNTH_CLI_HPP
#define DSLSYNTH_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace dslsynth::cli {

/// Exit codes.
enum Exit : int {
  kOk = 0,
  kReject = 1,
  kError = 2,
  kNoSolutionWithinBound = 3,
  kNoSolution = 4,
};

/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dslsynth::cli

#endif  // DSLSYNTH_CLI_HPP
