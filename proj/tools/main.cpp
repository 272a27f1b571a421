// Copyright 2026 The dslsynth Authors.
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "dslsynth/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dslsynth::cli::run(args, std::cout, std::cerr);
}
