// Copyright 2026 The avtime Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "avtime/commands.hpp"

int main(int argc, char** argv) {
  return avtime::cli::run({argv, argv + argc}, std::cout, std::cerr);
}
