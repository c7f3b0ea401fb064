// Copyright 2026 The coopsir Authors
// SPDX-License-Identifier: Apache-2.0

#include "coopsir/cli.hpp"

int main(int argc, char** argv) { return coopsir::cli::main(argc, argv); }
