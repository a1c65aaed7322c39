// Copyright 2026 The panopose Authors
// SPDX-License-Identifier: Apache-2.0

#include "panopose/cli.hpp"

int main(int argc, char** argv) { return panopose::cli::run(argc, argv); }
