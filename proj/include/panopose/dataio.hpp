// Copyright 2026 The panopose Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "panopose/schema.hpp"
#include "panopose/types.hpp"

namespace panopose {

enum class FileKind { ground_truth, predictions };

/// Parses and validates a frame file (see docs/dataset-format.md). Errors
/// name the offending frame and person. Predictions additionally require a
/// score on every person.
Dataset parse_dataset(std::string_view text, const KeypointSchema& schema, FileKind kind);

Dataset load_ground_truth(const std::filesystem::path& path, const KeypointSchema& schema);
Dataset load_predictions(const std::filesystem::path& path, const KeypointSchema& schema);

/// Canonical text: frames sorted by id, fixed field order, floats as %.17g.
std::string dataset_to_string(const Dataset& ds);
void save_dataset(const Dataset& ds, const std::filesystem::path& path);

}  // namespace panopose
