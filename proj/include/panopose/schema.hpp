// Copyright 2026 The panopose Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "panopose/types.hpp"

namespace panopose {

/// Ordered keypoint vocabulary. Names are unique and non-empty.
class KeypointSchema {
 public:
  KeypointSchema(std::string id, std::vector<std::string> names);

  const std::string& id() const { return id_; }
  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }

  /// Index of `name`, or size() when absent.
  std::size_t index_of(std::string_view name) const;

  friend bool operator==(const KeypointSchema&, const KeypointSchema&) = default;

 private:
  std::string id_;
  std::vector<std::string> names_;
};

/// For every target keypoint, the source keypoints it is built from.
struct SchemaMapping {
  std::string source_schema;
  std::string target_schema;
  std::size_t source_size = 0;
  std::vector<std::vector<std::size_t>> entries;

  std::size_t target_size() const { return entries.size(); }

  friend bool operator==(const SchemaMapping&, const SchemaMapping&) = default;
};

struct MappingValidation {
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

inline constexpr std::string_view kCocoSchemaId = "coco17";
inline constexpr std::string_view kJrdbSchemaId = "jrdb17";
// Literal counterpart table with the duplicated "left hand" row kept.
inline constexpr std::string_view kJrdbVerbatimSchemaId = "jrdb17-table1";

const KeypointSchema& coco17();

/// JRDB-Pose keypoints. With `verbatim`, row 10 keeps its duplicated
/// "left hand -> left wrist" entry; the name is suffixed to stay unique.
const KeypointSchema& jrdb17(bool verbatim = false);

/// Looks up a built-in schema by id. Throws Errc::validation when unknown.
const KeypointSchema& schema_by_id(std::string_view id);

/// COCO -> JRDB counterpart mapping.
SchemaMapping default_mapping(bool verbatim = false);

/// Each target maps to the source index of the same position.
SchemaMapping identity_mapping(const KeypointSchema& schema);

MappingValidation validate_mapping(const SchemaMapping& mapping,
                                   const KeypointSchema& src,
                                   const KeypointSchema& dst);

/// Throws Errc::validation listing every violation.
void require_valid(const SchemaMapping& mapping, const KeypointSchema& src,
                   const KeypointSchema& dst);

/// Merges counterparts coordinate-wise: mean position, minimum visibility.
Pose remap_pose(const Pose& pose, const SchemaMapping& mapping);

// Mapping config files name keypoints rather than indices:
//   {"source_schema": "coco17", "target_schema": "jrdb17",
//    "entries": {"head": ["left eye", "right eye"], ...}}
SchemaMapping mapping_from_json(std::string_view text, const KeypointSchema& src,
                                const KeypointSchema& dst);
/// Resolves both schemas through schema_by_id.
SchemaMapping mapping_from_json(std::string_view text);
SchemaMapping load_mapping(const std::filesystem::path& path);

std::string mapping_to_json(const SchemaMapping& mapping, const KeypointSchema& src,
                            const KeypointSchema& dst);

}  // namespace panopose
