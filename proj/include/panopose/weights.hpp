// Copyright 2026 The panopose Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "panopose/schema.hpp"

namespace panopose {

enum class DType { f64, f32, f16, bf16, i64, i32, i16, i8, u8, boolean };

std::size_t dtype_size(DType dtype);
std::string_view dtype_name(DType dtype);
/// Throws Errc::format for unknown tags.
DType dtype_from_name(std::string_view name);

/// A named row-major tensor. `data` holds the little-endian payload bytes.
class TensorRecord {
 public:
  TensorRecord() = default;
  TensorRecord(DType dtype, std::vector<std::int64_t> shape, std::vector<std::uint8_t> data);

  static TensorRecord from_f32(std::vector<std::int64_t> shape, std::span<const float> values);

  DType dtype() const { return dtype_; }
  const std::vector<std::int64_t>& shape() const { return shape_; }
  const std::vector<std::uint8_t>& data() const { return data_; }
  std::size_t element_count() const;

  /// Decodes an f32 payload; throws Errc::format for any other dtype.
  std::vector<float> to_f32() const;

  friend bool operator==(const TensorRecord&, const TensorRecord&) = default;

 private:
  DType dtype_ = DType::f32;
  std::vector<std::int64_t> shape_;
  std::vector<std::uint8_t> data_;
};

/// Name-indexed tensors; names are unique by construction.
struct TensorMap {
  std::map<std::string, TensorRecord> records;
  std::map<std::string, std::string> metadata;

  const TensorRecord& at(const std::string& name) const;
  bool contains(const std::string& name) const { return records.count(name) != 0; }

  friend bool operator==(const TensorMap&, const TensorMap&) = default;
};

// Container layout:
//   u64 little-endian header length N
//   N bytes of UTF-8 JSON: {"<name>": {"dtype": "F32", "shape": [...],
//                                     "data_offsets": [begin, end]}, ...,
//                          "__metadata__": {"key": "value"}}
//   raw payload; offsets are relative to the payload start.
// The writer lists tensors in name order, packs payloads contiguously in the
// same order and pads the header with spaces to a multiple of 8 bytes.
TensorMap parse_tensor_map(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> serialize_tensor_map(const TensorMap& map);

TensorMap load_tensor_map(const std::filesystem::path& path);
void save_tensor_map(const TensorMap& map, const std::filesystem::path& path);

/// Rebuilds the keypoint head: for every target keypoint, the output-channel
/// slice of the weight (and bias, when named) is the mean of the slices of its
/// source counterparts. Other tensors are copied untouched.
TensorMap remap_head_weights(const TensorMap& map, const std::string& weight_name,
                             const std::optional<std::string>& bias_name,
                             const SchemaMapping& mapping);

}  // namespace panopose
