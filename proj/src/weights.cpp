// Copyright 2026 The panopose Authors
// SPDX-License-Identifier: Apache-2.0

#include "panopose/weights.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <limits>
#include <set>

#include <json.hpp>

#include "io_util.hpp"
#include "panopose/error.hpp"

namespace panopose {

namespace {

struct DTypeInfo {
  DType dtype;
  std::string_view name;
  std::size_t size;
};

constexpr std::array<DTypeInfo, 10> kDTypes{{
    {DType::f64, "F64", 8},
    {DType::f32, "F32", 4},
    {DType::f16, "F16", 2},
    {DType::bf16, "BF16", 2},
    {DType::i64, "I64", 8},
    {DType::i32, "I32", 4},
    {DType::i16, "I16", 2},
    {DType::i8, "I8", 1},
    {DType::u8, "U8", 1},
    {DType::boolean, "BOOL", 1},
}};

const DTypeInfo& info(DType dtype) {
  for (const auto& i : kDTypes)
    if (i.dtype == dtype) return i;
  throw Error(Errc::format, "unknown dtype");
}

constexpr std::string_view kMetadataKey = "__metadata__";

// Element count of `shape`, or nullopt on negative extents or overflow.
std::optional<std::uint64_t> checked_count(const std::vector<std::int64_t>& shape) {
  std::uint64_t n = 1;
  for (auto d : shape) {
    if (d < 0) return std::nullopt;
    const auto ud = static_cast<std::uint64_t>(d);
    if (ud != 0 && n > std::numeric_limits<std::uint64_t>::max() / ud) return std::nullopt;
    n *= ud;
  }
  return n;
}

std::uint32_t load_u32_le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

void store_u32_le(std::uint8_t* p, std::uint32_t v) {
  p[0] = static_cast<std::uint8_t>(v);
  p[1] = static_cast<std::uint8_t>(v >> 8);
  p[2] = static_cast<std::uint8_t>(v >> 16);
  p[3] = static_cast<std::uint8_t>(v >> 24);
}

std::vector<std::uint8_t> encode_f32(std::span<const float> values) {
  std::vector<std::uint8_t> bytes(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i)
    store_u32_le(bytes.data() + 4 * i, std::bit_cast<std::uint32_t>(values[i]));
  return bytes;
}

std::string shape_str(const std::vector<std::int64_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "," : "") + std::to_string(shape[i]);
  return s + "]";
}

}  // namespace

std::size_t dtype_size(DType dtype) { return info(dtype).size; }

std::string_view dtype_name(DType dtype) { return info(dtype).name; }

DType dtype_from_name(std::string_view name) {
  for (const auto& i : kDTypes)
    if (i.name == name) return i.dtype;
  throw Error(Errc::format, "unknown dtype '" + std::string(name) + "'");
}

TensorRecord::TensorRecord(DType dtype, std::vector<std::int64_t> shape,
                           std::vector<std::uint8_t> data)
    : dtype_(dtype), shape_(std::move(shape)), data_(std::move(data)) {
  const auto count = checked_count(shape_);
  if (!count) throw Error(Errc::shape, "invalid shape " + shape_str(shape_));
  if (*count * dtype_size(dtype_) != data_.size())
    throw Error(Errc::shape, "shape " + shape_str(shape_) + " needs " +
                                 std::to_string(*count * dtype_size(dtype_)) + " bytes, got " +
                                 std::to_string(data_.size()));
}

TensorRecord TensorRecord::from_f32(std::vector<std::int64_t> shape,
                                    std::span<const float> values) {
  return TensorRecord(DType::f32, std::move(shape), encode_f32(values));
}

std::size_t TensorRecord::element_count() const { return data_.size() / dtype_size(dtype_); }

std::vector<float> TensorRecord::to_f32() const {
  if (dtype_ != DType::f32)
    throw Error(Errc::format, "expected F32 tensor, got " + std::string(dtype_name(dtype_)));
  std::vector<float> out(element_count());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::bit_cast<float>(load_u32_le(data_.data() + 4 * i));
  return out;
}

const TensorRecord& TensorMap::at(const std::string& name) const {
  auto it = records.find(name);
  if (it == records.end()) throw Error(Errc::validation, "missing tensor '" + name + "'");
  return it->second;
}

TensorMap parse_tensor_map(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8) throw Error(Errc::parse, "malformed header: file shorter than 8 bytes");
  std::uint64_t header_len = 0;
  for (int i = 7; i >= 0; --i) header_len = header_len << 8 | bytes[static_cast<std::size_t>(i)];
  if (header_len > bytes.size() - 8)
    throw Error(Errc::parse, "malformed header: declared length " + std::to_string(header_len) +
                                 " exceeds file size");

  const auto* hbeg = reinterpret_cast<const char*>(bytes.data() + 8);
  std::string_view header_text(hbeg, static_cast<std::size_t>(header_len));
  const auto payload = bytes.subspan(8 + static_cast<std::size_t>(header_len));

  // nlohmann keeps the last of duplicated keys, so duplicates are caught here.
  std::set<std::string> top_keys;
  std::string duplicate;
  auto on_event = [&](int depth, nlohmann::json::parse_event_t event, nlohmann::json& parsed) {
    if (event == nlohmann::json::parse_event_t::key && depth == 1) {
      auto key = parsed.get<std::string>();
      if (!top_keys.insert(key).second && duplicate.empty()) duplicate = key;
    }
    return true;
  };
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_text, on_event);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse, std::string("malformed header: ") + e.what());
  }
  if (!duplicate.empty()) throw Error(Errc::format, "duplicate tensor name '" + duplicate + "'");
  if (!header.is_object()) throw Error(Errc::parse, "malformed header: expected a JSON object");

  TensorMap map;
  struct Span {
    std::uint64_t begin, end;
    std::string name;
  };
  std::vector<Span> spans;
  for (const auto& [name, entry] : header.items()) {
    if (name == kMetadataKey) {
      if (!entry.is_object()) throw Error(Errc::format, "malformed header: __metadata__");
      for (const auto& [k, v] : entry.items()) {
        if (!v.is_string()) throw Error(Errc::format, "malformed header: metadata values must be strings");
        map.metadata[k] = v.get<std::string>();
      }
      continue;
    }
    const auto where = "tensor '" + name + "': ";
    if (!entry.is_object() || !entry.contains("dtype") || !entry.contains("shape") ||
        !entry.contains("data_offsets"))
      throw Error(Errc::parse, "malformed header: " + where + "needs dtype, shape, data_offsets");
    const auto& jd = entry["dtype"];
    const auto& js = entry["shape"];
    const auto& jo = entry["data_offsets"];
    if (!jd.is_string() || !js.is_array() || !jo.is_array() || jo.size() != 2)
      throw Error(Errc::parse, "malformed header: " + where + "bad field types");
    const auto dtype = dtype_from_name(jd.get<std::string>());
    std::vector<std::int64_t> shape;
    for (const auto& d : js) {
      if (!d.is_number_unsigned()) throw Error(Errc::parse, "malformed header: " + where + "bad extent");
      shape.push_back(d.get<std::int64_t>());
    }
    if (!jo[0].is_number_unsigned() || !jo[1].is_number_unsigned())
      throw Error(Errc::parse, "malformed header: " + where + "bad offsets");
    const auto begin = jo[0].get<std::uint64_t>();
    const auto end = jo[1].get<std::uint64_t>();
    if (begin > end) throw Error(Errc::format, where + "offsets out of order");
    if (end > payload.size())
      throw Error(Errc::format, "truncated payload: " + where + "ends at " + std::to_string(end) +
                                    ", payload has " + std::to_string(payload.size()) + " bytes");
    const auto count = checked_count(shape);
    if (!count || *count * dtype_size(dtype) != end - begin)
      throw Error(Errc::format, where + "byte range does not match shape " + shape_str(shape));
    std::vector<std::uint8_t> data(payload.begin() + static_cast<std::ptrdiff_t>(begin),
                                   payload.begin() + static_cast<std::ptrdiff_t>(end));
    map.records.emplace(name, TensorRecord(dtype, std::move(shape), std::move(data)));
    spans.push_back({begin, end, name});
  }

  std::sort(spans.begin(), spans.end(),
            [](const Span& a, const Span& b) { return std::tie(a.begin, a.end) < std::tie(b.begin, b.end); });
  for (std::size_t i = 1; i < spans.size(); ++i) {
    if (spans[i].begin < spans[i - 1].end)
      throw Error(Errc::format, "overlapping offsets: '" + spans[i - 1].name + "' and '" +
                                    spans[i].name + "'");
  }
  return map;
}

std::vector<std::uint8_t> serialize_tensor_map(const TensorMap& map) {
  nlohmann::json header = nlohmann::json::object();
  std::uint64_t offset = 0;
  for (const auto& [name, rec] : map.records) {
    if (name == kMetadataKey) throw Error(Errc::validation, "reserved tensor name '__metadata__'");
    const auto end = offset + rec.data().size();
    header[name] = {{"dtype", std::string(dtype_name(rec.dtype()))},
                    {"shape", rec.shape()},
                    {"data_offsets", {offset, end}}};
    offset = end;
  }
  if (!map.metadata.empty()) header[std::string(kMetadataKey)] = map.metadata;

  std::string text = header.dump();
  text.append((8 - text.size() % 8) % 8, ' ');

  std::vector<std::uint8_t> out;
  out.reserve(8 + text.size() + offset);
  const auto len = static_cast<std::uint64_t>(text.size());
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(len >> (8 * i)));
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& [name, rec] : map.records) out.insert(out.end(), rec.data().begin(), rec.data().end());
  return out;
}

TensorMap load_tensor_map(const std::filesystem::path& path) {
  const auto text = detail::read_file(path);
  return parse_tensor_map(
      std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void save_tensor_map(const TensorMap& map, const std::filesystem::path& path) {
  const auto bytes = serialize_tensor_map(map);
  detail::write_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

namespace {

TensorRecord remap_leading_axis(const TensorRecord& rec, const SchemaMapping& mapping) {
  const auto values = rec.to_f32();
  const auto k_source = static_cast<std::size_t>(rec.shape()[0]);
  const std::size_t slice = k_source == 0 ? 0 : values.size() / k_source;

  std::vector<float> out(mapping.entries.size() * slice);
  std::vector<double> acc(slice);
  for (std::size_t t = 0; t < mapping.entries.size(); ++t) {
    const auto& entry = mapping.entries[t];
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t s : entry) {
      const float* src = values.data() + s * slice;
      for (std::size_t e = 0; e < slice; ++e) acc[e] += static_cast<double>(src[e]);
    }
    const auto n = static_cast<double>(entry.size());
    float* dst = out.data() + t * slice;
    for (std::size_t e = 0; e < slice; ++e) dst[e] = static_cast<float>(acc[e] / n);
  }

  auto shape = rec.shape();
  shape[0] = static_cast<std::int64_t>(mapping.entries.size());
  return TensorRecord::from_f32(std::move(shape), out);
}

}  // namespace

TensorMap remap_head_weights(const TensorMap& map, const std::string& weight_name,
                             const std::optional<std::string>& bias_name,
                             const SchemaMapping& mapping) {
  const auto& weight = map.at(weight_name);
  if (weight.dtype() != DType::f32)
    throw Error(Errc::format, "tensor '" + weight_name + "' must be F32 for remapping");
  if (weight.shape().size() != 4)
    throw Error(Errc::shape, "tensor '" + weight_name + "' must have rank 4 [K, C, kh, kw], got " +
                                 shape_str(weight.shape()));
  const auto k_source = weight.shape()[0];
  if (static_cast<std::uint64_t>(k_source) != mapping.source_size)
    throw Error(Errc::shape, "tensor '" + weight_name + "' has " + std::to_string(k_source) +
                                 " output channels, mapping expects " +
                                 std::to_string(mapping.source_size));
  for (std::size_t t = 0; t < mapping.entries.size(); ++t) {
    if (mapping.entries[t].empty())
      throw Error(Errc::validation, "target " + std::to_string(t) + ": empty counterpart list");
    for (auto s : mapping.entries[t]) {
      if (s >= static_cast<std::size_t>(k_source))
        throw Error(Errc::range, "target " + std::to_string(t) + ": counterpart index " +
                                     std::to_string(s) + " >= " + std::to_string(k_source));
    }
  }

  TensorMap out = map;
  out.records[weight_name] = remap_leading_axis(weight, mapping);
  if (bias_name) {
    const auto& bias = map.at(*bias_name);
    if (bias.dtype() != DType::f32)
      throw Error(Errc::format, "tensor '" + *bias_name + "' must be F32 for remapping");
    if (bias.shape() != std::vector<std::int64_t>{k_source})
      throw Error(Errc::shape, "tensor '" + *bias_name + "' must have shape [" +
                                   std::to_string(k_source) + "], got " + shape_str(bias.shape()));
    out.records[*bias_name] = remap_leading_axis(bias, mapping);
  }
  return out;
}

}  // namespace panopose
