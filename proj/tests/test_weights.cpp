// Copyright 2026 The panopose Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstring>
#include <filesystem>
#include <random>

#include <doctest.h>
#include <json.hpp>

#include "panopose/error.hpp"
#include "panopose/weights.hpp"

using namespace panopose;

namespace {

std::vector<std::uint8_t> raw_container(const std::string& header, std::size_t payload_bytes) {
  std::vector<std::uint8_t> out;
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(header.size() >> (8 * i)));
  out.insert(out.end(), header.begin(), header.end());
  out.resize(out.size() + payload_bytes, 0xAB);
  return out;
}

TensorMap head_map(std::int64_t k, std::int64_t c) {
  std::vector<float> w(static_cast<std::size_t>(k * c)), b(static_cast<std::size_t>(k));
  for (std::int64_t s = 0; s < k; ++s) {
    for (std::int64_t e = 0; e < c; ++e) w[static_cast<std::size_t>(s * c + e)] = static_cast<float>(s);
    b[static_cast<std::size_t>(s)] = static_cast<float>(s);
  }
  TensorMap m;
  m.records["head.weight"] = TensorRecord::from_f32({k, c, 1, 1}, w);
  m.records["head.bias"] = TensorRecord::from_f32({k}, b);
  m.records["backbone.conv"] = TensorRecord::from_f32({2, 3}, std::vector<float>{1, 2, 3, 4, 5, 6});
  return m;
}

}  // namespace

TEST_CASE("parse a single tensor") {
  std::vector<float> v{1, 2, 3, 4, 5, 6};
  TensorMap m;
  m.records["w"] = TensorRecord::from_f32({2, 3}, v);
  const auto bytes = serialize_tensor_map(m);
  const auto back = parse_tensor_map(bytes);
  REQUIRE(back.contains("w"));
  CHECK(back.at("w").element_count() == 6);
  CHECK(back.at("w").to_f32() == v);
  CHECK(back == m);
}

TEST_CASE("serialization is deterministic with contiguous offsets") {
  TensorMap empty;
  const auto eb = serialize_tensor_map(empty);
  CHECK(parse_tensor_map(eb).records.empty());

  auto m = head_map(4, 3);
  CHECK(serialize_tensor_map(m) == serialize_tensor_map(m));

  const auto bytes = serialize_tensor_map(m);
  std::uint64_t n = 0;
  for (int i = 7; i >= 0; --i) n = n << 8 | bytes[static_cast<std::size_t>(i)];
  CHECK((8 + n) % 8 == 0);
  const auto header = nlohmann::json::parse(std::string(bytes.begin() + 8, bytes.begin() + 8 + static_cast<long>(n)));
  std::uint64_t expect = 0;
  for (const auto& [name, e] : header.items()) {  // name order
    CHECK(e["data_offsets"][0].get<std::uint64_t>() == expect);
    expect = e["data_offsets"][1].get<std::uint64_t>();
  }
  CHECK(8 + n + expect == bytes.size());
}

TEST_CASE("malformed containers are rejected") {
  CHECK_THROWS_AS(parse_tensor_map(std::vector<std::uint8_t>{1, 2, 3}), Error);

  auto too_long = raw_container("{}", 0);
  too_long[0] = 0xFF;
  CHECK_THROWS_AS(parse_tensor_map(too_long), Error);

  CHECK_THROWS_AS(parse_tensor_map(raw_container("{\"w\": [", 0)), Error);

  try {
    parse_tensor_map(raw_container(R"({"w":{"dtype":"F32","shape":[2,3],"data_offsets":[0,24]}})", 8));
    FAIL("expected truncated payload");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("truncated payload") != std::string::npos);
  }

  CHECK_THROWS_AS(parse_tensor_map(raw_container(
                      R"({"a":{"dtype":"F32","shape":[2],"data_offsets":[0,8]},"b":{"dtype":"F32","shape":[2],"data_offsets":[4,12]}})",
                      12)),
                  Error);

  try {
    parse_tensor_map(raw_container(
        R"({"a":{"dtype":"F32","shape":[1],"data_offsets":[0,4]},"a":{"dtype":"F32","shape":[1],"data_offsets":[4,8]}})",
        8));
    FAIL("expected duplicate name");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("duplicate") != std::string::npos);
  }

  CHECK_THROWS_AS(parse_tensor_map(raw_container(R"({"a":{"dtype":"F32","shape":[3],"data_offsets":[0,8]}})", 8)),
                  Error);
  CHECK_THROWS_AS(parse_tensor_map(raw_container(R"({"a":{"dtype":"Q4","shape":[1],"data_offsets":[0,1]}})", 8)),
                  Error);
}

TEST_CASE("file round trip is byte exact") {
  const auto path = std::filesystem::temp_directory_path() / "panopose_test_weights.bin";
  auto m = head_map(17, 5);
  m.metadata["format"] = "pt";
  save_tensor_map(m, path);
  const auto loaded = load_tensor_map(path);
  CHECK(loaded == m);
  const auto path2 = std::filesystem::temp_directory_path() / "panopose_test_weights2.bin";
  save_tensor_map(loaded, path2);
  CHECK(serialize_tensor_map(load_tensor_map(path2)) == serialize_tensor_map(m));
  std::filesystem::remove(path);
  std::filesystem::remove(path2);
  CHECK_THROWS_AS(load_tensor_map(path), Error);
}

TEST_CASE("head remap with the default mapping") {
  const auto mapping = default_mapping();
  const auto m = head_map(17, 4);
  const auto out = remap_head_weights(m, "head.weight", "head.bias", mapping);
  const auto w = out.at("head.weight").to_f32();
  const auto b = out.at("head.bias").to_f32();
  CHECK(out.at("head.weight").shape() == std::vector<std::int64_t>{17, 4, 1, 1});
  // neck: left shoulder (5) and right shoulder (6)
  for (int e = 0; e < 4; ++e) CHECK(w[4 * 4 + static_cast<std::size_t>(e)] == 5.5f);
  CHECK(b[4] == 5.5f);
  CHECK(b[0] == 1.5f);  // head: eyes 1 and 2
  CHECK(b[8] == 11.5f);  // center hip: hips 11 and 12
  CHECK(b[13] == 14.0f);  // right knee
  CHECK(out.at("backbone.conv") == m.at("backbone.conv"));
}

TEST_CASE("identity and constant means") {
  const auto m = head_map(3, 2);
  SchemaMapping id{"a", "a", 3, {{0}, {1}, {2}}};
  CHECK(remap_head_weights(m, "head.weight", "head.bias", id) == m);

  TensorMap two;
  two.records["w"] = TensorRecord::from_f32({2, 1, 1, 1}, std::vector<float>{2.0f, 4.0f});
  SchemaMapping merge{"a", "b", 2, {{0, 1}}};
  const auto out = remap_head_weights(two, "w", std::nullopt, merge);
  CHECK(out.at("w").to_f32() == std::vector<float>{3.0f});
}

TEST_CASE("head remap error paths") {
  const auto m = head_map(17, 2);
  const auto mapping = default_mapping();
  CHECK_THROWS_AS(remap_head_weights(m, "missing", std::nullopt, mapping), Error);
  CHECK_THROWS_AS(remap_head_weights(m, "backbone.conv", std::nullopt, mapping), Error);
  CHECK_THROWS_AS(remap_head_weights(m, "head.weight", "backbone.conv", mapping), Error);
  auto bad = mapping;
  bad.entries[0] = {17};
  try {
    remap_head_weights(m, "head.weight", std::nullopt, bad);
    FAIL("expected range error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::range);
  }
  const auto small = head_map(5, 2);
  CHECK_THROWS_AS(remap_head_weights(small, "head.weight", std::nullopt, mapping), Error);
}
