// Copyright 2026 The panopose Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <random>

#include <doctest.h>

#include "panopose/dataio.hpp"
#include "panopose/error.hpp"
#include "synthetic.hpp"

using namespace panopose;

namespace {

std::string pose_json(std::size_t k) {
  std::string s = "[";
  for (std::size_t i = 0; i < k; ++i) s += (i ? ",[" : "[") + std::to_string(10 + i) + ",20,2]";
  return s + "]";
}

std::string file_with(const std::string& persons, const std::string& extra_frames = "") {
  return R"({"schema":"jrdb17","pano":{"width":3760,"height":480},"frames":[{"frame_id":"a","persons":[)" +
         persons + "]}" + extra_frames + "]}";
}

std::string error_of(const std::string& text, FileKind kind = FileKind::ground_truth) {
  try {
    parse_dataset(text, jrdb17(), kind);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal file") {
  const auto ds = parse_dataset(file_with(R"({"id":7,"box":[1,2,3,4],"pose":)" + pose_json(17) + "}"),
                                jrdb17(), FileKind::ground_truth);
  REQUIRE(ds.frames.size() == 1);
  const auto& p = ds.frames[0].persons.at(0);
  CHECK(p.id == "7");
  CHECK(p.box == BoundingBox{1, 2, 3, 4, 1.0});
  CHECK(p.pose->size() == 17);
  CHECK(p.pose->keypoints[3].x == 13);
  CHECK_FALSE(p.score);
  CHECK(ds.pano == PanoramaSpec{3760, 480});
}

TEST_CASE("validation errors name the frame and person") {
  const auto short_pose = error_of(file_with(R"({"pose":)" + pose_json(16) + "}"));
  CHECK(short_pose.find("frame 'a' person 0") != std::string::npos);
  CHECK(short_pose.find("16 keypoints") != std::string::npos);

  CHECK(error_of(file_with(R"({"box":[1,2,3,4]})", R"(,{"frame_id":"a","persons":[]})"))
            .find("duplicate frame id") != std::string::npos);
  CHECK(error_of(file_with(R"({"box":[1,2,3,4]})"), FileKind::predictions).find("prediction without score") !=
        std::string::npos);
  CHECK(error_of(file_with(R"({"box":[3,2,1,4]})")).find("x1 < x2") != std::string::npos);
  CHECK(error_of(file_with(R"({"id":"x"})")).find("box or a pose") != std::string::npos);
  CHECK(error_of(file_with(R"({"box":[1,2,3,4],"score":1.5})")).find("score") != std::string::npos);
  CHECK(error_of(R"({"schema":"coco17","pano":{"width":1,"height":1},"frames":[]})").find("schema mismatch") !=
        std::string::npos);
  CHECK_FALSE(error_of("{nope").empty());
  CHECK_FALSE(error_of(R"({"schema":"jrdb17","frames":[]})").empty());
}

TEST_CASE("frames without persons are kept") {
  const auto ds = parse_dataset(file_with(""), jrdb17(), FileKind::predictions);
  REQUIRE(ds.frames.size() == 1);
  CHECK(ds.frames[0].persons.empty());
}

TEST_CASE("canonical round trip") {
  auto gt = testing::make_ground_truth(61);
  gt.meta["source"] = "synthetic";
  const auto text = dataset_to_string(gt);
  const auto back = parse_dataset(text, jrdb17(), FileKind::ground_truth);
  CHECK(back == gt);
  CHECK(dataset_to_string(back) == text);

  const auto pred = testing::perturb(gt, 3.0, 9);
  const auto pred_back = parse_dataset(dataset_to_string(pred), jrdb17(), FileKind::predictions);
  CHECK(pred_back == pred);

  auto shuffled = gt;
  std::mt19937_64 rng(2);
  std::shuffle(shuffled.frames.begin(), shuffled.frames.end(), rng);
  CHECK(dataset_to_string(shuffled) == text);

  Dataset empty{"jrdb17", {}, {}, {}};
  CHECK(parse_dataset(dataset_to_string(empty), jrdb17(), FileKind::ground_truth) == empty);
}
