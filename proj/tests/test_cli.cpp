// Copyright 2026 The panopose Authors
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "panopose/cli.hpp"
#include "panopose/dataio.hpp"
#include "panopose/weights.hpp"
#include "synthetic.hpp"

using namespace panopose;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("panopose_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(run({}).code == cli::kExitUsage);
  CHECK(run({"bogus"}).code == cli::kExitUsage);
  CHECK(run({"eval", "--gt"}).code == cli::kExitUsage);
  CHECK(run({"nms", "--pred", "/does/not/exist", "--out", "x"}).code == cli::kExitUsage);
  CHECK(run({"--help"}).code == cli::kExitOk);
}

TEST_CASE("eval against itself") {
  TempDir dir;
  const auto gt = testing::make_ground_truth(71);
  save_dataset(gt, dir / "g.json");
  save_dataset(testing::perturb(gt, 0.0, 1), dir / "p.json");
  const auto r = run({"eval", "--gt", dir / "g.json", "--pred", dir / "p.json", "--report", dir / "r.json",
                      "--table", dir / "t.csv", "--threads", "3"});
  CHECK(r.code == 0);
  CHECK(r.out == "ospa_iou 0.000\nap_05 1.000\n");
  CHECK(slurp(dir / "r.json").find("\"ospa_cutoff\"") != std::string::npos);
  CHECK(slurp(dir / "t.csv").rfind("frame_id,", 0) == 0);

  // ground truth has no scores, so it is not a valid prediction file
  const auto bad = run({"eval", "--gt", dir / "g.json", "--pred", dir / "g.json"});
  CHECK(bad.code == cli::kExitValidation);
  CHECK(bad.err.find("prediction without score") != std::string::npos);

  CHECK(run({"eval", "--gt", dir / "g.json", "--pred", dir / "p.json", "--sigmas", "0.1,0.2"}).code ==
        cli::kExitValidation);
  CHECK(run({"eval", "--gt", dir / "g.json", "--pred", dir / "p.json", "--oks-threshold", "2"}).code ==
        cli::kExitUsage);
}

TEST_CASE("nms, shift and boxes-from-poses") {
  TempDir dir;
  Dataset one{"jrdb17", {3760, 480}, {}, {{"f", {}}}};
  Person p;
  p.box = BoundingBox{10, 10, 50, 90, 0.7};
  p.score = 0.7;
  one.frames[0].persons.push_back(p);
  save_dataset(one, dir / "d.json");
  REQUIRE(run({"nms", "--pred", dir / "d.json", "--out", dir / "n.json"}).code == 0);
  auto kept = load_predictions(dir / "n.json", jrdb17());
  CHECK(kept.meta.at("nms_iou") == "0.5");
  kept.meta.clear();
  CHECK(kept == one);

  const auto gt = testing::make_ground_truth(73);
  save_dataset(gt, dir / "g.json");
  REQUIRE(run({"shift", "--in", dir / "g.json", "--out", dir / "s.json", "--shift", "0"}).code == 0);
  auto same = load_ground_truth(dir / "s.json", jrdb17());
  same.meta.clear();
  CHECK(dataset_to_string(same) == dataset_to_string(gt));

  const auto seeded = run({"shift", "--in", dir / "g.json", "--out", dir / "s.json", "--seed", "5"});
  CHECK(seeded.code == 0);
  CHECK(seeded.out.find(" seed 5 removed ") != std::string::npos);
  CHECK(run({"shift", "--in", dir / "g.json", "--out", dir / "s.json"}).code == cli::kExitUsage);
  CHECK(run({"shift", "--in", dir / "g.json", "--out", dir / "s.json", "--shift", "1", "--seed", "2"}).code ==
        cli::kExitUsage);

  REQUIRE(run({"boxes-from-poses", "--in", dir / "g.json", "--out", dir / "b.json", "--margin", "0"}).code == 0);
  auto boxed = load_ground_truth(dir / "b.json", jrdb17());
  boxed.meta.clear();
  CHECK(boxed == gt);  // synthetic boxes are the tight extents
}

TEST_CASE("remap-weights and export-mapping") {
  TempDir dir;
  TensorMap m;
  std::vector<float> w(17 * 2);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = static_cast<float>(i / 2);
  m.records["head.weight"] = TensorRecord::from_f32({17, 2, 1, 1}, w);
  save_tensor_map(m, dir / "in.bin");
  const auto r = run({"remap-weights", "--src", dir / "in.bin", "--out", dir / "out.bin", "--weight-name",
                      "head.weight"});
  CHECK(r.code == 0);
  const auto out = load_tensor_map(dir / "out.bin");
  CHECK(out.metadata.at("keypoint_mapping") == "coco17->jrdb17");
  CHECK(out.at("head.weight").to_f32()[4 * 2] == 5.5f);

  REQUIRE(run({"export-mapping", "--out", dir / "map.json"}).code == 0);
  CHECK(run({"remap-weights", "--src", dir / "in.bin", "--out", dir / "out2.bin", "--weight-name", "head.weight",
             "--mapping", dir / "map.json"})
            .code == 0);
  CHECK(slurp(dir / "out.bin") == slurp(dir / "out2.bin"));
  CHECK(run({"remap-weights", "--src", dir / "in.bin", "--out", dir / "x.bin", "--weight-name", "nope"}).code ==
        cli::kExitValidation);
}

TEST_CASE("decode end to end") {
  TempDir dir;
  Dataset det{"jrdb17", {3760, 480}, {}, {{"f", {}}}};
  Person p;
  p.id = "p0";
  p.box = BoundingBox{1000, 100, 1144, 292, 0.9};
  p.score = 0.9;
  det.frames[0].persons.push_back(p);
  save_dataset(det, dir / "det.json");

  TensorMap maps;
  std::vector<float> hm(17 * 96 * 72, 0.0f);
  for (std::size_t k = 0; k < 17; ++k) hm[(k * 96 + 48) * 72 + 36] = 1.0f;
  maps.records["f/p0"] = TensorRecord::from_f32({17, 96, 72}, hm);
  save_tensor_map(maps, dir / "hm.bin");

  REQUIRE(run({"decode", "--detections", dir / "det.json", "--heatmaps", dir / "hm.bin", "--out",
               dir / "pred.json", "--padding", "1.0"})
              .code == 0);
  const auto pred = load_predictions(dir / "pred.json", jrdb17());
  const auto& pose = *pred.frames[0].persons[0].pose;
  // cell (48, 36) center is crop (146, 194); the crop scale is 0.5 from the box
  CHECK(pose.keypoints[0].x == doctest::Approx(1000 + 146 * 0.5));
  CHECK(pose.keypoints[0].y == doctest::Approx(100 + 194 * 0.5));

  maps.records.clear();
  save_tensor_map(maps, dir / "hm.bin");
  CHECK(run({"decode", "--detections", dir / "det.json", "--heatmaps", dir / "hm.bin", "--out",
             dir / "pred.json"})
            .code == cli::kExitValidation);
}
