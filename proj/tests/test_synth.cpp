// Copyright 2026 The hsfm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>

#include "hsfm/losses.hpp"
#include "hsfm/synth.hpp"

namespace fs = std::filesystem;

namespace hsfm {
namespace {

fs::path TempDir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hsfm_test_synth_" + name);
  fs::remove_all(p);
  return p;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

SynthConfig Small() {
  SynthConfig c;
  c.num_cameras = 3;
  c.num_humans = 2;
  c.grid_stride = 32;
  return c;
}

TEST(Synth, SameSeedWritesIdenticalFiles) {
  SynthConfig c = Small();
  c.keypoint_sigma_px = 2.0;
  c.pointmap_noise = 0.02;
  c.init_rotation_deg = 5.0;
  c.seed = 11;
  const fs::path a = TempDir("a");
  const fs::path b = TempDir("b");
  WriteSynthScene(GenerateScene(c), a);
  WriteSynthScene(GenerateScene(c), b);
  int files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), a);
    ASSERT_TRUE(fs::exists(b / rel)) << rel;
    EXPECT_EQ(Slurp(e.path()), Slurp(b / rel)) << rel;
    ++files;
  }
  EXPECT_GT(files, 5);
  c.seed = 12;
  const SynthScene other = GenerateScene(c);
  EXPECT_NE(other.scene.keypoints[0].joints, GenerateScene(Small()).scene.keypoints[0].joints);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Synth, NoiselessGroundTruthHasZeroLoss) {
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    SynthConfig c = Small();
    c.seed = seed;
    const SynthScene s = GenerateScene(c);
    const LossFunction loss(s.scene.skeleton, s.scene.keypoints, c.num_cameras, c.num_humans);
    const LossBreakdown b = loss.Evaluate(s.ground_truth, LossOptions{}, nullptr);
    EXPECT_LT(b.humans, 1e-10);
    EXPECT_LT(b.places, 1e-8);
    EXPECT_GT(b.confidence_mass, 0.0);
  }
}

TEST(Synth, KeypointNoiseHasRayleighMean) {
  SynthConfig c = Small();
  c.num_cameras = 6;
  c.num_humans = 4;
  c.keypoint_sigma_px = 3.0;
  double sum = 0.0;
  int count = 0;
  for (std::uint64_t seed = 0; count < 10000; ++seed) {
    c.seed = seed;
    const SynthScene s = GenerateScene(c);
    for (const KeypointObservation& k : s.scene.keypoints) {
      const CameraModel& cam = s.ground_truth.cameras[k.camera_id];
      const Points3 j = ForwardKinematics(s.ground_truth.humans[k.human_id], s.scene.skeleton);
      for (int i = 0; i < j.cols(); ++i) {
        if (k.confidence(i) <= 0.0) continue;
        sum += (k.joints.col(i) - Project(j.col(i), cam, s.ground_truth.alpha).pixel).norm();
        ++count;
      }
    }
  }
  const double expected = c.keypoint_sigma_px * std::sqrt(std::numbers::pi / 2.0);
  EXPECT_NEAR(sum / count, expected, 0.1 * expected);
}

TEST(Synth, DoublingKeypointNoiseDoublesLoss) {
  SynthConfig c = Small();
  c.keypoint_sigma_px = 1.5;
  c.seed = 4;
  const SynthScene a = GenerateScene(c);
  c.keypoint_sigma_px = 3.0;
  const SynthScene b = GenerateScene(c);
  LossOptions o;
  o.skip_places = true;
  const double la = LossFunction(a.scene.skeleton, a.scene.keypoints, 3, 2)
                        .Evaluate(a.ground_truth, o, nullptr).humans;
  const double lb = LossFunction(b.scene.skeleton, b.scene.keypoints, 3, 2)
                        .Evaluate(b.ground_truth, o, nullptr).humans;
  EXPECT_GT(la, 0.0);
  EXPECT_NEAR(lb / la, 2.0, 0.4);
}

TEST(Synth, AlphaMultiplierSetsGroundTruthScale) {
  SynthConfig c = Small();
  c.init_alpha_multiplier = 2.0;
  const SynthScene s = GenerateScene(c);
  EXPECT_EQ(s.ground_truth.alpha, 2.0);
  const SynthScene one = GenerateScene(Small());
  for (std::size_t k = 0; k < s.ground_truth.cameras.size(); ++k) {
    EXPECT_LT((s.ground_truth.cameras[k].Center(2.0) - one.ground_truth.cameras[k].Center(1.0)).norm(),
              1e-12);
    EXPECT_LT((s.scene.state.cameras[k].translation * 2.0 - one.scene.state.cameras[k].translation).norm(),
              1e-12);
  }
}

TEST(Synth, SweepAxes) {
  const SynthConfig base = Small();
  const std::vector<SynthConfig> h = SweepConfigs(base, "humans", {1, 2, 3, 4});
  ASSERT_EQ(h.size(), 4u);
  for (int k = 0; k < 4; ++k) {
    EXPECT_EQ(h[k].num_humans, k + 1);
    EXPECT_EQ(h[k].seed, base.seed);
  }
  EXPECT_EQ(SweepConfigs(base, "cameras", {5})[0].num_cameras, 5);
  EXPECT_EQ(SweepConfigs(base, "noise", {2.5})[0].keypoint_sigma_px, 2.5);
  EXPECT_EQ(SweepConfigs(base, "alpha_init", {3})[0].init_alpha_multiplier, 3.0);
  EXPECT_THROW(SweepConfigs(base, "lighting", {1}), ConfigError);
  EXPECT_THROW(SweepConfigs(base, "humans", {}), ConfigError);
  EXPECT_THROW(SweepConfigs(base, "humans", {0}), ConfigError);

  const fs::path dir = TempDir("sweep");
  const std::vector<SweepEntry> entries = WriteSweep(base, "humans", {1, 2}, dir);
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_TRUE(fs::exists(dir / "sweep.json"));
  for (const SweepEntry& e : entries) EXPECT_TRUE(fs::exists(e.dir / "gt" / "state.json"));
  fs::remove_all(dir);
}

TEST(Synth, ConfigValidation) {
  SynthConfig c = Small();
  c.num_cameras = 0;
  EXPECT_THROW(GenerateScene(c), ConfigError);
  c = Small();
  c.keypoint_dropout = 1.0;
  EXPECT_THROW(GenerateScene(c), ConfigError);
  c = Small();
  c.ring_radius = 1.0;
  EXPECT_THROW(GenerateScene(c), ConfigError);
  c = Small();
  c.init_alpha_multiplier = 0.0;
  EXPECT_THROW(GenerateScene(c), ConfigError);
  EXPECT_THROW(SynthConfigFromJson({{"cameras", 3}}), ConfigError);
  EXPECT_THROW(SynthConfigFromJson(nlohmann::json::array()), ConfigError);
  const SynthConfig d = SynthConfigFromJson(SynthConfigToJson(Small()));
  EXPECT_EQ(d.num_cameras, 3);
  EXPECT_EQ(d.grid_stride, 32);
}

}  // namespace
}  // namespace hsfm
