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

#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hsfm/scene_io.hpp"

namespace hsfm {

struct SynthConfig {
  int num_cameras = 4;
  int num_humans = 3;
  double scene_radius = 1.5;        // humans stand inside this disk
  double ring_radius = 5.0;
  double camera_height = 2.0;
  double look_at_height = 1.0;
  int image_width = 640;
  int image_height = 480;
  double focal_min = 500.0;
  double focal_max = 700.0;
  int grid_stride = 16;
  int num_boxes = 4;
  double wall_radius = 9.0;
  double wall_height = 3.0;
  double pose_deg = 15.0;           // per-joint articulation spread
  double beta_sigma = 0.0;          // ground-truth shape spread

  // observation noise
  double keypoint_sigma_px = 0.0;
  double keypoint_dropout = 0.0;
  double pointmap_noise = 0.0;      // relative, per point
  double pair_scale_drift = 0.0;    // pair scale uniform in [1 - d, 1 + d]
  double estimate_rotation_deg = 0.0;
  double estimate_pose_deg = 0.0;
  double estimate_beta_sigma = 0.0;
  double estimate_translation_frac = 0.0;

  // initialization noise
  double init_rotation_deg = 0.0;
  double init_translation_frac = 0.0;
  /// The data-driven reconstruction is this many times too small, so the
  /// ground-truth world scale equals it.
  double init_alpha_multiplier = 1.0;

  std::uint64_t seed = 0;
};

nlohmann::json SynthConfigToJson(const SynthConfig& config);
/// Unknown keys and invalid values throw ConfigError.
SynthConfig SynthConfigFromJson(const nlohmann::json& j);
void ValidateSynthConfig(const SynthConfig& config);

struct SynthScene {
  SynthConfig config;
  Scene scene;               // what the engine consumes
  WorldState ground_truth;   // exact state, pairs carry the exact pair poses
};

/// Deterministic per seed. Throws ConfigError on invalid configs and when a
/// human is outside every camera's view.
SynthScene GenerateScene(const SynthConfig& config);

/// Scene files plus `gt/` (a state snapshot) and `synth.json`.
void WriteSynthScene(const SynthScene& scene, const std::filesystem::path& dir);

/// One config per value along `axis` (humans, cameras, noise, alpha_init);
/// every config keeps the base seed. Throws ConfigError.
std::vector<SynthConfig> SweepConfigs(const SynthConfig& base, const std::string& axis,
                                      const std::vector<double>& values);

struct SweepEntry {
  std::string axis;
  double value = 0.0;
  std::filesystem::path dir;
};

/// Generates every sweep scene under `out_dir` and writes sweep.json.
std::vector<SweepEntry> WriteSweep(const SynthConfig& base, const std::string& axis,
                                   const std::vector<double>& values,
                                   const std::filesystem::path& out_dir);

}  // namespace hsfm
