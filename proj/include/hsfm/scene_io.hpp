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

#include "hsfm/body.hpp"
#include "hsfm/observations.hpp"

namespace hsfm {

/// A loaded capture: the data-driven initial state plus everything the
/// front-ends produced.
struct Scene {
  SkeletonTemplate skeleton;
  WorldState state;  // humans empty until initialization
  int num_humans = 0;
  int image_width = 0;
  int image_height = 0;
  std::vector<KeypointObservation> keypoints;
  std::vector<HumanEstimate> human_estimates;
};

/// Reads `manifest.json` and every file it references. Throws ParseError,
/// SchemaMismatch, MissingCamera.
Scene LoadScene(const std::filesystem::path& dir);

/// Writes manifest.json, template.json, cameras.json, keypoints.json,
/// humans_init.json, depth_<c>.bin and pointmap_<i>_<j>[_ref].bin.
void SaveScene(const Scene& scene, const std::filesystem::path& dir);

// --- Binary grids -----------------------------------------------------------
// 16-byte header: magic "HSFM", u32 version, u32 W, u32 H (little-endian),
// followed by W*H row-major records.

inline constexpr std::uint32_t kBinaryVersion = 1;

struct PointmapFile {
  int width = 0;
  int height = 0;
  std::vector<float> xyzc;  // 4 floats per record: x, y, z, confidence
};

void WriteDepthFile(const std::filesystem::path& path, int width, int height,
                    const std::vector<double>& depth);
std::vector<double> ReadDepthFile(const std::filesystem::path& path, int* width,
                                  int* height);
void WritePointmapFile(const std::filesystem::path& path, int width, int height,
                       const std::vector<Vec3>& points,
                       const std::vector<double>& confidence);
void ReadPointmapFile(const std::filesystem::path& path, int* width, int* height,
                      std::vector<Vec3>* points, std::vector<double>* confidence);

// --- State snapshots ----------------------------------------------------------
// A snapshot directory holds state.json (alpha, grid, cameras, humans, pair
// poses), template.json and depth_<c>.bin. Optimization results and ground
// truth share this layout.

nlohmann::json CameraToJson(const CameraModel& cam);
CameraModel CameraFromJson(const nlohmann::json& j);
nlohmann::json HumanToJson(const HumanParams& h);
HumanParams HumanFromJson(const nlohmann::json& j, const SkeletonTemplate& tmpl);

void SaveSnapshot(const WorldState& state, const SkeletonTemplate& tmpl,
                  const std::filesystem::path& dir);
/// Pair pointmaps are not part of a snapshot; `pairs` come back with poses only.
WorldState LoadSnapshot(const std::filesystem::path& dir,
                        SkeletonTemplate* tmpl);

nlohmann::json ReadJsonFile(const std::filesystem::path& path);
void WriteJsonFile(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace hsfm
