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

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "hsfm/body.hpp"
#include "hsfm/observations.hpp"

namespace hsfm {

struct PlyVertex {
  Vec3 position = Vec3::Zero();
  std::array<std::uint8_t, 3> color{255, 255, 255};
};

/// Vertices with colors plus an optional edge list. Positions are written as
/// float unless `double_precision` is set.
struct PlyDocument {
  std::vector<PlyVertex> vertices;
  std::vector<std::array<int, 2>> edges;
  bool double_precision = false;
};

/// Throws SchemaMismatch on out-of-range edges or non-finite positions,
/// IoError on write failures.
void WritePly(const PlyDocument& doc, const std::filesystem::path& path,
              bool binary = true);

/// Every valid pointmap cell of every camera, colored by camera.
PlyDocument ScenePointCloud(const WorldState& state);
/// Joints and bones of every human, colored by human.
PlyDocument SkeletonLines(const WorldState& state, const SkeletonTemplate& tmpl);
/// Per camera: apex at the metric center, then the four image corners at
/// `depth` meters in front; eight edges.
PlyDocument CameraFrusta(const WorldState& state, double depth = 0.3);

/// scene.ply, skeletons.ply and cameras.ply under `dir`.
void ExportWorld(const WorldState& state, const SkeletonTemplate& tmpl,
                 const std::filesystem::path& dir, bool binary = true);

}  // namespace hsfm
