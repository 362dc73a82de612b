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

#include "hsfm/observations.hpp"

#include <string>

namespace hsfm {

PixelGrid PixelGrid::ForImage(int image_width, int image_height, int stride) {
  if (stride < 1) throw ConfigError("grid stride must be >= 1");
  PixelGrid g;
  g.stride = stride;
  g.width = image_width / stride;
  g.height = image_height / stride;
  return g;
}

int WorldState::CameraIndex(int camera_id) const {
  for (std::size_t c = 0; c < cameras.size(); ++c) {
    if (cameras[c].id == camera_id) return static_cast<int>(c);
  }
  throw UnknownCamera("unknown camera id " + std::to_string(camera_id));
}

int WorldState::HumanIndex(int human_id) const {
  for (std::size_t h = 0; h < humans.size(); ++h) {
    if (humans[h].id == human_id) return static_cast<int>(h);
  }
  return -1;
}

Pointmap WorldPointmap(const WorldState& state, int camera_id) {
  const int c = state.CameraIndex(camera_id);
  const CameraModel& cam = state.cameras[c];
  const DepthMap& depth = state.depths[c];
  Pointmap out;
  out.points.assign(state.grid.size(), Vec3::Zero());
  out.valid.assign(state.grid.size(), 0);
  for (int p = 0; p < state.grid.size(); ++p) {
    if (!depth.Valid(p)) continue;
    out.points[p] = UnprojectPixel(state.grid.Pixel(p), depth.depth[p], cam,
                                   state.alpha);
    out.valid[p] = 1;
  }
  return out;
}

std::vector<std::pair<int, int>> AllOrderedPairs(int num_cameras) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < num_cameras; ++i) {
    for (int j = 0; j < num_cameras; ++j) {
      if (i != j) e.emplace_back(i, j);
    }
  }
  return e;
}

}  // namespace hsfm
