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

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <vector>

#include "hsfm/body.hpp"
#include "hsfm/geometry.hpp"

namespace hsfm {

/// Per-pixel confidences below this carry zero weight.
inline constexpr double kMinPointmapConfidence = 1e-3;

/// Sampling grid shared by depth maps and pointmaps. Grid cell (i, j) sits
/// at image pixel ((i + 0.5) * stride, (j + 0.5) * stride); i indexes
/// columns, j rows; storage is row-major.
struct PixelGrid {
  int stride = 16;
  int width = 0;
  int height = 0;

  static PixelGrid ForImage(int image_width, int image_height, int stride);
  int size() const { return width * height; }
  int Index(int i, int j) const { return j * width + i; }
  Vec2 Pixel(int index) const {
    const int i = index % width;
    const int j = index / width;
    return {(i + 0.5) * stride, (j + 0.5) * stride};
  }
};

/// 2D joints for one (camera, human) pair.
struct KeypointObservation {
  int camera_id = 0;
  int human_id = 0;
  Eigen::Matrix2Xd joints;        // 2 x J pixels
  Eigen::VectorXd confidence;     // J, clamped to [0, 1]
  double bbox_height = 1.0;       // pixels, > 0

  double TotalConfidence() const { return confidence.sum(); }
};

/// Pre-scale depth per grid cell. NaN marks an invalid cell.
struct DepthMap {
  int camera_id = 0;
  std::vector<double> depth;

  bool Valid(int index) const {
    const double d = depth[index];
    return d > 0.0 && std::isfinite(d);
  }
};

/// Output of one pairwise network run on cameras (i, j) expressed in camera
/// j's frame: camera i's content (X^{i,j}) and camera j's own content
/// (X^{j,j}). Both share the pair pose and scale that bring the pair frame
/// into the world: world = sigma * (R x + t).
struct PairwiseObservation {
  int cam_i = 0;
  int cam_j = 1;
  std::vector<Vec3> points_i;       // X^{i,j}, grid of camera i
  std::vector<double> confidence_i;
  std::vector<Vec3> points_j;       // X^{j,j}, grid of camera j
  std::vector<double> confidence_j;

  Rotation3 rotation;
  Vec3 translation = Vec3::Zero();
  double sigma = 1.0;
};

/// Per-view human estimate from a single-image regressor, in that camera's
/// frame (gamma in meters).
struct HumanEstimate {
  int human_id = 0;
  int camera_id = 0;
  HumanParams params;
};

/// Everything the optimizer mutates. Per-view world pointmaps are always
/// derived from (depths, cameras, alpha), never stored.
struct WorldState {
  double alpha = 1.0;
  PixelGrid grid;
  std::vector<CameraModel> cameras;
  std::vector<HumanParams> humans;
  std::vector<DepthMap> depths;             // parallel to cameras
  std::vector<PairwiseObservation> pairs;

  /// Throws UnknownCamera.
  int CameraIndex(int camera_id) const;
  int HumanIndex(int human_id) const;
};

/// World-frame pointmap of one camera; `valid` masks cells without depth.
struct Pointmap {
  std::vector<Vec3> points;
  std::vector<std::uint8_t> valid;
};

/// Throws UnknownCamera.
Pointmap WorldPointmap(const WorldState& state, int camera_id);

/// All ordered camera pairs (i != j).
std::vector<std::pair<int, int>> AllOrderedPairs(int num_cameras);

}  // namespace hsfm
