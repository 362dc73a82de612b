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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hsfm/body.hpp"
#include "hsfm/observations.hpp"
#include "hsfm/scene_io.hpp"

namespace hsfm {

enum class AlphaInit { kHuman, kOne, kFixed };

struct InitOptions {
  /// -1 picks the camera with the highest summed keypoint confidence among
  /// those observing the anchor.
  int reference_camera = -1;
  AlphaInit alpha_init = AlphaInit::kHuman;
  double alpha_fixed = 1.0;
  /// A bone counts toward the similar-triangle ratio only if both endpoints
  /// exceed this confidence and its 2D length exceeds min_bone_pixels.
  double bone_confidence_gate = 0.3;
  double min_bone_pixels = 1.0;
};

struct InitReport {
  int anchor_human = -1;
  int reference_camera = -1;
  std::vector<Rotation3> rotations;             // recovered R-hat, per camera
  std::vector<std::optional<Vec3>> positions;   // recovered T-hat, per camera
  std::vector<std::optional<Vec3>> anchor_translations;  // gamma-tilde per view
  std::vector<double> rotation_residual_deg;    // R-hat vs data-driven
  double alpha_hat = 1.0;   // least-squares solution (or fallback)
  double alpha = 1.0;       // value written into the state
  double scale_residual = 0.0;
  bool scale_fallback = false;
  bool degenerate_configuration = false;
  std::vector<std::string> warnings;
};

/// argmax over humans of total keypoint confidence across all views; ties go
/// to the lowest id. Throws NoMultiViewHuman when nobody is seen twice.
int SelectAnchor(std::span<const KeypointObservation> keypoints, int num_humans);

/// R-hat^c with (R-hat^c)^T = (R^{c1})^T phi^{c1} (phi^c)^T.
Rotation3 RecoverRotation(const Rotation3& anchor_in_reference,
                          const Rotation3& anchor_in_camera,
                          const Rotation3& reference_rotation);

/// Vector form; entries without an anchor orientation throw MissingAnchorView.
std::vector<Rotation3> RecoverRotations(
    std::span<const std::optional<Rotation3>> anchor_orientations,
    int reference_camera, const Rotation3& reference_rotation);

/// Camera-frame root translation from the similar-triangle depth
/// z = f * L3D / L2D, with x, y back-projected at that depth. `joints_cam`
/// are root-relative joints in camera orientation. Throws
/// InsufficientKeypoints when no bone passes the gates.
Vec3 PlaceHuman(const KeypointObservation& keypoints, const Points3& joints_cam,
                const Intrinsics& intrinsics, const SkeletonTemplate& tmpl,
                double confidence_gate = 0.3, double min_bone_pixels = 1.0);

/// T-hat^c = gamma^{c1} - (R-hat^c)^T gamma^c. Throws MissingAnchorView when a
/// camera lacks gamma^c.
std::vector<Vec3> RecoverTranslations(std::span<const std::optional<Vec3>> gammas,
                                      std::span<const Rotation3> rotations,
                                      int reference_camera);

struct ScaleSolution {
  double alpha = 1.0;
  double residual = 0.0;  // RMS of |T-hat - alpha T-tilde|
  bool fallback = false;
};

/// alpha = sum <T-hat, T-tilde> / sum |T-tilde|^2 over the given cameras
/// (the reference camera excluded by the caller). Falls back to the ratio of
/// summed norms if that is non-positive or ill-conditioned; throws
/// DegenerateScale if every T-tilde is zero.
ScaleSolution SolveScale(std::span<const Vec3> human_centric,
                         std::span<const Vec3> data_driven);

struct InitResult {
  WorldState state;
  InitReport report;
};

/// Anchor, rotations, translations and scale, then human placement and pair
/// pose warm start. Data-driven cameras (re-anchored so the reference camera
/// is the identity) remain the optimization starting point.
InitResult InitializeWorld(const Scene& scene, const InitOptions& options = {});

/// Fits every pair's pose and scale to the current world pointmaps.
void WarmStartPairs(WorldState* state);

/// True when every observed, confident joint has positive depth in its camera.
bool HumansInFrontOfCameras(const WorldState& state,
                            std::span<const KeypointObservation> keypoints,
                            const SkeletonTemplate& tmpl);

nlohmann::json InitReportToJson(const InitReport& report);

}  // namespace hsfm
