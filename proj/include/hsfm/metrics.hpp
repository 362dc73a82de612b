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

#include <optional>
#include <string>
#include <vector>

#include "hsfm/body.hpp"
#include "hsfm/observations.hpp"

namespace hsfm {

struct CameraMetrics {
  double te = 0.0;
  std::optional<double> s_te;   // undefined below 3 cameras
  double ae = 0.0;
  double rra10 = 0.0;
  double rra15 = 0.0;
  double cca10 = 0.0;
  double cca15 = 0.0;
  std::optional<double> s_cca10;
  std::optional<double> s_cca15;
  double scene_scale = 0.0;
  /// Size of the predicted camera layout relative to ground truth: the
  /// inverse of the similarity scale aligning predicted centers onto it.
  double scale_ratio = 1.0;
  bool degenerate = false;      // fewer than 3 cameras
  std::vector<double> center_error;        // after rigid alignment
  std::vector<double> center_error_sim;    // after similarity alignment
};

struct EvalReport {
  double w_mpjpe = 0.0;
  std::optional<double> ga_mpjpe;   // undefined for a single human
  double pa_mpjpe = 0.0;
  CameraMetrics cameras;
  bool w_alignment_degenerate = false;
  bool monotone_chain = true;       // pa <= ga <= w and s_te <= te
  std::vector<double> per_human_w;
  std::vector<double> per_human_pa;
  double alpha = 0.0;
  double alpha_gt = 0.0;
};

/// Rigid alignment from predicted to ground-truth camera centers, applied to
/// every predicted joint. With `pool_joints` the mean runs over all joints of
/// all humans; otherwise per-human means are averaged.
double WMpjpe(const std::vector<Points3>& pred_joints,
              const std::vector<Points3>& gt_joints, const Points3& pred_centers,
              const Points3& gt_centers, bool pool_joints = true,
              bool* degenerate = nullptr, std::vector<double>* per_human = nullptr);

/// One similarity over the union of all humans' joints. nullopt for H < 2.
std::optional<double> GaMpjpe(const std::vector<Points3>& pred_joints,
                              const std::vector<Points3>& gt_joints);

/// Per-human similarity alignment, averaged over humans.
double PaMpjpe(const std::vector<Points3>& pred_joints,
               const std::vector<Points3>& gt_joints,
               std::vector<double>* per_human = nullptr);

/// Camera centers are metric; rotations map world to camera.
CameraMetrics EvaluateCameras(const std::vector<Mat3>& pred_rotations,
                              const Points3& pred_centers,
                              const std::vector<Mat3>& gt_rotations,
                              const Points3& gt_centers);

/// Full report; cameras and humans are matched by id.
EvalReport Evaluate(const WorldState& pred, const WorldState& gt,
                    const SkeletonTemplate& tmpl, bool pool_joints = true);

nlohmann::json EvalReportToJson(const EvalReport& report);
std::string EvalCsvHeader();
std::string EvalCsvRow(const EvalReport& report);

}  // namespace hsfm
