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

#include "hsfm/losses.hpp"

namespace hsfm {

enum class GradientMode { kAnalytic, kFiniteDifference };

struct OptimConfig {
  double lambda = 1.0;
  double lr = 0.015;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  /// Steps per stage: max(min_steps, ceil(steps_per_meter * scene_scale)),
  /// unless fixed_steps > 0.
  int min_steps = 500;
  double steps_per_meter = 100.0;
  int fixed_steps = 0;
  bool run_stage1 = true;
  bool run_stage2 = true;
  bool stage2_alpha = false;
  bool optimize_focal = true;
  bool no_places = false;
  bool detach_human_grads = false;
  GradientMode gradient_mode = GradientMode::kAnalytic;
  double finite_difference_step = 1e-6;
  std::uint64_t seed = 0;
  /// 0 keeps the OpenMP default.
  int num_threads = 0;
};

nlohmann::json OptimConfigToJson(const OptimConfig& config);
/// Missing keys keep their defaults; unknown keys and invalid values throw
/// ConfigError.
OptimConfig OptimConfigFromJson(const nlohmann::json& j);

/// Furthest metric camera center from the centroid of all centers.
double CameraSceneScale(const WorldState& state);
int StepBudget(const WorldState& state, const OptimConfig& config);

/// Flat tangent-space coordinates of a WorldState, in this order: log alpha;
/// per human gamma, beta, phi, theta; per camera rotation, translation, log
/// focal; per camera log depth; per pair rotation, translation, log sigma.
/// Camera translations are divided by a global pre-scale length and pair
/// translations by the pair's mean point norm, so one learning rate serves
/// every scene scale.
class ParameterLayout {
 public:
  ParameterLayout(const WorldState& reference, const SkeletonTemplate& tmpl);

  int size() const { return size_; }
  double camera_translation_scale() const { return camera_scale_; }
  double pair_translation_scale(int pair) const { return pair_scale_[pair]; }

  /// Gradient in the layout's coordinates.
  Eigen::VectorXd Flatten(const StateGradient& grad) const;
  /// Moves the state by `delta`. Zero entries leave the state bit-identical.
  void Apply(const Eigen::VectorXd& delta, WorldState* state) const;

 private:
  int num_humans_ = 0;
  int num_joints_ = 0;
  int num_betas_ = 0;
  int num_cameras_ = 0;
  int num_pixels_ = 0;
  int num_pairs_ = 0;
  int size_ = 0;
  double camera_scale_ = 1.0;
  std::vector<double> pair_scale_;
};

/// Central differences along every layout coordinate. Slow; meant for small
/// scenes and verification.
Eigen::VectorXd FiniteDifferenceGradient(const LossFunction& loss,
                                         const WorldState& state,
                                         const LossOptions& options,
                                         const ParameterLayout& layout,
                                         double step);

/// Rescales (alpha, camera translations, depths) by the median ratio of the
/// state's depths to the reference's, so depths return to the reference's
/// units. Every loss and metric is unchanged. Returns the factor applied to
/// alpha.
double FixScaleGauge(const WorldState& reference, WorldState* state);

struct TraceRow {
  int step = 0;
  int stage = 0;
  double humans = 0.0;
  double places = 0.0;
  double total = 0.0;
  double lr = 0.0;
};

struct OptimResult {
  WorldState state;
  std::vector<TraceRow> trace;
  int stage1_steps = 0;
  int stage2_steps = 0;
  int retries = 0;
};

/// Stage 1: {alpha, gamma, beta} with lambda = 0. Stage 2: every parameter
/// class (alpha only with stage2_alpha) under humans + lambda * places,
/// followed by FixScaleGauge against `initial`.
/// Adam with a linear decay to zero inside each stage. Throws
/// NonFiniteGradient or Diverged once the single lr-halving retry is spent.
OptimResult RunHsfm(const WorldState& initial, const LossFunction& loss,
                    const OptimConfig& config);

/// step,L_humans,L_places,total,lr with 17 significant digits.
std::string TraceToCsv(const std::vector<TraceRow>& trace);
void WriteTraceCsv(const std::filesystem::path& path,
                   const std::vector<TraceRow>& trace);

}  // namespace hsfm
