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

#include <span>
#include <vector>

#include "hsfm/body.hpp"
#include "hsfm/observations.hpp"

namespace hsfm {

/// Which parameter classes receive gradient. Everything else is held fixed.
struct ActiveSet {
  bool alpha = false;
  bool gamma = false;
  bool beta = false;
  bool phi = false;
  bool theta = false;
  bool cam_rotation = false;
  bool cam_translation = false;
  bool focal = false;
  bool depth = false;
  bool pair_pose = false;
  bool pair_scale = false;

  /// {alpha, gamma, beta}
  static ActiveSet StageOne();
  /// {gamma, beta, phi, theta, R, t, K, D} plus pair pose and scale.
  static ActiveSet StageTwo(bool include_alpha);
  static ActiveSet All();
};

struct LossOptions {
  double lambda = 1.0;
  /// Human-loss gradients stop at the humans: cameras, alpha and the scene
  /// only see the places term.
  bool detach_human_grads = false;
  /// Skip the places term entirely (value reported as 0).
  bool skip_places = false;
  ActiveSet active = ActiveSet::All();
};

/// Total-loss gradient in the optimizer's coordinates: log alpha, log focal
/// (fx and fy scale together), log depth, log sigma; rotations as left
/// tangent increments; translations in their stored units.
struct StateGradient {
  struct Camera {
    Vec3 rotation = Vec3::Zero();
    Vec3 translation = Vec3::Zero();
    double log_focal = 0.0;
  };
  struct Pair {
    Vec3 rotation = Vec3::Zero();
    Vec3 translation = Vec3::Zero();
    double log_sigma = 0.0;
  };

  double log_alpha = 0.0;
  std::vector<HumanGradient> humans;
  std::vector<Camera> cameras;
  std::vector<Eigen::VectorXd> log_depth;
  std::vector<Pair> pairs;

  void Reset(const WorldState& state, const SkeletonTemplate& tmpl);
  bool AllFinite() const;
  double SquaredNorm() const;
};

/// Loss terms and their breakdown. total = humans + lambda * places.
struct LossBreakdown {
  double humans = 0.0;
  double places = 0.0;
  double lambda = 0.0;
  double total = 0.0;
  Eigen::MatrixXd reprojection;         // C x H, E_J (0 where unobserved)
  Eigen::VectorXd shape;                // per human |beta|
  std::vector<double> pair_residuals;   // per pair, confidence-weighted mean
  double confidence_mass = 0.0;         // sum of Q over contributing pixels
};

enum class Execution { kSerial, kParallel };

/// Bundles the fixed inputs of the objective. Keypoints are indexed by
/// (camera, human) once at construction.
class LossFunction {
 public:
  LossFunction(const SkeletonTemplate& tmpl,
               std::span<const KeypointObservation> keypoints, int num_cameras,
               int num_humans);

  /// Evaluates the loss and, when `grad` is non-null, its gradient over the
  /// active set (inactive entries are zero). The parallel path reduces in a
  /// fixed order, so its result does not depend on the thread count.
  LossBreakdown Evaluate(const WorldState& state, const LossOptions& options,
                         StateGradient* grad,
                         Execution exec = Execution::kParallel) const;

  const SkeletonTemplate& skeleton() const { return tmpl_; }
  /// Observation index for (camera, human), or -1.
  int ObservationIndex(int camera, int human) const {
    return table_[camera * num_humans_ + human];
  }
  const KeypointObservation& observation(int index) const { return keypoints_[index]; }
  int num_cameras() const { return num_cameras_; }
  int num_humans() const { return num_humans_; }

 private:
  SkeletonTemplate tmpl_;
  std::vector<KeypointObservation> keypoints_;
  std::vector<int> table_;
  int num_cameras_;
  int num_humans_;
};

namespace detail {

// Per-(camera, human) reprojection term. Writes dE/d(world joints) (3 x J)
// and the camera-side gradient; returns E_J.
struct ReprojectionTerm {
  double value = 0.0;
  Points3 joint_grads;
  StateGradient::Camera camera;
  double log_alpha = 0.0;
};
ReprojectionTerm EvaluateReprojection(const KeypointObservation& obs,
                                      const Points3& joints,
                                      const CameraModel& cam, double alpha,
                                      double weight, bool want_grad);

// One pointmap pixel against its pair prediction; accumulates gradient when
// the residual is non-zero.
struct PixelGradient {
  double log_depth = 0.0;
  double log_alpha = 0.0;
  StateGradient::Camera camera;
  StateGradient::Pair pair;
};
double EvaluatePlacesPixel(const Vec2& pixel, double depth,
                           const CameraModel& cam, double alpha,
                           const PairwiseObservation& pair, const Vec3& x,
                           double weight, PixelGradient* grad);

LossBreakdown EvaluateSerial(const LossFunction& f, const WorldState& state,
                             const LossOptions& options, StateGradient* grad);
LossBreakdown EvaluateParallel(const LossFunction& f, const WorldState& state,
                               const LossOptions& options, StateGradient* grad);
void MaskInactive(const ActiveSet& active, StateGradient* grad);

}  // namespace detail

}  // namespace hsfm
