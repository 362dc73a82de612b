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
#include <nlohmann/json.hpp>

#include <string>
#include <vector>

#include "hsfm/geometry.hpp"

namespace hsfm {

/// Articulated skeleton. Each non-root joint k ends the bone from parents[k];
/// its rest direction and length are expressed in the parent's frame. Shape
/// coefficients act on log bone lengths through `shape_basis`, one row per
/// bone in increasing child-joint order.
struct SkeletonTemplate {
  std::vector<std::string> joint_names;
  std::vector<int> parents;            // -1 marks the root
  std::vector<Vec3> rest_directions;   // unit, ignored for the root
  std::vector<double> bone_lengths;    // meters, ignored for the root
  Eigen::MatrixXd shape_basis;         // (J-1) x B

  int num_joints() const { return static_cast<int>(parents.size()); }
  int num_betas() const { return static_cast<int>(shape_basis.cols()); }
  int root() const { return root_; }
  /// Parents precede children.
  const std::vector<int>& order() const { return order_; }
  /// Row of shape_basis for the bone ending at `joint`, -1 for the root.
  int bone_row(int joint) const { return bone_row_[joint]; }

  /// Checks the tree and unit directions and caches traversal order.
  /// Throws ConfigError.
  void Finalize();

  /// 17-joint pelvis-rooted skeleton (Human3.6M joint layout) with a
  /// fixed pseudo-random orthonormal 16x10 shape basis scaled by 0.1.
  static SkeletonTemplate Default();

 private:
  int root_ = -1;
  std::vector<int> order_;
  std::vector<int> bone_row_;
};

nlohmann::json TemplateToJson(const SkeletonTemplate& tmpl);
/// Throws ParseError on malformed input.
SkeletonTemplate TemplateFromJson(const nlohmann::json& j);

/// {phi, theta, beta, gamma}: world orientation, per-joint rotations, shape
/// coefficients and root translation in meters.
struct HumanParams {
  int id = 0;
  Rotation3 phi;
  std::vector<Rotation3> theta;
  Eigen::VectorXd beta;
  Vec3 gamma = Vec3::Zero();

  static HumanParams Rest(const SkeletonTemplate& tmpl, int id = 0);
};

/// Joint positions plus the cached frames needed for backpropagation.
struct KinematicState {
  Points3 joints;              // 3 x J, world frame
  std::vector<Mat3> frames;    // phi * theta_root * ... * theta_k
  Eigen::VectorXd lengths;     // per joint, 0 for the root
};

KinematicState ForwardKinematicsWithFrames(const HumanParams& params,
                                           const SkeletonTemplate& tmpl);

inline Points3 ForwardKinematics(const HumanParams& params,
                                 const SkeletonTemplate& tmpl) {
  return ForwardKinematicsWithFrames(params, tmpl).joints;
}

/// Gradient with respect to the human parameters. Rotation entries are
/// tangent-space gradients for left increments R <- Exp(delta) R.
struct HumanGradient {
  Vec3 phi = Vec3::Zero();
  std::vector<Vec3> theta;
  Eigen::VectorXd beta;
  Vec3 gamma = Vec3::Zero();

  void SetZero(const SkeletonTemplate& tmpl);
  HumanGradient& operator+=(const HumanGradient& other);
};

/// Vector-Jacobian product: pulls dL/d(joints) (3 x J) back to the
/// parameters.
HumanGradient BackpropJoints(const HumanParams& params,
                             const SkeletonTemplate& tmpl,
                             const KinematicState& state,
                             const Points3& joint_grads);

/// Mean over the template's bones of |child - parent|.
double MeanBoneLength3d(const Points3& joints, const SkeletonTemplate& tmpl);

}  // namespace hsfm
