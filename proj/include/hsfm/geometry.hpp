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
#include <Eigen/Geometry>

#include <optional>

#include "hsfm/errors.hpp"

namespace hsfm {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Points3 = Eigen::Matrix3Xd;

/// Points whose camera-frame depth is at or below this are treated as behind
/// the camera.
inline constexpr double kDepthEpsilon = 1e-6;

Mat3 Skew(const Vec3& v);

/// Rodrigues' formula. Series expansion near zero.
Mat3 ExpSO3(const Vec3& omega);

/// Inverse of ExpSO3 on angles in [0, pi].
Vec3 LogSO3(const Mat3& rotation);

/// Nearest rotation matrix (via quaternion normalization for near-orthonormal
/// input).
Mat3 Orthonormalize(const Mat3& m);

/// Rotation in SO(3) stored as a 3x3 matrix. Optimizers update it through
/// axis-angle increments applied on the left: R <- Exp(delta) * R.
class Rotation3 {
 public:
  Rotation3() : matrix_(Mat3::Identity()) {}
  /// Matrices already orthonormal to 1e-12 are stored bit-exactly; anything
  /// else is projected onto SO(3).
  explicit Rotation3(const Mat3& matrix);

  static Rotation3 Identity() { return Rotation3(); }
  static Rotation3 FromAxisAngle(const Vec3& omega) {
    return Rotation3(ExpSO3(omega));
  }

  const Mat3& matrix() const { return matrix_; }
  Vec3 Log() const { return LogSO3(matrix_); }
  double AngleRadians() const { return Log().norm(); }

  /// Left-composes the increment and projects back onto SO(3).
  void Retract(const Vec3& delta) {
    matrix_ = Orthonormalize(ExpSO3(delta) * matrix_);
  }

  Rotation3 Inverse() const {
    Rotation3 r;
    r.matrix_ = matrix_.transpose();
    return r;
  }

  Rotation3 operator*(const Rotation3& other) const {
    Rotation3 r;
    r.matrix_ = Orthonormalize(matrix_ * other.matrix_);
    return r;
  }
  Vec3 operator*(const Vec3& v) const { return matrix_ * v; }

 private:
  Mat3 matrix_;
};

struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  /// Principal point at the image center.
  static Intrinsics FromImageSize(int width, int height, double focal);

  Mat3 K() const;
  Mat3 KInverse() const;
  /// K^-1 (u, v, 1).
  Vec3 Ray(const Vec2& pixel) const {
    return {(pixel.x() - cx) / fx, (pixel.y() - cy) / fy, 1.0};
  }
};

/// Pinhole camera. `rotation` maps world to camera; `translation` is expressed
/// in the pre-scale units of the data-driven reconstruction, so a world point
/// x lands at R x + alpha t in the camera frame.
struct CameraModel {
  int id = 0;
  Intrinsics intrinsics;
  Rotation3 rotation;
  Vec3 translation = Vec3::Zero();

  /// Camera center in the metric world frame: -R^T (alpha t).
  Vec3 Center(double alpha) const {
    return -(rotation.matrix().transpose() * (alpha * translation));
  }
};

/// x -> s R x + t. The rigid case is s = 1.
struct SimilarityTransform {
  double scale = 1.0;
  Rotation3 rotation;
  Vec3 translation = Vec3::Zero();

  Vec3 Apply(const Vec3& x) const {
    return scale * (rotation.matrix() * x) + translation;
  }
  Points3 Apply(const Points3& x) const;
  SimilarityTransform Inverse() const;
};

struct Projection {
  Vec2 pixel;
  double depth = 0.0;
};

/// Projects a world point with x_2D = K (R x + alpha t). Throws
/// NonPositiveDepth when the camera-frame depth is <= kDepthEpsilon.
Projection Project(const Vec3& point_world, const CameraModel& camera,
                   double alpha);

/// Non-throwing variant for loss code; nullopt marks a masked point.
std::optional<Projection> TryProject(const Vec3& point_world,
                                     const CameraModel& camera, double alpha);

/// World point of pixel (i, j) at pre-scale depth D:
/// alpha (R^T [K^-1 D (i, j, 1)] - R^T t).
Vec3 UnprojectPixel(const Vec2& pixel, double depth, const CameraModel& camera,
                    double alpha);

/// Least-squares similarity (or rigid, when with_scale is false) mapping
/// source onto target. Throws DegenerateConfiguration when the centered
/// cross-covariance has rank < 2 or the sets are mismatched.
SimilarityTransform UmeyamaAlign(const Points3& source, const Points3& target,
                                 bool with_scale);

struct AlignmentResult {
  SimilarityTransform transform;
  bool degenerate = false;
};

/// Same estimator, but returns a best-effort transform and a flag instead of
/// throwing on rank-deficient input. Used by the evaluation metrics.
AlignmentResult UmeyamaAlignBestEffort(const Points3& source,
                                       const Points3& target, bool with_scale);

/// Angle of Ra Rb^T in degrees, in [0, 180].
double RelativeRotationAngleDeg(const Rotation3& a, const Rotation3& b);
double RotationAngleDeg(const Mat3& rotation);

}  // namespace hsfm
