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

#include "hsfm/geometry.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hsfm {

Mat3 Skew(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v.z(), v.y(),  //
      v.z(), 0.0, -v.x(),   //
      -v.y(), v.x(), 0.0;
  return s;
}

Mat3 ExpSO3(const Vec3& omega) {
  const double theta2 = omega.squaredNorm();
  const Mat3 w = Skew(omega);
  double a;
  double b;
  if (theta2 < 1e-12) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
  } else {
    const double theta = std::sqrt(theta2);
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  return Mat3::Identity() + a * w + b * w * w;
}

Vec3 LogSO3(const Mat3& rotation) {
  const double cos_theta =
      std::clamp((rotation.trace() - 1.0) * 0.5, -1.0, 1.0);
  const double theta = std::acos(cos_theta);
  const Vec3 axis_sin(rotation(2, 1) - rotation(1, 2),
                      rotation(0, 2) - rotation(2, 0),
                      rotation(1, 0) - rotation(0, 1));
  if (theta < 1e-6) {
    // sin(theta)/theta ~ 1 - theta^2/6
    return 0.5 * axis_sin * (1.0 + theta * theta / 6.0);
  }
  if (std::numbers::pi - theta < 1e-4) {
    // Near pi the antisymmetric part vanishes; read the axis off R + I.
    const Mat3 b = 0.5 * (rotation + Mat3::Identity());
    int k = 0;
    b.diagonal().maxCoeff(&k);
    Vec3 axis = b.col(k) / std::sqrt(std::max(b(k, k), 1e-300));
    axis.normalize();
    if (axis.dot(axis_sin) < 0.0) axis = -axis;
    return theta * axis;
  }
  return theta / (2.0 * std::sin(theta)) * axis_sin;
}

Mat3 Orthonormalize(const Mat3& m) {
  Eigen::Quaterniond q(m);
  q.normalize();
  return q.toRotationMatrix();
}

Rotation3::Rotation3(const Mat3& matrix) {
  const double drift =
      (matrix.transpose() * matrix - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (drift < 1e-12 && matrix.determinant() > 0.0) {
    matrix_ = matrix;
  } else {
    matrix_ = Orthonormalize(matrix);
  }
}

Intrinsics Intrinsics::FromImageSize(int width, int height, double focal) {
  Intrinsics k;
  k.fx = focal;
  k.fy = focal;
  k.cx = 0.5 * width;
  k.cy = 0.5 * height;
  k.width = width;
  k.height = height;
  return k;
}

Mat3 Intrinsics::K() const {
  Mat3 k;
  k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return k;
}

Mat3 Intrinsics::KInverse() const {
  Mat3 k;
  k << 1.0 / fx, 0.0, -cx / fx, 0.0, 1.0 / fy, -cy / fy, 0.0, 0.0, 1.0;
  return k;
}

Points3 SimilarityTransform::Apply(const Points3& x) const {
  Points3 y = scale * (rotation.matrix() * x);
  y.colwise() += translation;
  return y;
}

SimilarityTransform SimilarityTransform::Inverse() const {
  SimilarityTransform inv;
  inv.scale = 1.0 / scale;
  inv.rotation = rotation.Inverse();
  inv.translation = -(inv.scale * (inv.rotation.matrix() * translation));
  return inv;
}

std::optional<Projection> TryProject(const Vec3& point_world,
                                     const CameraModel& camera, double alpha) {
  const Vec3 pc =
      camera.rotation.matrix() * point_world + alpha * camera.translation;
  if (!(pc.z() > kDepthEpsilon)) return std::nullopt;
  const Intrinsics& k = camera.intrinsics;
  Projection p;
  p.pixel = {k.fx * pc.x() / pc.z() + k.cx, k.fy * pc.y() / pc.z() + k.cy};
  p.depth = pc.z();
  return p;
}

Projection Project(const Vec3& point_world, const CameraModel& camera,
                   double alpha) {
  auto p = TryProject(point_world, camera, alpha);
  if (!p) throw NonPositiveDepth("point is behind camera " +
                                 std::to_string(camera.id));
  return *p;
}

Vec3 UnprojectPixel(const Vec2& pixel, double depth, const CameraModel& camera,
                    double alpha) {
  if (!(depth > 0.0)) throw NonPositiveDepth("unproject with depth <= 0");
  const Mat3& r = camera.rotation.matrix();
  return alpha * (r.transpose() * (depth * camera.intrinsics.Ray(pixel) -
                                   camera.translation));
}

namespace {

struct UmeyamaCore {
  SimilarityTransform transform;
  int rank = 0;
};

UmeyamaCore Umeyama(const Points3& source, const Points3& target,
                    bool with_scale) {
  const Eigen::Index n = source.cols();
  const Vec3 mu_s = source.rowwise().mean();
  const Vec3 mu_t = target.rowwise().mean();
  const Points3 src = source.colwise() - mu_s;
  const Points3 tgt = target.colwise() - mu_t;
  const Mat3 cov = tgt * src.transpose() / static_cast<double>(n);

  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sv = svd.singularValues();
  const double tol = 1e-12 * std::max(1.0, sv(0));
  UmeyamaCore out;
  out.rank = static_cast<int>((sv.array() > tol).count());

  Vec3 d = Vec3::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) {
    d(2) = -1.0;
  }
  const Mat3 r = svd.matrixU() * d.asDiagonal() * svd.matrixV().transpose();

  double scale = 1.0;
  if (with_scale) {
    const double var_s = src.squaredNorm() / static_cast<double>(n);
    if (var_s > 0.0) scale = sv.dot(d) / var_s;
  }
  out.transform.scale = scale;
  out.transform.rotation = Rotation3(r);
  out.transform.translation = mu_t - scale * (out.transform.rotation.matrix() * mu_s);
  return out;
}

void CheckSizes(const Points3& source, const Points3& target) {
  if (source.cols() != target.cols() || source.cols() == 0) {
    throw DegenerateConfiguration("point sets must be non-empty and equal size");
  }
}

}  // namespace

SimilarityTransform UmeyamaAlign(const Points3& source, const Points3& target,
                                 bool with_scale) {
  CheckSizes(source, target);
  UmeyamaCore core = Umeyama(source, target, with_scale);
  if (core.rank < 2) {
    throw DegenerateConfiguration(
        "rank of the centered covariance is below 2 (collinear points)");
  }
  return core.transform;
}

AlignmentResult UmeyamaAlignBestEffort(const Points3& source,
                                       const Points3& target, bool with_scale) {
  CheckSizes(source, target);
  UmeyamaCore core = Umeyama(source, target, with_scale);
  return {core.transform, core.rank < 2};
}

double RotationAngleDeg(const Mat3& rotation) {
  const double c = std::clamp((rotation.trace() - 1.0) * 0.5, -1.0, 1.0);
  // acos is ill-conditioned near 0; the antisymmetric part keeps precision.
  const Vec3 s(rotation(2, 1) - rotation(1, 2), rotation(0, 2) - rotation(2, 0),
               rotation(1, 0) - rotation(0, 1));
  const double angle = std::atan2(0.5 * s.norm(), c);
  return angle * 180.0 / std::numbers::pi;
}

double RelativeRotationAngleDeg(const Rotation3& a, const Rotation3& b) {
  return RotationAngleDeg(a.matrix() * b.matrix().transpose());
}

}  // namespace hsfm
