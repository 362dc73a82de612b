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

// Reference implementations shared by the unit tests and the acceptance run.
// They deliberately avoid the library's alignment and rotation helpers.

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <vector>

namespace hsfm::oracle {

struct Sim3 {
  double s = 1.0;
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();

  Eigen::Matrix3Xd Apply(const Eigen::Matrix3Xd& x) const {
    return ((s * R) * x).colwise() + t;
  }
};

// Horn's closed-form absolute orientation (unit quaternions).
inline Sim3 Horn(const Eigen::Matrix3Xd& src, const Eigen::Matrix3Xd& dst, bool with_scale) {
  const Eigen::Vector3d mx = src.rowwise().mean();
  const Eigen::Vector3d my = dst.rowwise().mean();
  const Eigen::Matrix3Xd x = src.colwise() - mx;
  const Eigen::Matrix3Xd y = dst.colwise() - my;
  const Eigen::Matrix3d S = x * y.transpose();
  const double sxx = S(0, 0), sxy = S(0, 1), sxz = S(0, 2);
  const double syx = S(1, 0), syy = S(1, 1), syz = S(1, 2);
  const double szx = S(2, 0), szy = S(2, 1), szz = S(2, 2);
  Eigen::Matrix4d N;
  N << sxx + syy + szz, syz - szy, szx - sxz, sxy - syx,
       syz - szy, sxx - syy - szz, sxy + syx, szx + sxz,
       szx - sxz, sxy + syx, -sxx + syy - szz, syz + szy,
       sxy - syx, szx + sxz, syz + szy, -sxx - syy + szz;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(N);
  const Eigen::Vector4d q = eig.eigenvectors().col(3);
  Sim3 out;
  out.R = Eigen::Quaterniond(q(0), q(1), q(2), q(3)).normalized().toRotationMatrix();
  if (with_scale) {
    out.s = (y.array() * (out.R * x).array()).sum() / x.squaredNorm();
  }
  out.t = my - out.s * out.R * mx;
  return out;
}

inline double MeanDistance(const Eigen::Matrix3Xd& a, const Eigen::Matrix3Xd& b) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < a.cols(); ++i) {
    const Eigen::Vector3d d = a.col(i) - b.col(i);
    sum += std::sqrt(d.x() * d.x() + d.y() * d.y() + d.z() * d.z());
  }
  return a.cols() ? sum / static_cast<double>(a.cols()) : 0.0;
}

inline double QuaternionAngleDeg(const Eigen::Matrix3d& r) {
  const Eigen::Quaterniond q(r);
  const double v = q.vec().norm();
  return 2.0 * std::atan2(v, std::abs(q.w())) * 180.0 / M_PI;
}

struct Metrics {
  double w = 0, ga = 0, pa = 0, te = 0, s_te = 0, ae = 0;
  double rra10 = 0, rra15 = 0, cca10 = 0, cca15 = 0, s_cca10 = 0, s_cca15 = 0;
};

inline Eigen::Matrix3Xd Stack(const std::vector<Eigen::Matrix3Xd>& parts) {
  Eigen::Index n = 0;
  for (const auto& p : parts) n += p.cols();
  Eigen::Matrix3Xd out(3, n);
  Eigen::Index k = 0;
  for (const auto& p : parts) {
    for (Eigen::Index i = 0; i < p.cols(); ++i) out.col(k++) = p.col(i);
  }
  return out;
}

// Brute force over every metric. Rotations map world to camera.
inline Metrics Evaluate(const std::vector<Eigen::Matrix3Xd>& pred_joints,
                        const std::vector<Eigen::Matrix3Xd>& gt_joints,
                        const std::vector<Eigen::Matrix3d>& pred_rot,
                        const Eigen::Matrix3Xd& pred_centers,
                        const std::vector<Eigen::Matrix3d>& gt_rot,
                        const Eigen::Matrix3Xd& gt_centers) {
  Metrics m;
  const Sim3 rigid = Horn(pred_centers, gt_centers, false);
  const Sim3 sim = Horn(pred_centers, gt_centers, true);
  const Eigen::Matrix3Xd pj = Stack(pred_joints);
  const Eigen::Matrix3Xd gj = Stack(gt_joints);
  m.w = MeanDistance(rigid.Apply(pj), gj);
  m.ga = MeanDistance(Horn(pj, gj, true).Apply(pj), gj);
  for (std::size_t h = 0; h < pred_joints.size(); ++h) {
    m.pa += MeanDistance(Horn(pred_joints[h], gt_joints[h], true).Apply(pred_joints[h]),
                         gt_joints[h]);
  }
  m.pa /= static_cast<double>(pred_joints.size());

  const int n = static_cast<int>(gt_rot.size());
  double scale = 0.0;
  const Eigen::Vector3d centroid = gt_centers.rowwise().mean();
  for (int c = 0; c < n; ++c) scale = std::max(scale, (gt_centers.col(c) - centroid).norm());
  const Eigen::Matrix3Xd rc = rigid.Apply(pred_centers);
  const Eigen::Matrix3Xd sc = sim.Apply(pred_centers);
  for (int c = 0; c < n; ++c) {
    const double e = (rc.col(c) - gt_centers.col(c)).norm();
    const double es = (sc.col(c) - gt_centers.col(c)).norm();
    m.te += e / n;
    m.s_te += es / n;
    m.cca10 += (e <= 0.10 * scale) / static_cast<double>(n);
    m.cca15 += (e <= 0.15 * scale) / static_cast<double>(n);
    m.s_cca10 += (es <= 0.10 * scale) / static_cast<double>(n);
    m.s_cca15 += (es <= 0.15 * scale) / static_cast<double>(n);
  }
  int pairs = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j <= i) continue;
      const Eigen::Matrix3d rel_p = pred_rot[i] * pred_rot[j].transpose();
      const Eigen::Matrix3d rel_g = gt_rot[i] * gt_rot[j].transpose();
      const double a = QuaternionAngleDeg(rel_g.transpose() * rel_p);
      m.ae += a;
      m.rra10 += a <= 10.0;
      m.rra15 += a <= 15.0;
      ++pairs;
    }
  }
  m.ae /= pairs;
  m.rra10 /= pairs;
  m.rra15 /= pairs;
  return m;
}

}  // namespace hsfm::oracle
