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

#include "hsfm/losses.hpp"

#include <cmath>

namespace hsfm {

ActiveSet ActiveSet::StageOne() {
  ActiveSet a;
  a.alpha = a.gamma = a.beta = true;
  return a;
}

ActiveSet ActiveSet::StageTwo(bool include_alpha) {
  ActiveSet a = All();
  a.alpha = include_alpha;
  return a;
}

ActiveSet ActiveSet::All() {
  ActiveSet a;
  a.alpha = a.gamma = a.beta = a.phi = a.theta = true;
  a.cam_rotation = a.cam_translation = a.focal = a.depth = true;
  a.pair_pose = a.pair_scale = true;
  return a;
}

void StateGradient::Reset(const WorldState& state, const SkeletonTemplate& tmpl) {
  log_alpha = 0.0;
  humans.resize(state.humans.size());
  for (HumanGradient& h : humans) h.SetZero(tmpl);
  cameras.assign(state.cameras.size(), Camera{});
  log_depth.resize(state.cameras.size());
  for (auto& d : log_depth) d = Eigen::VectorXd::Zero(state.grid.size());
  pairs.assign(state.pairs.size(), Pair{});
}

bool StateGradient::AllFinite() const {
  if (!std::isfinite(log_alpha)) return false;
  for (const HumanGradient& h : humans) {
    if (!h.phi.allFinite() || !h.gamma.allFinite() || !h.beta.allFinite()) return false;
    for (const Vec3& t : h.theta) {
      if (!t.allFinite()) return false;
    }
  }
  for (const Camera& c : cameras) {
    if (!c.rotation.allFinite() || !c.translation.allFinite() ||
        !std::isfinite(c.log_focal)) {
      return false;
    }
  }
  for (const auto& d : log_depth) {
    if (!d.allFinite()) return false;
  }
  for (const Pair& p : pairs) {
    if (!p.rotation.allFinite() || !p.translation.allFinite() ||
        !std::isfinite(p.log_sigma)) {
      return false;
    }
  }
  return true;
}

double StateGradient::SquaredNorm() const {
  double s = log_alpha * log_alpha;
  for (const HumanGradient& h : humans) {
    s += h.phi.squaredNorm() + h.gamma.squaredNorm() + h.beta.squaredNorm();
    for (const Vec3& t : h.theta) s += t.squaredNorm();
  }
  for (const Camera& c : cameras) {
    s += c.rotation.squaredNorm() + c.translation.squaredNorm() +
         c.log_focal * c.log_focal;
  }
  for (const auto& d : log_depth) s += d.squaredNorm();
  for (const Pair& p : pairs) {
    s += p.rotation.squaredNorm() + p.translation.squaredNorm() +
         p.log_sigma * p.log_sigma;
  }
  return s;
}

LossFunction::LossFunction(const SkeletonTemplate& tmpl,
                           std::span<const KeypointObservation> keypoints,
                           int num_cameras, int num_humans)
    : tmpl_(tmpl),
      keypoints_(keypoints.begin(), keypoints.end()),
      table_(static_cast<std::size_t>(num_cameras) * num_humans, -1),
      num_cameras_(num_cameras),
      num_humans_(num_humans) {
  for (std::size_t k = 0; k < keypoints_.size(); ++k) {
    const KeypointObservation& o = keypoints_[k];
    if (o.camera_id < 0 || o.camera_id >= num_cameras || o.human_id < 0 ||
        o.human_id >= num_humans) {
      throw SchemaMismatch("keypoint observation outside the camera/human range");
    }
    if (o.joints.cols() != tmpl.num_joints()) {
      throw SchemaMismatch("keypoint joint count does not match the template");
    }
    table_[o.camera_id * num_humans + o.human_id] = static_cast<int>(k);
  }
}

LossBreakdown LossFunction::Evaluate(const WorldState& state,
                                     const LossOptions& options,
                                     StateGradient* grad, Execution exec) const {
  LossBreakdown out = exec == Execution::kSerial
                          ? detail::EvaluateSerial(*this, state, options, grad)
                          : detail::EvaluateParallel(*this, state, options, grad);
  if (grad != nullptr) detail::MaskInactive(options.active, grad);
  return out;
}

namespace detail {

ReprojectionTerm EvaluateReprojection(const KeypointObservation& obs,
                                      const Points3& joints,
                                      const CameraModel& cam, double alpha,
                                      double weight, bool want_grad) {
  const int num_joints = static_cast<int>(joints.cols());
  const Mat3& r = cam.rotation.matrix();
  const Intrinsics& k = cam.intrinsics;
  const Vec3 at = alpha * cam.translation;

  // Weighted residuals c_j (J2D_j - pi(J3D_j)); masked joints stay zero.
  Eigen::Matrix2Xd residual = Eigen::Matrix2Xd::Zero(2, num_joints);
  Points3 cam_points(3, num_joints);
  std::vector<char> used(num_joints, 0);
  for (int j = 0; j < num_joints; ++j) {
    const double c = obs.confidence(j);
    const Vec3 pc = r * joints.col(j) + at;
    cam_points.col(j) = pc;
    if (c <= 0.0 || !(pc.z() > kDepthEpsilon)) continue;
    const Vec2 proj(k.fx * pc.x() / pc.z() + k.cx, k.fy * pc.y() / pc.z() + k.cy);
    residual.col(j) = c * (obs.joints.col(j) - proj);
    used[j] = 1;
  }
  const double norm = residual.norm();

  ReprojectionTerm term;
  term.value = norm / obs.bbox_height;
  if (!want_grad) return term;
  term.joint_grads = Points3::Zero(3, num_joints);
  if (norm <= 0.0) return term;

  // dE/dr_j = r_j / (b |r|); r_j = c_j (k_j - pi_j)
  const double scale = weight / (obs.bbox_height * norm);
  Vec3 grad_cam_sum = Vec3::Zero();
  for (int j = 0; j < num_joints; ++j) {
    if (!used[j]) continue;
    const Vec3 pc = cam_points.col(j);
    const Vec2 g_pi = -scale * obs.confidence(j) * residual.col(j);
    const double inv_z = 1.0 / pc.z();
    const Vec3 g_cam(k.fx * inv_z * g_pi.x(), k.fy * inv_z * g_pi.y(),
                     -(k.fx * pc.x() * g_pi.x() + k.fy * pc.y() * g_pi.y()) *
                         inv_z * inv_z);
    term.joint_grads.col(j) = r.transpose() * g_cam;
    term.camera.rotation += (pc - at).cross(g_cam);
    grad_cam_sum += g_cam;
    term.camera.log_focal += g_pi.x() * k.fx * pc.x() * inv_z +
                             g_pi.y() * k.fy * pc.y() * inv_z;
  }
  term.camera.translation = alpha * grad_cam_sum;
  term.log_alpha = grad_cam_sum.dot(at);
  return term;
}

// Residuals at rounding level take the zero subgradient.
constexpr double kResidualFloor = 1e-12;

double EvaluatePlacesPixel(const Vec2& pixel, double depth,
                           const CameraModel& cam, double alpha,
                           const PairwiseObservation& pair, const Vec3& x,
                           double weight, PixelGradient* grad) {
  const Mat3& r = cam.rotation.matrix();
  const Vec3 m = cam.intrinsics.Ray(pixel);
  const Vec3 w = depth * m - cam.translation;
  const Vec3 s = alpha * (r.transpose() * w);
  const Vec3 a = pair.rotation.matrix() * x;
  const Vec3 y = pair.sigma * (a + pair.translation);
  const Vec3 res = s - y;
  const double norm = res.norm();
  if (grad == nullptr) return norm;
  *grad = PixelGradient{};
  if (norm <= kResidualFloor * (s.norm() + y.norm())) return norm;

  const Vec3 g = (weight / norm) * res;
  const Vec3 rg = r * g;
  grad->log_depth = alpha * depth * rg.dot(m);
  grad->log_alpha = g.dot(s);
  grad->camera.translation = -alpha * rg;
  grad->camera.rotation = alpha * rg.cross(w);
  grad->camera.log_focal = -alpha * depth * (rg.x() * m.x() + rg.y() * m.y());
  grad->pair.translation = -pair.sigma * g;
  grad->pair.log_sigma = -g.dot(y);
  grad->pair.rotation = pair.sigma * g.cross(a);
  return norm;
}

void MaskInactive(const ActiveSet& active, StateGradient* grad) {
  if (!active.alpha) grad->log_alpha = 0.0;
  for (HumanGradient& h : grad->humans) {
    if (!active.gamma) h.gamma.setZero();
    if (!active.beta) h.beta.setZero();
    if (!active.phi) h.phi.setZero();
    if (!active.theta) {
      for (Vec3& t : h.theta) t.setZero();
    }
  }
  for (StateGradient::Camera& c : grad->cameras) {
    if (!active.cam_rotation) c.rotation.setZero();
    if (!active.cam_translation) c.translation.setZero();
    if (!active.focal) c.log_focal = 0.0;
  }
  if (!active.depth) {
    for (auto& d : grad->log_depth) d.setZero();
  }
  for (StateGradient::Pair& p : grad->pairs) {
    if (!active.pair_pose) {
      p.rotation.setZero();
      p.translation.setZero();
    }
    if (!active.pair_scale) p.log_sigma = 0.0;
  }
}

}  // namespace detail

}  // namespace hsfm
