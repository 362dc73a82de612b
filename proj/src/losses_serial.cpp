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

// Reference implementation of the objective: plain loops, direct
// accumulation. Kept for testing the parallel kernels and for benchmarking.

#include "hsfm/losses.hpp"

namespace hsfm::detail {

LossBreakdown EvaluateSerial(const LossFunction& f, const WorldState& state,
                             const LossOptions& options, StateGradient* grad) {
  const SkeletonTemplate& tmpl = f.skeleton();
  const int num_cameras = static_cast<int>(state.cameras.size());
  const int num_humans = static_cast<int>(state.humans.size());
  if (grad != nullptr) grad->Reset(state, tmpl);

  LossBreakdown out;
  out.lambda = options.lambda;
  out.reprojection = Eigen::MatrixXd::Zero(num_cameras, num_humans);
  out.shape = Eigen::VectorXd::Zero(num_humans);

  if (num_humans > 0) {
    const double w = 1.0 / (static_cast<double>(num_humans) * num_cameras);
    std::vector<KinematicState> kin;
    std::vector<Points3> joint_grads;
    for (const HumanParams& h : state.humans) {
      kin.push_back(ForwardKinematicsWithFrames(h, tmpl));
      joint_grads.push_back(Points3::Zero(3, tmpl.num_joints()));
    }
    double reproj_sum = 0.0;
    for (int c = 0; c < num_cameras; ++c) {
      for (int h = 0; h < num_humans; ++h) {
        const int idx = f.ObservationIndex(c, h);
        if (idx < 0) continue;
        ReprojectionTerm t = EvaluateReprojection(
            f.observation(idx), kin[h].joints, state.cameras[c], state.alpha, w,
            grad != nullptr);
        out.reprojection(c, h) = t.value;
        reproj_sum += t.value;
        if (grad == nullptr) continue;
        joint_grads[h] += t.joint_grads;
        if (!options.detach_human_grads) {
          grad->cameras[c].rotation += t.camera.rotation;
          grad->cameras[c].translation += t.camera.translation;
          grad->cameras[c].log_focal += t.camera.log_focal;
          grad->log_alpha += t.log_alpha;
        }
      }
    }
    out.humans = reproj_sum * w;
    for (int h = 0; h < num_humans; ++h) {
      const Eigen::VectorXd& beta = state.humans[h].beta;
      const double nb = beta.norm();
      out.shape(h) = nb;
      out.humans += nb / num_humans;
      if (grad == nullptr) continue;
      grad->humans[h] = BackpropJoints(state.humans[h], tmpl, kin[h], joint_grads[h]);
      if (nb > 0.0) grad->humans[h].beta += beta / (nb * num_humans);
    }
  }

  out.pair_residuals.assign(state.pairs.size(), 0.0);
  if (!options.skip_places) {
    double mass = 0.0;
    for (const PairwiseObservation& pair : state.pairs) {
      for (int side = 0; side < 2; ++side) {
        const int cam = side == 0 ? pair.cam_i : pair.cam_j;
        const auto& conf = side == 0 ? pair.confidence_i : pair.confidence_j;
        for (int p = 0; p < state.grid.size(); ++p) {
          if (conf[p] >= kMinPointmapConfidence && state.depths[cam].Valid(p)) {
            mass += conf[p];
          }
        }
      }
    }
    out.confidence_mass = mass;
    const bool want_grad = grad != nullptr && options.lambda != 0.0;
    double sum = 0.0;
    for (std::size_t e = 0; e < state.pairs.size(); ++e) {
      const PairwiseObservation& pair = state.pairs[e];
      double pair_sum = 0.0;
      double pair_mass = 0.0;
      for (int side = 0; side < 2; ++side) {
        const int cam = side == 0 ? pair.cam_i : pair.cam_j;
        const auto& pts = side == 0 ? pair.points_i : pair.points_j;
        const auto& conf = side == 0 ? pair.confidence_i : pair.confidence_j;
        const DepthMap& depth = state.depths[cam];
        for (int p = 0; p < state.grid.size(); ++p) {
          if (conf[p] < kMinPointmapConfidence || !depth.Valid(p)) continue;
          PixelGradient pg;
          const double norm = EvaluatePlacesPixel(
              state.grid.Pixel(p), depth.depth[p], state.cameras[cam], state.alpha,
              pair, pts[p], options.lambda * conf[p] / mass,
              want_grad ? &pg : nullptr);
          pair_sum += conf[p] * norm;
          pair_mass += conf[p];
          if (!want_grad) continue;
          grad->log_depth[cam](p) += pg.log_depth;
          grad->log_alpha += pg.log_alpha;
          grad->cameras[cam].rotation += pg.camera.rotation;
          grad->cameras[cam].translation += pg.camera.translation;
          grad->cameras[cam].log_focal += pg.camera.log_focal;
          grad->pairs[e].rotation += pg.pair.rotation;
          grad->pairs[e].translation += pg.pair.translation;
          grad->pairs[e].log_sigma += pg.pair.log_sigma;
        }
      }
      sum += pair_sum;
      out.pair_residuals[e] = pair_mass > 0.0 ? pair_sum / pair_mass : 0.0;
    }
    out.places = mass > 0.0 ? sum / mass : 0.0;
  }
  out.total = out.humans + options.lambda * out.places;
  return out;
}

}  // namespace hsfm::detail
