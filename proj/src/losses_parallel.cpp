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

// OpenMP evaluation of the objective. Work is split into tasks whose
// boundaries do not depend on the thread count; each task writes its own
// slot and slots are reduced serially in task order, so results are
// bit-identical for any number of threads.

#include "hsfm/losses.hpp"

namespace hsfm::detail {

namespace {

constexpr int kPixelBlock = 256;

struct PlacesTask {
  int pair = 0;
  int side = 0;
  int begin = 0;
  int end = 0;
};

struct PlacesSlot {
  double sum = 0.0;
  double mass = 0.0;
  double log_alpha = 0.0;
  StateGradient::Camera camera;
  StateGradient::Pair pair;
  std::vector<double> log_depth;  // [begin, end)
};

void AddCamera(StateGradient::Camera* dst, const StateGradient::Camera& src) {
  dst->rotation += src.rotation;
  dst->translation += src.translation;
  dst->log_focal += src.log_focal;
}

void AddPair(StateGradient::Pair* dst, const StateGradient::Pair& src) {
  dst->rotation += src.rotation;
  dst->translation += src.translation;
  dst->log_sigma += src.log_sigma;
}

}  // namespace

LossBreakdown EvaluateParallel(const LossFunction& f, const WorldState& state,
                               const LossOptions& options, StateGradient* grad) {
  const SkeletonTemplate& tmpl = f.skeleton();
  const int num_cameras = static_cast<int>(state.cameras.size());
  const int num_humans = static_cast<int>(state.humans.size());
  const bool want_grad = grad != nullptr;
  if (want_grad) grad->Reset(state, tmpl);

  LossBreakdown out;
  out.lambda = options.lambda;
  out.reprojection = Eigen::MatrixXd::Zero(num_cameras, num_humans);
  out.shape = Eigen::VectorXd::Zero(num_humans);

  // --- humans ---------------------------------------------------------------
  if (num_humans > 0) {
    const double w = 1.0 / (static_cast<double>(num_humans) * num_cameras);
    std::vector<KinematicState> kin(num_humans);
#pragma omp parallel for schedule(static)
    for (int h = 0; h < num_humans; ++h) {
      kin[h] = ForwardKinematicsWithFrames(state.humans[h], tmpl);
    }

    std::vector<std::pair<int, int>> terms;
    for (int c = 0; c < num_cameras; ++c) {
      for (int h = 0; h < num_humans; ++h) {
        if (f.ObservationIndex(c, h) >= 0) terms.emplace_back(c, h);
      }
    }
    std::vector<ReprojectionTerm> slots(terms.size());
#pragma omp parallel for schedule(static)
    for (std::size_t k = 0; k < terms.size(); ++k) {
      const auto [c, h] = terms[k];
      slots[k] = EvaluateReprojection(f.observation(f.ObservationIndex(c, h)),
                                      kin[h].joints, state.cameras[c],
                                      state.alpha, w, want_grad);
    }

    double reproj_sum = 0.0;
    std::vector<Points3> joint_grads(num_humans,
                                     Points3::Zero(3, tmpl.num_joints()));
    for (std::size_t k = 0; k < terms.size(); ++k) {
      const auto [c, h] = terms[k];
      out.reprojection(c, h) = slots[k].value;
      reproj_sum += slots[k].value;
      if (!want_grad) continue;
      joint_grads[h] += slots[k].joint_grads;
      if (!options.detach_human_grads) {
        AddCamera(&grad->cameras[c], slots[k].camera);
        grad->log_alpha += slots[k].log_alpha;
      }
    }
    out.humans = reproj_sum * w;
    for (int h = 0; h < num_humans; ++h) {
      out.shape(h) = state.humans[h].beta.norm();
      out.humans += out.shape(h) / num_humans;
    }
    if (want_grad) {
#pragma omp parallel for schedule(static)
      for (int h = 0; h < num_humans; ++h) {
        grad->humans[h] =
            BackpropJoints(state.humans[h], tmpl, kin[h], joint_grads[h]);
        const double nb = out.shape(h);
        if (nb > 0.0) grad->humans[h].beta += state.humans[h].beta / (nb * num_humans);
      }
    }
  }

  // --- places ---------------------------------------------------------------
  out.pair_residuals.assign(state.pairs.size(), 0.0);
  if (!options.skip_places && !state.pairs.empty()) {
    const int n = state.grid.size();
    std::vector<PlacesTask> tasks;
    for (int e = 0; e < static_cast<int>(state.pairs.size()); ++e) {
      for (int side = 0; side < 2; ++side) {
        for (int b = 0; b < n; b += kPixelBlock) {
          tasks.push_back({e, side, b, std::min(n, b + kPixelBlock)});
        }
      }
    }
    // Normalizer first: it scales every pixel's gradient.
    std::vector<double> task_mass(tasks.size(), 0.0);
#pragma omp parallel for schedule(static)
    for (std::size_t k = 0; k < tasks.size(); ++k) {
      const PlacesTask& t = tasks[k];
      const PairwiseObservation& pair = state.pairs[t.pair];
      const int cam = t.side == 0 ? pair.cam_i : pair.cam_j;
      const auto& conf = t.side == 0 ? pair.confidence_i : pair.confidence_j;
      double m = 0.0;
      for (int p = t.begin; p < t.end; ++p) {
        if (conf[p] >= kMinPointmapConfidence && state.depths[cam].Valid(p)) m += conf[p];
      }
      task_mass[k] = m;
    }
    double mass = 0.0;
    for (double m : task_mass) mass += m;
    out.confidence_mass = mass;

    const bool places_grad = want_grad && options.lambda != 0.0 && mass > 0.0;
    std::vector<PlacesSlot> slots(tasks.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (std::size_t k = 0; k < tasks.size(); ++k) {
      const PlacesTask& t = tasks[k];
      const PairwiseObservation& pair = state.pairs[t.pair];
      const int cam = t.side == 0 ? pair.cam_i : pair.cam_j;
      const auto& pts = t.side == 0 ? pair.points_i : pair.points_j;
      const auto& conf = t.side == 0 ? pair.confidence_i : pair.confidence_j;
      const DepthMap& depth = state.depths[cam];
      PlacesSlot& slot = slots[k];
      if (places_grad) slot.log_depth.assign(t.end - t.begin, 0.0);
      for (int p = t.begin; p < t.end; ++p) {
        if (conf[p] < kMinPointmapConfidence || !depth.Valid(p)) continue;
        PixelGradient pg;
        const double norm = EvaluatePlacesPixel(
            state.grid.Pixel(p), depth.depth[p], state.cameras[cam], state.alpha,
            pair, pts[p], options.lambda * conf[p] / mass,
            places_grad ? &pg : nullptr);
        slot.sum += conf[p] * norm;
        slot.mass += conf[p];
        if (!places_grad) continue;
        slot.log_depth[p - t.begin] = pg.log_depth;
        slot.log_alpha += pg.log_alpha;
        AddCamera(&slot.camera, pg.camera);
        AddPair(&slot.pair, pg.pair);
      }
    }

    double sum = 0.0;
    std::vector<double> pair_mass(state.pairs.size(), 0.0);
    for (std::size_t k = 0; k < tasks.size(); ++k) {
      const PlacesTask& t = tasks[k];
      const PlacesSlot& slot = slots[k];
      sum += slot.sum;
      out.pair_residuals[t.pair] += slot.sum;
      pair_mass[t.pair] += slot.mass;
      if (!places_grad) continue;
      const PairwiseObservation& pair = state.pairs[t.pair];
      const int cam = t.side == 0 ? pair.cam_i : pair.cam_j;
      grad->log_alpha += slot.log_alpha;
      AddCamera(&grad->cameras[cam], slot.camera);
      AddPair(&grad->pairs[t.pair], slot.pair);
      auto& dst = grad->log_depth[cam];
      for (int p = t.begin; p < t.end; ++p) dst(p) += slot.log_depth[p - t.begin];
    }
    for (std::size_t e = 0; e < state.pairs.size(); ++e) {
      if (pair_mass[e] > 0.0) out.pair_residuals[e] /= pair_mass[e];
    }
    out.places = mass > 0.0 ? sum / mass : 0.0;
  }
  out.total = out.humans + options.lambda * out.places;
  return out;
}

}  // namespace hsfm::detail
