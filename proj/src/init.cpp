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

#include "hsfm/init.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace hsfm {

int SelectAnchor(std::span<const KeypointObservation> keypoints, int num_humans) {
  std::vector<double> mass(num_humans, 0.0);
  std::vector<int> views(num_humans, 0);
  for (const KeypointObservation& k : keypoints) {
    if (k.human_id < 0 || k.human_id >= num_humans) continue;
    mass[k.human_id] += k.TotalConfidence();
    if (k.TotalConfidence() > 0.0) ++views[k.human_id];
  }
  int best = -1;
  for (int h = 0; h < num_humans; ++h) {
    if (views[h] < 2) continue;
    if (best < 0 || mass[h] > mass[best]) best = h;
  }
  if (best < 0) throw NoMultiViewHuman("no human is observed by two or more cameras");
  return best;
}

Rotation3 RecoverRotation(const Rotation3& anchor_in_reference,
                          const Rotation3& anchor_in_camera,
                          const Rotation3& reference_rotation) {
  const Mat3 rt = reference_rotation.matrix().transpose() *
                  anchor_in_reference.matrix() *
                  anchor_in_camera.matrix().transpose();
  return Rotation3(Orthonormalize(rt.transpose()));
}

std::vector<Rotation3> RecoverRotations(
    std::span<const std::optional<Rotation3>> anchor_orientations,
    int reference_camera, const Rotation3& reference_rotation) {
  const auto& ref = anchor_orientations[reference_camera];
  if (!ref) throw MissingAnchorView("anchor not estimated in the reference camera");
  std::vector<Rotation3> out;
  for (std::size_t c = 0; c < anchor_orientations.size(); ++c) {
    if (static_cast<int>(c) == reference_camera) {
      out.push_back(reference_rotation);
      continue;
    }
    if (!anchor_orientations[c]) {
      throw MissingAnchorView("anchor not estimated in camera " + std::to_string(c));
    }
    out.push_back(RecoverRotation(*ref, *anchor_orientations[c], reference_rotation));
  }
  return out;
}

Vec3 PlaceHuman(const KeypointObservation& keypoints, const Points3& joints_cam,
                const Intrinsics& intrinsics, const SkeletonTemplate& tmpl,
                double confidence_gate, double min_bone_pixels) {
  double sum2d = 0.0;
  double sum3d = 0.0;
  std::vector<int> used;
  for (int k = 0; k < tmpl.num_joints(); ++k) {
    const int p = tmpl.parents[k];
    if (p < 0) continue;
    if (keypoints.confidence(k) <= confidence_gate ||
        keypoints.confidence(p) <= confidence_gate) {
      continue;
    }
    const double len2d = (keypoints.joints.col(k) - keypoints.joints.col(p)).norm();
    if (len2d <= min_bone_pixels) continue;
    sum3d += (joints_cam.col(k) - joints_cam.col(p)).head<2>().norm();
    sum2d += len2d;
    used.push_back(k);
  }
  if (used.empty() || sum3d <= 0.0) {
    throw InsufficientKeypoints("no bone passes the confidence/length gates");
  }
  const double f = 0.5 * (intrinsics.fx + intrinsics.fy);
  double z = f * sum3d / sum2d;

  const Vec3 root = joints_cam.col(tmpl.root());
  auto back_project = [&](double depth_root) {
    double wsum = 0.0;
    Vec2 xy = Vec2::Zero();
    for (int k = 0; k < tmpl.num_joints(); ++k) {
      const double c = keypoints.confidence(k);
      if (c <= confidence_gate) continue;
      const Vec3 o = joints_cam.col(k) - root;
      const double depth = std::max(depth_root + o.z(), kDepthEpsilon);
      const Vec2 ray((keypoints.joints(0, k) - intrinsics.cx) / intrinsics.fx,
                     (keypoints.joints(1, k) - intrinsics.cy) / intrinsics.fy);
      xy += c * (ray * depth - o.head<2>());
      wsum += c;
    }
    return Vec2(xy / wsum);
  };

  Vec2 xy = back_project(z);
  for (int iter = 0; iter < 20; ++iter) {
    const Vec3 gamma(xy.x(), xy.y(), z);
    double extent = 0.0;
    for (int k : used) {
      const int p = tmpl.parents[k];
      const Vec3 a = joints_cam.col(k) - root + gamma;
      const Vec3 b = joints_cam.col(p) - root + gamma;
      if (a.z() <= kDepthEpsilon || b.z() <= kDepthEpsilon) {
        extent = 0.0;
        break;
      }
      extent += z * (a.head<2>() / a.z() - b.head<2>() / b.z()).norm();
    }
    if (extent <= 0.0) break;
    const double next = f * extent / sum2d;
    const bool done = std::abs(next - z) <= 1e-12 * z;
    z = next;
    xy = back_project(z);
    if (done) break;
  }
  return {xy.x(), xy.y(), z};
}

std::vector<Vec3> RecoverTranslations(std::span<const std::optional<Vec3>> gammas,
                                      std::span<const Rotation3> rotations,
                                      int reference_camera) {
  const auto& ref = gammas[reference_camera];
  if (!ref) throw MissingAnchorView("anchor not placed in the reference camera");
  std::vector<Vec3> out;
  for (std::size_t c = 0; c < gammas.size(); ++c) {
    if (!gammas[c]) {
      throw MissingAnchorView("anchor not placed in camera " + std::to_string(c));
    }
    out.push_back(*ref - rotations[c].matrix().transpose() * *gammas[c]);
  }
  return out;
}

ScaleSolution SolveScale(std::span<const Vec3> human_centric,
                         std::span<const Vec3> data_driven) {
  if (human_centric.size() != data_driven.size()) {
    throw DegenerateScale("scale solve needs matching camera sets");
  }
  double num = 0.0;
  double den = 0.0;
  double norm_hat = 0.0;
  double norm_tilde = 0.0;
  for (std::size_t c = 0; c < data_driven.size(); ++c) {
    num += human_centric[c].dot(data_driven[c]);
    den += data_driven[c].squaredNorm();
    norm_hat += human_centric[c].norm();
    norm_tilde += data_driven[c].norm();
  }
  if (!(norm_tilde > 0.0)) throw DegenerateScale("all data-driven camera positions are zero");
  ScaleSolution s;
  s.alpha = den >= 1e-12 ? num / den : 0.0;
  if (!(s.alpha > 0.0)) {
    s.alpha = norm_hat / norm_tilde;
    s.fallback = true;
  }
  double sq = 0.0;
  for (std::size_t c = 0; c < data_driven.size(); ++c) {
    sq += (human_centric[c] - s.alpha * data_driven[c]).squaredNorm();
  }
  s.residual = data_driven.empty() ? 0.0 : std::sqrt(sq / data_driven.size());
  return s;
}

void WarmStartPairs(WorldState* state) {
  std::vector<Pointmap> world(state->cameras.size());
  for (std::size_t c = 0; c < state->cameras.size(); ++c) {
    world[c] = WorldPointmap(*state, state->cameras[c].id);
  }
  for (PairwiseObservation& pair : state->pairs) {
    std::vector<Vec3> src;
    std::vector<Vec3> dst;
    for (int side = 0; side < 2; ++side) {
      const int cam = side == 0 ? pair.cam_i : pair.cam_j;
      const auto& pts = side == 0 ? pair.points_i : pair.points_j;
      const auto& conf = side == 0 ? pair.confidence_i : pair.confidence_j;
      for (std::size_t p = 0; p < pts.size(); ++p) {
        if (conf[p] < kMinPointmapConfidence || !world[cam].valid[p]) continue;
        src.push_back(pts[p]);
        dst.push_back(world[cam].points[p]);
      }
    }
    pair.rotation = Rotation3::Identity();
    pair.translation.setZero();
    pair.sigma = 1.0;
    if (src.size() < 3) continue;
    Points3 a(3, src.size());
    Points3 b(3, dst.size());
    for (std::size_t k = 0; k < src.size(); ++k) {
      a.col(k) = src[k];
      b.col(k) = dst[k];
    }
    try {
      const SimilarityTransform t = UmeyamaAlign(a, b, /*with_scale=*/true);
      if (!(t.scale > 0.0)) continue;
      // world = sigma (R x + t)  <=>  s R x + t_sim
      pair.sigma = t.scale;
      pair.rotation = t.rotation;
      pair.translation = t.translation / t.scale;
    } catch (const DegenerateConfiguration&) {
    }
  }
}

bool HumansInFrontOfCameras(const WorldState& state,
                            std::span<const KeypointObservation> keypoints,
                            const SkeletonTemplate& tmpl) {
  std::vector<Points3> joints;
  for (const HumanParams& h : state.humans) joints.push_back(ForwardKinematics(h, tmpl));
  for (const KeypointObservation& k : keypoints) {
    const int h = state.HumanIndex(k.human_id);
    if (h < 0) continue;
    const CameraModel& cam = state.cameras[state.CameraIndex(k.camera_id)];
    for (int j = 0; j < tmpl.num_joints(); ++j) {
      if (k.confidence(j) <= 0.0) continue;
      if (!TryProject(joints[h].col(j), cam, state.alpha)) return false;
    }
  }
  return true;
}

namespace {

const HumanEstimate* FindEstimate(const Scene& scene, int human, int camera) {
  for (const HumanEstimate& e : scene.human_estimates) {
    if (e.human_id == human && e.camera_id == camera) return &e;
  }
  return nullptr;
}

const KeypointObservation* FindKeypoints(const Scene& scene, int human, int camera) {
  for (const KeypointObservation& k : scene.keypoints) {
    if (k.human_id == human && k.camera_id == camera) return &k;
  }
  return nullptr;
}

// Root-relative joints of a per-view estimate, in that camera's orientation.
Points3 CameraFrameJoints(const HumanParams& estimate, const SkeletonTemplate& tmpl) {
  HumanParams p = estimate;
  p.gamma.setZero();
  return ForwardKinematics(p, tmpl);
}

std::optional<Vec3> TryPlace(const Scene& scene, const InitOptions& options,
                             int human, int camera, std::string* why) {
  const HumanEstimate* est = FindEstimate(scene, human, camera);
  const KeypointObservation* kp = FindKeypoints(scene, human, camera);
  if (est == nullptr || kp == nullptr) {
    *why = "no estimate/keypoints";
    return std::nullopt;
  }
  try {
    return PlaceHuman(*kp, CameraFrameJoints(est->params, scene.skeleton),
                      scene.state.cameras[camera].intrinsics, scene.skeleton,
                      options.bone_confidence_gate, options.min_bone_pixels);
  } catch (const InsufficientKeypoints& e) {
    *why = e.what();
    return std::nullopt;
  }
}

}  // namespace

InitResult InitializeWorld(const Scene& scene, const InitOptions& options) {
  const int num_cameras = static_cast<int>(scene.state.cameras.size());
  const int num_humans = scene.num_humans;
  const SkeletonTemplate& tmpl = scene.skeleton;
  InitResult result;
  InitReport& report = result.report;
  WorldState& state = result.state;
  state = scene.state;
  state.humans.clear();

  // Per-camera keypoint confidence mass.
  std::vector<double> camera_mass(num_cameras, 0.0);
  std::map<std::pair<int, int>, double> view_mass;
  for (const KeypointObservation& k : scene.keypoints) {
    camera_mass[k.camera_id] += k.TotalConfidence();
    view_mass[{k.human_id, k.camera_id}] += k.TotalConfidence();
  }

  if (num_cameras >= 2) {
    report.anchor_human = SelectAnchor(scene.keypoints, num_humans);
  } else {
    // Single view: the best-covered human anchors nothing but placement.
    double best = -1.0;
    for (int h = 0; h < num_humans; ++h) {
      double m = 0.0;
      for (int c = 0; c < num_cameras; ++c) {
        auto it = view_mass.find({h, c});
        if (it != view_mass.end()) m += it->second;
      }
      if (m > best) {
        best = m;
        report.anchor_human = h;
      }
    }
    report.warnings.push_back("single camera: no camera pairs to solve the scale, alpha falls back to 1");
  }
  const int anchor = report.anchor_human;

  int ref = options.reference_camera;
  if (ref < 0) {
    double best = -1.0;
    for (int c = 0; c < num_cameras; ++c) {
      if (FindEstimate(scene, anchor, c) == nullptr || FindKeypoints(scene, anchor, c) == nullptr) continue;
      if (camera_mass[c] > best) {
        best = camera_mass[c];
        ref = c;
      }
    }
    if (ref < 0) throw MissingAnchorView("anchor has no estimate in any camera");
  } else if (ref >= num_cameras) {
    throw UnknownCamera("reference camera " + std::to_string(ref));
  }
  report.reference_camera = ref;

  // Re-anchor the data-driven reconstruction on the reference camera.
  {
    const Mat3 r_ref = scene.state.cameras[ref].rotation.matrix();
    const Vec3 t_ref = scene.state.cameras[ref].translation;
    for (int c = 0; c < num_cameras; ++c) {
      CameraModel& cam = state.cameras[c];
      const Mat3 r = cam.rotation.matrix() * r_ref.transpose();
      cam.translation = cam.translation - r * t_ref;
      cam.rotation = Rotation3(r);
    }
    state.cameras[ref].rotation = Rotation3::Identity();
    state.cameras[ref].translation.setZero();
  }

  // Human-centric rotations and positions from the anchor.
  report.rotations.resize(num_cameras);
  report.positions.assign(num_cameras, std::nullopt);
  report.anchor_translations.assign(num_cameras, std::nullopt);
  report.rotation_residual_deg.assign(num_cameras, 0.0);
  const HumanEstimate* ref_est = FindEstimate(scene, anchor, ref);
  for (int c = 0; c < num_cameras; ++c) {
    const HumanEstimate* est = FindEstimate(scene, anchor, c);
    if (c == ref) {
      report.rotations[c] = Rotation3::Identity();
    } else if (est != nullptr) {
      report.rotations[c] =
          RecoverRotation(ref_est->params.phi, est->params.phi, Rotation3::Identity());
    } else {
      report.rotations[c] = state.cameras[c].rotation;
      report.warnings.push_back("camera " + std::to_string(c) +
                                ": anchor orientation missing, using data-driven rotation");
    }
    report.rotation_residual_deg[c] =
        RelativeRotationAngleDeg(report.rotations[c], state.cameras[c].rotation);
    std::string why;
    report.anchor_translations[c] = TryPlace(scene, options, anchor, c, &why);
    if (!report.anchor_translations[c] && num_cameras > 1) {
      report.warnings.push_back("camera " + std::to_string(c) +
                                ": anchor not placed (" + why + ")");
    }
  }
  if (!report.anchor_translations[ref]) {
    throw MissingAnchorView("anchor cannot be placed in the reference camera");
  }

  std::vector<Vec3> hat;
  std::vector<Vec3> tilde;
  for (int c = 0; c < num_cameras; ++c) {
    if (!report.anchor_translations[c]) continue;
    report.positions[c] = *report.anchor_translations[ref] -
                          report.rotations[c].matrix().transpose() *
                              *report.anchor_translations[c];
    if (c == ref) continue;
    hat.push_back(*report.positions[c]);
    tilde.push_back(state.cameras[c].Center(1.0));
  }
  if (hat.empty()) {
    report.alpha_hat = 1.0;
    report.scale_fallback = true;
    if (num_cameras > 1) report.warnings.push_back("no camera besides the reference sees the anchor; alpha = 1");
  } else {
    const ScaleSolution s = SolveScale(hat, tilde);
    report.alpha_hat = s.alpha;
    report.scale_residual = s.residual;
    report.scale_fallback = s.fallback;
  }
  switch (options.alpha_init) {
    case AlphaInit::kHuman: report.alpha = report.alpha_hat; break;
    case AlphaInit::kOne: report.alpha = 1.0; break;
    case AlphaInit::kFixed: report.alpha = options.alpha_fixed; break;
  }
  if (!(report.alpha > 0.0)) throw ConfigError("initial alpha must be positive");
  state.alpha = report.alpha;

  // Place every human, preferring the reference view.
  for (int h = 0; h < num_humans; ++h) {
    std::vector<int> candidates;
    for (int c = 0; c < num_cameras; ++c) {
      if (view_mass.count({h, c}) && FindEstimate(scene, h, c)) candidates.push_back(c);
    }
    std::stable_sort(candidates.begin(), candidates.end(), [&](int a, int b) {
      if ((a == ref) != (b == ref)) return a == ref;
      return view_mass[{h, a}] > view_mass[{h, b}];
    });
    HumanParams human = HumanParams::Rest(tmpl, h);
    bool placed = false;
    for (int c : candidates) {
      std::string why;
      auto gamma_cam = TryPlace(scene, options, h, c, &why);
      const HumanEstimate* est = FindEstimate(scene, h, c);
      if (!gamma_cam) continue;
      const CameraModel& cam = state.cameras[c];
      const Mat3 rt = cam.rotation.matrix().transpose();
      human = est->params;
      human.id = h;
      human.phi = Rotation3(rt * est->params.phi.matrix());
      human.gamma = rt * (*gamma_cam - state.alpha * cam.translation);
      placed = true;
      break;
    }
    if (!placed) {
      report.warnings.push_back("human " + std::to_string(h) + " could not be placed");
    }
    state.humans.push_back(std::move(human));
  }

  WarmStartPairs(&state);

  if (!HumansInFrontOfCameras(state, scene.keypoints, tmpl)) {
    report.degenerate_configuration = true;
    report.warnings.push_back(
        "degenerate configuration: some observed joints are behind their camera");
  }
  return result;
}

nlohmann::json InitReportToJson(const InitReport& r) {
  using nlohmann::json;
  json cams = json::array();
  for (std::size_t c = 0; c < r.rotations.size(); ++c) {
    json cj = {{"camera", c}, {"rotation_residual_deg", r.rotation_residual_deg[c]}};
    const Mat3& m = r.rotations[c].matrix();
    cj["R_hat"] = {m(0, 0), m(0, 1), m(0, 2), m(1, 0), m(1, 1), m(1, 2), m(2, 0), m(2, 1), m(2, 2)};
    if (r.positions[c]) cj["T_hat"] = {r.positions[c]->x(), r.positions[c]->y(), r.positions[c]->z()};
    if (r.anchor_translations[c]) {
      const Vec3& g = *r.anchor_translations[c];
      cj["gamma_tilde"] = {g.x(), g.y(), g.z()};
    }
    cams.push_back(cj);
  }
  return {{"anchor_human", r.anchor_human},
          {"reference_camera", r.reference_camera},
          {"alpha_hat", r.alpha_hat},
          {"alpha", r.alpha},
          {"scale_residual", r.scale_residual},
          {"scale_fallback", r.scale_fallback},
          {"degenerate_configuration", r.degenerate_configuration},
          {"cameras", cams},
          {"warnings", r.warnings}};
}

}  // namespace hsfm
