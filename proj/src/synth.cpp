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

#include "hsfm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>
#include <set>

namespace hsfm {

namespace fs = std::filesystem;
using nlohmann::json;

// --- config ---------------------------------------------------------------------

#define HSFM_SYNTH_FIELDS(X)                                                   \
  X(num_cameras) X(num_humans) X(scene_radius) X(ring_radius) X(camera_height) \
  X(look_at_height) X(image_width) X(image_height) X(focal_min) X(focal_max)   \
  X(grid_stride) X(num_boxes) X(wall_radius) X(wall_height) X(pose_deg)        \
  X(beta_sigma) X(keypoint_sigma_px) X(keypoint_dropout) X(pointmap_noise)     \
  X(pair_scale_drift) X(estimate_rotation_deg) X(estimate_pose_deg)            \
  X(estimate_beta_sigma) X(estimate_translation_frac) X(init_rotation_deg)     \
  X(init_translation_frac) X(init_alpha_multiplier) X(seed)

json SynthConfigToJson(const SynthConfig& c) {
  json j;
#define X(name) j[#name] = c.name;
  HSFM_SYNTH_FIELDS(X)
#undef X
  return j;
}

SynthConfig SynthConfigFromJson(const json& j) {
  if (!j.is_object()) throw ConfigError("synth config must be a JSON object");
  std::set<std::string> known;
#define X(name) known.insert(#name);
  HSFM_SYNTH_FIELDS(X)
#undef X
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown synth config key: " + key);
  }
  SynthConfig c;
  try {
#define X(name) c.name = j.value(#name, c.name);
    HSFM_SYNTH_FIELDS(X)
#undef X
  } catch (const json::exception& e) {
    throw ConfigError(std::string("synth config: ") + e.what());
  }
  ValidateSynthConfig(c);
  return c;
}

#undef HSFM_SYNTH_FIELDS

void ValidateSynthConfig(const SynthConfig& c) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("synth config: ") + what);
  };
  require(c.num_cameras >= 1, "num_cameras must be >= 1");
  require(c.num_humans >= 1, "num_humans must be >= 1");
  require(c.scene_radius >= 0.0, "scene_radius must be >= 0");
  require(c.ring_radius > c.scene_radius + 1.0, "ring_radius must clear the humans by 1 m");
  require(c.image_width > 0 && c.image_height > 0, "image size must be positive");
  require(c.focal_min > 0.0 && c.focal_max >= c.focal_min, "focal range invalid");
  require(c.grid_stride >= 1 && c.grid_stride <= std::min(c.image_width, c.image_height),
          "grid_stride out of range");
  require(c.num_boxes >= 0, "num_boxes must be >= 0");
  require(c.wall_radius > c.ring_radius, "wall_radius must exceed ring_radius");
  require(c.pose_deg >= 0.0 && c.beta_sigma >= 0.0, "pose/shape spreads must be >= 0");
  require(c.keypoint_sigma_px >= 0.0, "keypoint_sigma_px must be >= 0");
  require(c.keypoint_dropout >= 0.0 && c.keypoint_dropout < 1.0, "keypoint_dropout must be in [0, 1)");
  require(c.pointmap_noise >= 0.0 && c.pointmap_noise < 0.5, "pointmap_noise must be in [0, 0.5)");
  require(c.pair_scale_drift >= 0.0 && c.pair_scale_drift < 0.5, "pair_scale_drift must be in [0, 0.5)");
  require(c.estimate_rotation_deg >= 0.0 && c.estimate_pose_deg >= 0.0 &&
              c.estimate_beta_sigma >= 0.0 && c.estimate_translation_frac >= 0.0,
          "estimate noise must be >= 0");
  require(c.init_rotation_deg >= 0.0 && c.init_translation_frac >= 0.0, "init noise must be >= 0");
  require(c.init_alpha_multiplier > 0.0, "init_alpha_multiplier must be positive");
}

// --- randomness -------------------------------------------------------------------

namespace {

enum Stream : std::uint32_t {
  kCameraStream = 1,
  kHumanStream,
  kBoxStream,
  kKeypointStream,
  kPairStream,
  kDepthStream,
  kInitStream,
  kEstimateStream,
};

std::mt19937_64 MakeRng(std::uint64_t seed, Stream stream, int a = 0, int b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(a),
                    static_cast<std::uint32_t>(b)};
  return std::mt19937_64(seq);
}

double Uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double Normal(std::mt19937_64& rng, double sigma = 1.0) {
  return std::normal_distribution<double>(0.0, sigma)(rng);
}

Vec3 RandomUnit(std::mt19937_64& rng) {
  Vec3 v;
  do {
    v = Vec3(Normal(rng), Normal(rng), Normal(rng));
  } while (v.norm() < 1e-9);
  return v.normalized();
}

/// Isotropic axis-angle noise with RMS angle `deg`.
Rotation3 RotationNoise(std::mt19937_64& rng, double deg) {
  const double s = deg * std::numbers::pi / 180.0 / std::sqrt(3.0);
  return Rotation3::FromAxisAngle(Vec3(Normal(rng, s), Normal(rng, s), Normal(rng, s)));
}

Mat3 LookAt(const Vec3& center, const Vec3& target) {
  const Vec3 forward = (target - center).normalized();
  const Vec3 right = forward.cross(Vec3::UnitZ()).normalized();
  const Vec3 down = forward.cross(right);
  Mat3 r;
  r.row(0) = right;
  r.row(1) = down;
  r.row(2) = forward;
  return r;
}

// --- ray casting ------------------------------------------------------------------

struct Box {
  Vec3 lo;
  Vec3 hi;
};

struct Capsule {
  Vec3 a;
  Vec3 b;
  double radius;
};

struct World {
  std::vector<Box> boxes;
  std::vector<Capsule> capsules;
  double wall_radius = 0.0;
  double wall_height = 0.0;
};

constexpr double kNoHit = std::numeric_limits<double>::infinity();

double HitGround(const Vec3& o, const Vec3& d) {
  if (d.z() >= -1e-12) return kNoHit;
  const double s = -o.z() / d.z();
  return s > 0.0 ? s : kNoHit;
}

double HitBox(const Vec3& o, const Vec3& d, const Box& box) {
  double t0 = 0.0;
  double t1 = kNoHit;
  for (int k = 0; k < 3; ++k) {
    if (std::abs(d(k)) < 1e-15) {
      if (o(k) < box.lo(k) || o(k) > box.hi(k)) return kNoHit;
      continue;
    }
    double a = (box.lo(k) - o(k)) / d(k);
    double b = (box.hi(k) - o(k)) / d(k);
    if (a > b) std::swap(a, b);
    t0 = std::max(t0, a);
    t1 = std::min(t1, b);
    if (t0 > t1) return kNoHit;
  }
  return t0 > 0.0 ? t0 : kNoHit;
}

// Unit direction `d`; returns the distance along it.
double HitCapsule(const Vec3& o, const Vec3& d, const Capsule& cap) {
  const Vec3 ba = cap.b - cap.a;
  const Vec3 oa = o - cap.a;
  const double baba = ba.dot(ba);
  const double bard = ba.dot(d);
  const double baoa = ba.dot(oa);
  const double rdoa = d.dot(oa);
  const double oaoa = oa.dot(oa);
  const double r2 = cap.radius * cap.radius;
  const double a = baba - bard * bard;
  double b = baba * rdoa - baoa * bard;
  double c = baba * oaoa - baoa * baoa - r2 * baba;
  double h = b * b - a * c;
  if (h < 0.0) return kNoHit;
  double y = bard > 0.0 ? -1.0 : baba + 1.0;
  if (a > 1e-15) {
    const double t = (-b - std::sqrt(h)) / a;
    y = baoa + t * bard;
    if (y > 0.0 && y < baba) return t > 0.0 ? t : kNoHit;
  }
  const Vec3 oc = y <= 0.0 ? oa : Vec3(o - cap.b);
  b = d.dot(oc);
  c = oc.dot(oc) - r2;
  h = b * b - c;
  if (h <= 0.0) return kNoHit;
  const double t = -b - std::sqrt(h);
  return t > 0.0 ? t : kNoHit;
}

double HitWall(const Vec3& o, const Vec3& d, double radius, double height) {
  const double a = d.x() * d.x() + d.y() * d.y();
  if (a < 1e-15) return kNoHit;
  const double b = o.x() * d.x() + o.y() * d.y();
  const double c = o.x() * o.x() + o.y() * o.y() - radius * radius;
  const double disc = b * b - a * c;
  if (disc < 0.0) return kNoHit;
  const double s = (-b + std::sqrt(disc)) / a;
  if (s <= 0.0) return kNoHit;
  const double z = o.z() + s * d.z();
  return (z >= 0.0 && z <= height) ? s : kNoHit;
}

/// Camera-frame depth of the first surface along the pixel ray, NaN on a miss.
double CastDepth(const World& world, const Vec3& center, const Vec3& dir) {
  double s = HitGround(center, dir);
  for (const Box& box : world.boxes) s = std::min(s, HitBox(center, dir, box));
  s = std::min(s, HitWall(center, dir, world.wall_radius, world.wall_height));
  const double len = dir.norm();
  const Vec3 unit = dir / len;
  for (const Capsule& cap : world.capsules) s = std::min(s, HitCapsule(center, unit, cap) / len);
  return std::isfinite(s) ? s : std::numeric_limits<double>::quiet_NaN();
}

// --- scene pieces -------------------------------------------------------------------

std::vector<CameraModel> MakeCameras(const SynthConfig& c) {
  std::vector<CameraModel> cams;
  auto rng = MakeRng(c.seed, kCameraStream);
  const Vec3 target(0, 0, c.look_at_height);
  for (int k = 0; k < c.num_cameras; ++k) {
    const double angle = 2.0 * std::numbers::pi * k / c.num_cameras + Uniform(rng, -0.1, 0.1);
    const double radius = c.ring_radius * Uniform(rng, 0.95, 1.05);
    const Vec3 center(radius * std::cos(angle), radius * std::sin(angle),
                      c.camera_height + Uniform(rng, -0.2, 0.2));
    CameraModel cam;
    cam.id = k;
    cam.intrinsics = Intrinsics::FromImageSize(c.image_width, c.image_height,
                                               Uniform(rng, c.focal_min, c.focal_max));
    cam.rotation = Rotation3(LookAt(center, target));
    cam.translation = -(cam.rotation.matrix() * center);
    cams.push_back(cam);
  }
  return cams;
}

std::vector<HumanParams> MakeHumans(const SynthConfig& c, const SkeletonTemplate& tmpl) {
  std::vector<HumanParams> humans;
  constexpr double kMinSeparation = 0.7;
  for (int h = 0; h < c.num_humans; ++h) {
    auto rng = MakeRng(c.seed, kHumanStream, h);
    Vec3 pos = Vec3::Zero();
    for (int attempt = 0; attempt < 200; ++attempt) {
      const double r = c.scene_radius * std::sqrt(Uniform(rng, 0.0, 1.0));
      const double a = Uniform(rng, 0.0, 2.0 * std::numbers::pi);
      pos = Vec3(r * std::cos(a), r * std::sin(a), 0.0);
      bool clear = true;
      for (const HumanParams& other : humans) {
        if ((other.gamma - pos).head<2>().norm() < kMinSeparation) clear = false;
      }
      if (clear) break;
    }
    HumanParams p = HumanParams::Rest(tmpl, h);
    p.phi = Rotation3::FromAxisAngle(Vec3(0, 0, Uniform(rng, -std::numbers::pi, std::numbers::pi)));
    for (int j = 0; j < tmpl.num_joints(); ++j) {
      if (j == tmpl.root()) continue;
      p.theta[j] = RotationNoise(rng, c.pose_deg);
    }
    for (int b = 0; b < tmpl.num_betas(); ++b) p.beta(b) = Normal(rng, c.beta_sigma);
    p.gamma.setZero();
    const Points3 joints = ForwardKinematics(p, tmpl);
    p.gamma = Vec3(pos.x(), pos.y(), -joints.row(2).minCoeff() + 0.08);
    humans.push_back(p);
  }
  return humans;
}

World MakeWorld(const SynthConfig& c, const std::vector<HumanParams>& humans,
                const SkeletonTemplate& tmpl) {
  World world;
  world.wall_radius = c.wall_radius;
  world.wall_height = c.wall_height;
  auto rng = MakeRng(c.seed, kBoxStream);
  const double inner = c.scene_radius + 0.7;
  const double outer = std::max(inner + 0.2, c.ring_radius - 1.0);
  for (int b = 0; b < c.num_boxes; ++b) {
    const double r = Uniform(rng, inner, outer);
    const double a = Uniform(rng, 0.0, 2.0 * std::numbers::pi);
    const Vec3 half(Uniform(rng, 0.2, 0.5), Uniform(rng, 0.2, 0.5), 0.0);
    const double height = Uniform(rng, 0.4, 1.2);
    const Vec3 center(r * std::cos(a), r * std::sin(a), 0.0);
    world.boxes.push_back({center - half, center + half + Vec3(0, 0, height)});
  }
  for (const HumanParams& h : humans) {
    const Points3 joints = ForwardKinematics(h, tmpl);
    for (int k = 0; k < tmpl.num_joints(); ++k) {
      const int p = tmpl.parents[k];
      if (p < 0) continue;
      world.capsules.push_back({joints.col(p), joints.col(k), 0.06});
    }
  }
  return world;
}

}  // namespace

// --- generation -----------------------------------------------------------------------

SynthScene GenerateScene(const SynthConfig& config) {
  ValidateSynthConfig(config);
  const SkeletonTemplate tmpl = SkeletonTemplate::Default();
  const double alpha = config.init_alpha_multiplier;
  const int num_cameras = config.num_cameras;
  const int num_humans = config.num_humans;
  const int num_joints = tmpl.num_joints();

  SynthScene out;
  out.config = config;
  Scene& scene = out.scene;
  WorldState& gt = out.ground_truth;
  scene.skeleton = tmpl;
  scene.num_humans = num_humans;
  scene.image_width = config.image_width;
  scene.image_height = config.image_height;

  // Ground truth. Camera translations are stored in pre-scale units.
  std::vector<CameraModel> metric_cams = MakeCameras(config);
  gt.alpha = alpha;
  gt.grid = PixelGrid::ForImage(config.image_width, config.image_height, config.grid_stride);
  gt.humans = MakeHumans(config, tmpl);
  for (const CameraModel& m : metric_cams) {
    CameraModel c = m;
    c.translation = m.translation / alpha;
    gt.cameras.push_back(c);
  }
  const World world = MakeWorld(config, gt.humans, tmpl);
  const int num_pixels = gt.grid.size();

  for (int c = 0; c < num_cameras; ++c) {
    const CameraModel& cam = metric_cams[c];
    const Vec3 center = cam.Center(1.0);
    DepthMap d;
    d.camera_id = c;
    d.depth.resize(num_pixels);
    for (int p = 0; p < num_pixels; ++p) {
      const Vec3 dir = cam.rotation.matrix().transpose() * cam.intrinsics.Ray(gt.grid.Pixel(p));
      d.depth[p] = CastDepth(world, center, dir) / alpha;
    }
    gt.depths.push_back(std::move(d));
  }

  // Keypoints and per-view human estimates.
  std::vector<Points3> joints;
  for (const HumanParams& h : gt.humans) joints.push_back(ForwardKinematics(h, tmpl));
  std::vector<int> views(num_humans, 0);
  for (int c = 0; c < num_cameras; ++c) {
    const CameraModel& cam = metric_cams[c];
    for (int h = 0; h < num_humans; ++h) {
      auto rng = MakeRng(config.seed, kKeypointStream, c, h);
      KeypointObservation obs;
      obs.camera_id = c;
      obs.human_id = h;
      obs.joints = Eigen::Matrix2Xd::Zero(2, num_joints);
      obs.confidence = Eigen::VectorXd::Zero(num_joints);
      double vmin = kNoHit;
      double vmax = -kNoHit;
      int visible = 0;
      for (int j = 0; j < num_joints; ++j) {
        const Vec2 noise(Normal(rng, 1.0), Normal(rng, 1.0));
        const double drop = Uniform(rng, 0.0, 1.0);
        const auto proj = TryProject(joints[h].col(j), cam, 1.0);
        if (!proj) continue;
        const Vec2& px = proj->pixel;
        if (px.x() < 0 || px.y() < 0 || px.x() >= config.image_width || px.y() >= config.image_height) continue;
        ++visible;
        vmin = std::min(vmin, px.y());
        vmax = std::max(vmax, px.y());
        const Vec2 err = config.keypoint_sigma_px * noise;
        obs.joints.col(j) = px + err;
        double conf = 1.0;
        if (config.keypoint_sigma_px > 0.0) {
          const double s2 = config.keypoint_sigma_px * config.keypoint_sigma_px;
          conf = std::max(0.05, std::exp(-err.squaredNorm() / (2.0 * s2)));
        }
        if (drop < config.keypoint_dropout) conf = 0.0;
        obs.confidence(j) = conf;
      }
      if (visible < num_joints / 2) continue;
      obs.bbox_height = std::max(10.0, 1.2 * (vmax - vmin));
      scene.keypoints.push_back(obs);
      ++views[h];

      auto erng = MakeRng(config.seed, kEstimateStream, c, h);
      HumanEstimate est;
      est.human_id = h;
      est.camera_id = c;
      HumanParams p = gt.humans[h];
      p.phi = Rotation3(RotationNoise(erng, config.estimate_rotation_deg).matrix() *
                        cam.rotation.matrix() * gt.humans[h].phi.matrix());
      for (int j = 0; j < num_joints; ++j) {
        p.theta[j] = Rotation3(RotationNoise(erng, config.estimate_pose_deg).matrix() *
                               gt.humans[h].theta[j].matrix());
      }
      for (int b = 0; b < tmpl.num_betas(); ++b) p.beta(b) += Normal(erng, config.estimate_beta_sigma);
      const Vec3 gamma_cam = cam.rotation.matrix() * gt.humans[h].gamma + cam.translation;
      p.gamma = gamma_cam * (1.0 + Normal(erng, config.estimate_translation_frac));
      est.params = p;
      scene.human_estimates.push_back(est);
    }
  }
  for (int h = 0; h < num_humans; ++h) {
    if (views[h] == 0) {
      throw ConfigError("human " + std::to_string(h) + " is outside every camera view");
    }
  }

  // Pairwise pointmaps: camera i's and camera j's content in camera j's frame,
  // each pair with its own scale drift.
  for (const auto& [i, j] : AllOrderedPairs(num_cameras)) {
    auto rng = MakeRng(config.seed, kPairStream, i, j);
    const double drift = 1.0 + Uniform(rng, -config.pair_scale_drift, config.pair_scale_drift);
    PairwiseObservation pair;
    pair.cam_i = i;
    pair.cam_j = j;
    const CameraModel& cj = gt.cameras[j];
    for (int side = 0; side < 2; ++side) {
      const int src = side == 0 ? i : j;
      const Pointmap world_pts = WorldPointmap(gt, src);
      auto& pts = side == 0 ? pair.points_i : pair.points_j;
      auto& conf = side == 0 ? pair.confidence_i : pair.confidence_j;
      pts.assign(num_pixels, Vec3::Zero());
      conf.assign(num_pixels, 0.0);
      for (int p = 0; p < num_pixels; ++p) {
        const double noise = Normal(rng, config.pointmap_noise);
        if (!world_pts.valid[p]) continue;
        const Vec3 in_j = (cj.rotation.matrix() * world_pts.points[p]) / alpha + cj.translation;
        pts[p] = drift * (1.0 + noise) * in_j;
        conf[p] = 1.0;
      }
    }
    // world = sigma (R x + t)
    pair.sigma = alpha / drift;
    pair.rotation = cj.rotation.Inverse();
    pair.translation = -drift * (cj.rotation.matrix().transpose() * cj.translation);
    gt.pairs.push_back(pair);
  }

  // Data-driven initial state: perturbed cameras, noisy depths, pair poses to
  // be estimated.
  WorldState& init = scene.state;
  init.alpha = 1.0;
  init.grid = gt.grid;
  Vec3 centroid = Vec3::Zero();
  for (const CameraModel& c : metric_cams) centroid += c.Center(1.0);
  centroid /= num_cameras;
  for (int c = 0; c < num_cameras; ++c) {
    auto rng = MakeRng(config.seed, kInitStream, c);
    const Vec3 axis = RandomUnit(rng);
    const Vec3 direction = RandomUnit(rng);
    const CameraModel& m = metric_cams[c];
    CameraModel cam = m;
    cam.rotation = Rotation3(
        ExpSO3(axis * config.init_rotation_deg * std::numbers::pi / 180.0) * m.rotation.matrix());
    const Vec3 center = m.Center(1.0) +
                        config.init_translation_frac * (m.Center(1.0) - centroid).norm() * direction;
    cam.translation = -(cam.rotation.matrix() * center) / alpha;
    init.cameras.push_back(cam);

    auto drng = MakeRng(config.seed, kDepthStream, c);
    DepthMap d = gt.depths[c];
    for (double& v : d.depth) {
      const double noise = Normal(drng, config.pointmap_noise);
      if (std::isfinite(v)) v *= 1.0 + noise;
    }
    init.depths.push_back(std::move(d));
  }
  for (const PairwiseObservation& p : gt.pairs) {
    PairwiseObservation q = p;
    q.rotation = Rotation3::Identity();
    q.translation.setZero();
    q.sigma = 1.0;
    init.pairs.push_back(std::move(q));
  }
  return out;
}

void WriteSynthScene(const SynthScene& s, const fs::path& dir) {
  SaveScene(s.scene, dir);
  SaveSnapshot(s.ground_truth, s.scene.skeleton, dir / "gt");
  WriteJsonFile(dir / "synth.json", SynthConfigToJson(s.config));
}

std::vector<SynthConfig> SweepConfigs(const SynthConfig& base, const std::string& axis,
                                      const std::vector<double>& values) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  std::vector<SynthConfig> out;
  for (double v : values) {
    SynthConfig c = base;
    if (axis == "humans") {
      c.num_humans = static_cast<int>(std::lround(v));
    } else if (axis == "cameras") {
      c.num_cameras = static_cast<int>(std::lround(v));
    } else if (axis == "noise") {
      c.keypoint_sigma_px = v;
    } else if (axis == "alpha_init") {
      c.init_alpha_multiplier = v;
    } else {
      throw ConfigError("unknown sweep axis: " + axis);
    }
    ValidateSynthConfig(c);
    out.push_back(c);
  }
  return out;
}

std::vector<SweepEntry> WriteSweep(const SynthConfig& base, const std::string& axis,
                                   const std::vector<double>& values,
                                   const fs::path& out_dir) {
  const std::vector<SynthConfig> configs = SweepConfigs(base, axis, values);
  std::vector<SweepEntry> entries(configs.size());
  for (std::size_t k = 0; k < configs.size(); ++k) {
    char name[64];
    std::snprintf(name, sizeof(name), "%s_%g", axis.c_str(), values[k]);
    entries[k] = {axis, values[k], out_dir / name};
  }
  fs::create_directories(out_dir);
  std::vector<std::string> errors(configs.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t k = 0; k < configs.size(); ++k) {
    try {
      WriteSynthScene(GenerateScene(configs[k]), entries[k].dir);
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  }
  for (std::size_t k = 0; k < errors.size(); ++k) {
    if (!errors[k].empty()) throw ConfigError(entries[k].dir.string() + ": " + errors[k]);
  }
  json manifest = {{"axis", axis}, {"base", SynthConfigToJson(base)}, {"scenes", json::array()}};
  for (const SweepEntry& e : entries) {
    manifest["scenes"].push_back({{"value", e.value}, {"dir", e.dir.filename().string()}});
  }
  WriteJsonFile(out_dir / "sweep.json", manifest);
  return entries;
}

}  // namespace hsfm
