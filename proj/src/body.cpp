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

#include "hsfm/body.hpp"

#include <Eigen/QR>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace hsfm {

void SkeletonTemplate::Finalize() {
  const int n = num_joints();
  if (n == 0) throw ConfigError("skeleton has no joints");
  if (static_cast<int>(rest_directions.size()) != n ||
      static_cast<int>(bone_lengths.size()) != n) {
    throw ConfigError("skeleton arrays disagree on joint count");
  }
  if (shape_basis.rows() != n - 1) {
    throw ConfigError("shape basis must have one row per bone");
  }
  if (joint_names.empty()) {
    for (int k = 0; k < n; ++k) joint_names.push_back("j" + std::to_string(k));
  }
  if (static_cast<int>(joint_names.size()) != n) {
    throw ConfigError("joint_names size mismatch");
  }

  root_ = -1;
  std::vector<std::vector<int>> children(n);
  for (int k = 0; k < n; ++k) {
    const int p = parents[k];
    if (p < 0) {
      if (root_ >= 0) throw ConfigError("skeleton has more than one root");
      root_ = k;
    } else if (p >= n) {
      throw ConfigError("parent index out of range");
    } else {
      children[p].push_back(k);
    }
  }
  if (root_ < 0) throw ConfigError("skeleton has no root");

  order_.clear();
  order_.push_back(root_);
  for (std::size_t i = 0; i < order_.size(); ++i) {
    for (int c : children[order_[i]]) order_.push_back(c);
  }
  if (static_cast<int>(order_.size()) != n) {
    throw ConfigError("skeleton parent links contain a cycle");
  }

  bone_row_.assign(n, -1);
  int row = 0;
  for (int k = 0; k < n; ++k) {
    if (k == root_) continue;
    if (std::abs(rest_directions[k].norm() - 1.0) > 1e-9) {
      throw ConfigError("rest direction of joint " + std::to_string(k) +
                        " is not unit length");
    }
    if (!(bone_lengths[k] > 0.0)) {
      throw ConfigError("bone length must be positive");
    }
    bone_row_[k] = row++;
  }
}

namespace {

// Box-Muller on mt19937_64 so the default basis does not depend on the
// standard library's normal_distribution.
Eigen::MatrixXd PseudoRandomOrthonormal(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&rng] {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
  };
  Eigen::MatrixXd g(rows, cols);
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) {
      const double u1 = uniform();
      const double u2 = uniform();
      g(r, c) = std::sqrt(-2.0 * std::log(u1)) *
                std::cos(2.0 * std::numbers::pi * u2);
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
  return q;
}

}  // namespace

SkeletonTemplate SkeletonTemplate::Default() {
  // Body frame: +x to the person's left, +y forward, +z up.
  const Vec3 up(0, 0, 1), down(0, 0, -1), left(1, 0, 0), right(-1, 0, 0);
  struct Bone {
    const char* name;
    int parent;
    Vec3 dir;
    double length;
  };
  const Bone bones[] = {
      {"pelvis", -1, Vec3::Zero(), 0.0},
      {"right_hip", 0, right, 0.12},
      {"right_knee", 1, down, 0.42},
      {"right_ankle", 2, down, 0.40},
      {"left_hip", 0, left, 0.12},
      {"left_knee", 4, down, 0.42},
      {"left_ankle", 5, down, 0.40},
      {"spine", 0, up, 0.24},
      {"thorax", 7, up, 0.24},
      {"neck", 8, up, 0.10},
      {"head", 9, up, 0.14},
      {"left_shoulder", 8, left, 0.17},
      {"left_elbow", 11, down, 0.28},
      {"left_wrist", 12, down, 0.25},
      {"right_shoulder", 8, right, 0.17},
      {"right_elbow", 14, down, 0.28},
      {"right_wrist", 15, down, 0.25},
  };
  SkeletonTemplate t;
  for (const Bone& b : bones) {
    t.joint_names.emplace_back(b.name);
    t.parents.push_back(b.parent);
    t.rest_directions.push_back(b.dir);
    t.bone_lengths.push_back(b.length);
  }
  t.shape_basis = 0.1 * PseudoRandomOrthonormal(16, 10, 0x5eed5a9eULL);
  t.Finalize();
  return t;
}

nlohmann::json TemplateToJson(const SkeletonTemplate& tmpl) {
  nlohmann::json j;
  j["joint_names"] = tmpl.joint_names;
  j["parents"] = tmpl.parents;
  auto& dirs = j["rest_directions"] = nlohmann::json::array();
  for (const Vec3& d : tmpl.rest_directions) dirs.push_back({d.x(), d.y(), d.z()});
  j["bone_lengths"] = tmpl.bone_lengths;
  auto& basis = j["shape_basis"] = nlohmann::json::array();
  for (Eigen::Index r = 0; r < tmpl.shape_basis.rows(); ++r) {
    std::vector<double> row(tmpl.shape_basis.cols());
    for (Eigen::Index c = 0; c < tmpl.shape_basis.cols(); ++c) {
      row[c] = tmpl.shape_basis(r, c);
    }
    basis.push_back(row);
  }
  return j;
}

SkeletonTemplate TemplateFromJson(const nlohmann::json& j) {
  SkeletonTemplate t;
  try {
    t.joint_names = j.value("joint_names", std::vector<std::string>{});
    t.parents = j.at("parents").get<std::vector<int>>();
    for (const auto& d : j.at("rest_directions")) {
      t.rest_directions.emplace_back(d.at(0).get<double>(), d.at(1).get<double>(),
                                     d.at(2).get<double>());
    }
    t.bone_lengths = j.at("bone_lengths").get<std::vector<double>>();
    const auto& basis = j.at("shape_basis");
    const int rows = static_cast<int>(basis.size());
    const int cols = rows > 0 ? static_cast<int>(basis.at(0).size()) : 0;
    t.shape_basis.resize(rows, cols);
    for (int r = 0; r < rows; ++r) {
      if (static_cast<int>(basis.at(r).size()) != cols) {
        throw ParseError("ragged shape_basis");
      }
      for (int c = 0; c < cols; ++c) t.shape_basis(r, c) = basis.at(r).at(c).get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("skeleton template: ") + e.what());
  }
  try {
    t.Finalize();
  } catch (const ConfigError& e) {
    throw ParseError(std::string("skeleton template: ") + e.what());
  }
  return t;
}

HumanParams HumanParams::Rest(const SkeletonTemplate& tmpl, int id) {
  HumanParams h;
  h.id = id;
  h.theta.assign(tmpl.num_joints(), Rotation3::Identity());
  h.beta = Eigen::VectorXd::Zero(tmpl.num_betas());
  return h;
}

KinematicState ForwardKinematicsWithFrames(const HumanParams& params,
                                           const SkeletonTemplate& tmpl) {
  const int n = tmpl.num_joints();
  KinematicState s;
  s.joints.resize(3, n);
  s.frames.resize(n);
  s.lengths = Eigen::VectorXd::Zero(n);
  const Eigen::VectorXd log_scale = tmpl.shape_basis * params.beta;
  for (int k : tmpl.order()) {
    const int p = tmpl.parents[k];
    if (p < 0) {
      s.frames[k] = params.phi.matrix() * params.theta[k].matrix();
      s.joints.col(k) = params.gamma;
      continue;
    }
    s.lengths(k) = tmpl.bone_lengths[k] * std::exp(log_scale(tmpl.bone_row(k)));
    s.frames[k] = s.frames[p] * params.theta[k].matrix();
    s.joints.col(k) =
        s.joints.col(p) + s.frames[p] * (tmpl.rest_directions[k] * s.lengths(k));
  }
  return s;
}

void HumanGradient::SetZero(const SkeletonTemplate& tmpl) {
  phi.setZero();
  theta.assign(tmpl.num_joints(), Vec3::Zero());
  beta = Eigen::VectorXd::Zero(tmpl.num_betas());
  gamma.setZero();
}

HumanGradient& HumanGradient::operator+=(const HumanGradient& other) {
  phi += other.phi;
  for (std::size_t k = 0; k < theta.size(); ++k) theta[k] += other.theta[k];
  beta += other.beta;
  gamma += other.gamma;
  return *this;
}

HumanGradient BackpropJoints(const HumanParams& params,
                             const SkeletonTemplate& tmpl,
                             const KinematicState& state,
                             const Points3& joint_grads) {
  const int n = tmpl.num_joints();
  // Subtree sums of G_k and joint_k x G_k, accumulated leaves-first.
  Points3 sub_g = joint_grads;
  Points3 sub_m(3, n);
  for (int k = 0; k < n; ++k) {
    sub_m.col(k) = state.joints.col(k).cross(joint_grads.col(k));
  }
  const auto& order = tmpl.order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int p = tmpl.parents[*it];
    if (p >= 0) {
      sub_g.col(p) += sub_g.col(*it);
      sub_m.col(p) += sub_m.col(*it);
    }
  }

  HumanGradient g;
  g.SetZero(tmpl);
  const int root = tmpl.root();
  g.gamma = sub_g.col(root);
  g.phi = sub_m.col(root) - params.gamma.cross(sub_g.col(root));
  Eigen::VectorXd length_grad = Eigen::VectorXd::Zero(n - 1);
  for (int k = 0; k < n; ++k) {
    const int p = tmpl.parents[k];
    const Mat3& parent_frame = p < 0 ? params.phi.matrix() : state.frames[p];
    const Vec3 moment =
        sub_m.col(k) - Vec3(state.joints.col(k)).cross(Vec3(sub_g.col(k)));
    g.theta[k] = parent_frame.transpose() * moment;
    if (p >= 0) {
      const Vec3 bone = state.frames[p] * (tmpl.rest_directions[k] * state.lengths(k));
      length_grad(tmpl.bone_row(k)) = sub_g.col(k).dot(bone);
    }
  }
  g.beta = tmpl.shape_basis.transpose() * length_grad;
  return g;
}

double MeanBoneLength3d(const Points3& joints, const SkeletonTemplate& tmpl) {
  double sum = 0.0;
  int count = 0;
  for (int k = 0; k < tmpl.num_joints(); ++k) {
    const int p = tmpl.parents[k];
    if (p < 0) continue;
    sum += (joints.col(k) - joints.col(p)).norm();
    ++count;
  }
  return count > 0 ? sum / count : 0.0;
}

}  // namespace hsfm
