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

#include "hsfm/metrics.hpp"

#include <cmath>
#include <cstdio>

namespace hsfm {

namespace {

Points3 Concatenate(const std::vector<Points3>& parts) {
  Eigen::Index n = 0;
  for (const Points3& p : parts) n += p.cols();
  Points3 out(3, n);
  Eigen::Index k = 0;
  for (const Points3& p : parts) {
    out.middleCols(k, p.cols()) = p;
    k += p.cols();
  }
  return out;
}

double MeanError(const Points3& a, const Points3& b) {
  if (a.cols() == 0) return 0.0;
  return (a - b).colwise().norm().mean();
}

void CheckHumans(const std::vector<Points3>& pred, const std::vector<Points3>& gt) {
  if (pred.size() != gt.size()) throw SchemaMismatch("human count differs between prediction and ground truth");
  for (std::size_t h = 0; h < pred.size(); ++h) {
    if (pred[h].cols() != gt[h].cols()) throw SchemaMismatch("joint count differs between prediction and ground truth");
  }
}

}  // namespace

double WMpjpe(const std::vector<Points3>& pred_joints,
              const std::vector<Points3>& gt_joints, const Points3& pred_centers,
              const Points3& gt_centers, bool pool_joints, bool* degenerate,
              std::vector<double>* per_human) {
  CheckHumans(pred_joints, gt_joints);
  const AlignmentResult align =
      UmeyamaAlignBestEffort(pred_centers, gt_centers, /*with_scale=*/false);
  if (degenerate != nullptr) *degenerate = align.degenerate || pred_centers.cols() < 3;
  std::vector<double> errors;
  double sum = 0.0;
  Eigen::Index count = 0;
  for (std::size_t h = 0; h < pred_joints.size(); ++h) {
    const Points3 aligned = align.transform.Apply(pred_joints[h]);
    const Eigen::VectorXd e = (aligned - gt_joints[h]).colwise().norm().transpose();
    errors.push_back(e.size() ? e.mean() : 0.0);
    sum += e.sum();
    count += e.size();
  }
  if (per_human != nullptr) *per_human = errors;
  if (pool_joints) return count ? sum / count : 0.0;
  double mean = 0.0;
  for (double e : errors) mean += e;
  return errors.empty() ? 0.0 : mean / errors.size();
}

std::optional<double> GaMpjpe(const std::vector<Points3>& pred_joints,
                              const std::vector<Points3>& gt_joints) {
  CheckHumans(pred_joints, gt_joints);
  if (pred_joints.size() < 2) return std::nullopt;
  const Points3 pred = Concatenate(pred_joints);
  const Points3 gt = Concatenate(gt_joints);
  const AlignmentResult align = UmeyamaAlignBestEffort(pred, gt, /*with_scale=*/true);
  return MeanError(align.transform.Apply(pred), gt);
}

double PaMpjpe(const std::vector<Points3>& pred_joints,
               const std::vector<Points3>& gt_joints,
               std::vector<double>* per_human) {
  CheckHumans(pred_joints, gt_joints);
  std::vector<double> errors;
  for (std::size_t h = 0; h < pred_joints.size(); ++h) {
    const AlignmentResult align =
        UmeyamaAlignBestEffort(pred_joints[h], gt_joints[h], /*with_scale=*/true);
    errors.push_back(MeanError(align.transform.Apply(pred_joints[h]), gt_joints[h]));
  }
  if (per_human != nullptr) *per_human = errors;
  double mean = 0.0;
  for (double e : errors) mean += e;
  return errors.empty() ? 0.0 : mean / errors.size();
}

CameraMetrics EvaluateCameras(const std::vector<Mat3>& pred_rotations,
                              const Points3& pred_centers,
                              const std::vector<Mat3>& gt_rotations,
                              const Points3& gt_centers) {
  const int n = static_cast<int>(gt_rotations.size());
  if (static_cast<int>(pred_rotations.size()) != n || pred_centers.cols() != n ||
      gt_centers.cols() != n) {
    throw SchemaMismatch("camera count differs between prediction and ground truth");
  }
  if (n < 2) throw DegenerateConfiguration("camera metrics need at least 2 cameras");
  CameraMetrics m;
  m.degenerate = n < 3;

  const Vec3 centroid = gt_centers.rowwise().mean();
  for (int c = 0; c < n; ++c) {
    m.scene_scale = std::max(m.scene_scale, (gt_centers.col(c) - centroid).norm());
  }

  const AlignmentResult scaled = UmeyamaAlignBestEffort(pred_centers, gt_centers, true);
  if (scaled.transform.scale > 0.0) m.scale_ratio = 1.0 / scaled.transform.scale;

  const AlignmentResult rigid = UmeyamaAlignBestEffort(pred_centers, gt_centers, false);
  const Points3 rigid_centers = rigid.transform.Apply(pred_centers);
  m.center_error.resize(n);
  for (int c = 0; c < n; ++c) m.center_error[c] = (rigid_centers.col(c) - gt_centers.col(c)).norm();

  int cca10 = 0;
  int cca15 = 0;
  for (int c = 0; c < n; ++c) {
    m.te += m.center_error[c];
    if (m.center_error[c] <= 0.10 * m.scene_scale) ++cca10;
    if (m.center_error[c] <= 0.15 * m.scene_scale) ++cca15;
  }
  m.te /= n;
  m.cca10 = static_cast<double>(cca10) / n;
  m.cca15 = static_cast<double>(cca15) / n;

  if (!m.degenerate) {
    const Points3 sim_centers = scaled.transform.Apply(pred_centers);
    m.center_error_sim.resize(n);
    double ste = 0.0;
    int s10 = 0;
    int s15 = 0;
    for (int c = 0; c < n; ++c) {
      const double e = (sim_centers.col(c) - gt_centers.col(c)).norm();
      m.center_error_sim[c] = e;
      ste += e;
      if (e <= 0.10 * m.scene_scale) ++s10;
      if (e <= 0.15 * m.scene_scale) ++s15;
    }
    m.s_te = ste / n;
    m.s_cca10 = static_cast<double>(s10) / n;
    m.s_cca15 = static_cast<double>(s15) / n;
  }

  int pairs = 0;
  int rra10 = 0;
  int rra15 = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Mat3 rel_pred = pred_rotations[i] * pred_rotations[j].transpose();
      const Mat3 rel_gt = gt_rotations[i] * gt_rotations[j].transpose();
      const double angle = RotationAngleDeg(rel_pred * rel_gt.transpose());
      m.ae += angle;
      if (angle <= 10.0) ++rra10;
      if (angle <= 15.0) ++rra15;
      ++pairs;
    }
  }
  m.ae /= pairs;
  m.rra10 = static_cast<double>(rra10) / pairs;
  m.rra15 = static_cast<double>(rra15) / pairs;
  return m;
}

EvalReport Evaluate(const WorldState& pred, const WorldState& gt,
                    const SkeletonTemplate& tmpl, bool pool_joints) {
  if (pred.cameras.size() != gt.cameras.size()) {
    throw SchemaMismatch("camera count differs between prediction and ground truth");
  }
  if (pred.humans.size() != gt.humans.size()) {
    throw SchemaMismatch("human count differs between prediction and ground truth");
  }
  const int n = static_cast<int>(gt.cameras.size());
  std::vector<Mat3> pred_r(n);
  std::vector<Mat3> gt_r(n);
  Points3 pred_c(3, n);
  Points3 gt_c(3, n);
  for (int c = 0; c < n; ++c) {
    const CameraModel& g = gt.cameras[c];
    const CameraModel& p = pred.cameras[pred.CameraIndex(g.id)];
    gt_r[c] = g.rotation.matrix();
    pred_r[c] = p.rotation.matrix();
    gt_c.col(c) = g.Center(gt.alpha);
    pred_c.col(c) = p.Center(pred.alpha);
  }
  std::vector<Points3> pred_j;
  std::vector<Points3> gt_j;
  for (const HumanParams& g : gt.humans) {
    const int idx = pred.HumanIndex(g.id);
    if (idx < 0) throw SchemaMismatch("human " + std::to_string(g.id) + " missing from prediction");
    gt_j.push_back(ForwardKinematics(g, tmpl));
    pred_j.push_back(ForwardKinematics(pred.humans[idx], tmpl));
  }

  EvalReport r;
  r.alpha = pred.alpha;
  r.alpha_gt = gt.alpha;
  r.w_mpjpe = WMpjpe(pred_j, gt_j, pred_c, gt_c, pool_joints, &r.w_alignment_degenerate,
                     &r.per_human_w);
  r.ga_mpjpe = GaMpjpe(pred_j, gt_j);
  r.pa_mpjpe = PaMpjpe(pred_j, gt_j, &r.per_human_pa);
  r.cameras = EvaluateCameras(pred_r, pred_c, gt_r, gt_c);

  constexpr double kSlack = 1e-12;
  const double ga = r.ga_mpjpe.value_or(r.w_mpjpe);
  r.monotone_chain = r.pa_mpjpe <= ga + kSlack && ga <= r.w_mpjpe + kSlack;
  if (r.cameras.s_te && *r.cameras.s_te > r.cameras.te + kSlack) r.monotone_chain = false;
  return r;
}

namespace {

nlohmann::json Optional(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string Field(const std::optional<double>& v) {
  if (!v) return "";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", *v);
  return buf;
}

}  // namespace

nlohmann::json EvalReportToJson(const EvalReport& r) {
  const CameraMetrics& c = r.cameras;
  return {{"w_mpjpe", r.w_mpjpe},
          {"ga_mpjpe", Optional(r.ga_mpjpe)},
          {"pa_mpjpe", r.pa_mpjpe},
          {"te", c.te},
          {"s_te", Optional(c.s_te)},
          {"ae", c.ae},
          {"rra@10", c.rra10},
          {"rra@15", c.rra15},
          {"cca@10", c.cca10},
          {"cca@15", c.cca15},
          {"s_cca@10", Optional(c.s_cca10)},
          {"s_cca@15", Optional(c.s_cca15)},
          {"scene_scale", c.scene_scale},
          {"scale_ratio", c.scale_ratio},
          {"alpha", r.alpha},
          {"alpha_gt", r.alpha_gt},
          {"camera_alignment_degenerate", c.degenerate || r.w_alignment_degenerate},
          {"monotone_chain", r.monotone_chain},
          {"per_camera", {{"center_error", c.center_error},
                          {"center_error_sim", c.center_error_sim}}},
          {"per_human", {{"w_mpjpe", r.per_human_w}, {"pa_mpjpe", r.per_human_pa}}}};
}

std::string EvalCsvHeader() {
  return "w_mpjpe,ga_mpjpe,pa_mpjpe,te,s_te,ae,rra10,rra15,cca10,cca15,s_cca10,s_cca15,scene_scale,scale_ratio,alpha";
}

std::string EvalCsvRow(const EvalReport& r) {
  const CameraMetrics& c = r.cameras;
  std::string row;
  const std::optional<double> fields[] = {
      r.w_mpjpe, r.ga_mpjpe, r.pa_mpjpe, c.te,      c.s_te,        c.ae,
      c.rra10,   c.rra15,    c.cca10,    c.cca15,   c.s_cca10,     c.s_cca15,
      c.scene_scale, c.scale_ratio, r.alpha};
  for (std::size_t i = 0; i < std::size(fields); ++i) {
    if (i) row += ',';
    row += Field(fields[i]);
  }
  return row;
}

}  // namespace hsfm
