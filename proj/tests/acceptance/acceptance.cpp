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

// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "support/oracles.hpp"
#include "hsfm/metrics.hpp"
#include "hsfm/pipeline.hpp"
#include "hsfm/synth.hpp"

namespace {

using hsfm::EvalReport;
using hsfm::SynthConfig;

constexpr int kSeeds = 20;

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int failures = 0;

void Report(int id, bool pass, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string Format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

SynthConfig CleanConfig() {
  SynthConfig c;
  c.init_rotation_deg = 5.0;
  c.init_translation_frac = 0.10;
  c.init_alpha_multiplier = 2.0;
  return c;
}

SynthConfig NoisyConfig(std::uint64_t seed) {
  SynthConfig c = CleanConfig();
  c.keypoint_sigma_px = 2.0;
  c.pointmap_noise = 0.02;
  c.pair_scale_drift = 0.10;
  c.keypoint_dropout = 0.05;
  c.estimate_rotation_deg = 5.0;
  c.estimate_pose_deg = 5.0;
  c.seed = seed;
  return c;
}

struct Run {
  EvalReport init;
  EvalReport final;
  hsfm::OptimResult optim;
};

Run Reconstruct(const hsfm::SynthScene& s, const hsfm::InitOptions& init_options,
                const hsfm::OptimConfig& config) {
  const hsfm::PipelineResult r = hsfm::ReconstructScene(s.scene, init_options, config);
  Run out;
  out.init = hsfm::Evaluate(r.init.state, s.ground_truth, s.scene.skeleton);
  out.final = hsfm::Evaluate(r.optim.state, s.ground_truth, s.scene.skeleton);
  out.optim = r.optim;
  return out;
}

// --- 1 ------------------------------------------------------------------------

void OracleZero() {
  const auto start = Clock::now();
  SynthConfig c;
  c.num_cameras = 4;
  c.num_humans = 3;
  const hsfm::SynthScene s = hsfm::GenerateScene(c);
  const hsfm::LossFunction loss(s.scene.skeleton, s.scene.keypoints, c.num_cameras, c.num_humans);
  const hsfm::LossBreakdown b = loss.Evaluate(s.ground_truth, hsfm::LossOptions{}, nullptr);
  const EvalReport r = hsfm::Evaluate(s.ground_truth, s.ground_truth, s.scene.skeleton);
  const auto& m = r.cameras;
  const double worst = std::max({r.w_mpjpe, r.ga_mpjpe.value_or(0.0), r.pa_mpjpe, m.te,
                                 m.s_te.value_or(0.0), m.ae});
  const bool ideal = worst < 1e-9 && m.rra10 == 1.0 && m.rra15 == 1.0 && m.cca10 == 1.0 &&
                     m.cca15 == 1.0 && m.s_cca10 == 1.0 && m.s_cca15 == 1.0;
  const double t = Seconds(start);
  Report(1, b.humans < 1e-10 && b.places < 1e-8 && ideal && t < 10.0,
         Format("L_humans %.3g  L_places %.3g  worst error %.3g (AE in deg)  %.2fs",
                b.humans, b.places, worst, t));
}

// --- 2 ------------------------------------------------------------------------

void ExactRecovery() {
  const auto start = Clock::now();
  const hsfm::SynthScene s = hsfm::GenerateScene(CleanConfig());
  const Run run = Reconstruct(s, {}, {});
  const EvalReport& r = run.final;
  const double scale = r.cameras.scene_scale;
  const double alpha_err = std::abs(r.alpha / r.alpha_gt - 1.0);
  const double t = Seconds(start);
  const bool pass = r.w_mpjpe < 0.01 * scale && r.cameras.te < 0.01 * scale &&
                    r.cameras.ae < 0.5 && alpha_err <= 0.01 && t < 120.0;
  Report(2, pass,
         Format("W-MPJPE %.3g m  TE %.3g m  (1%% of scale %.3g m)  AE %.3g deg  alpha %.5g vs %.5g "
                "(%.2f%%, layout scale %.5f)  %.1fs",
                r.w_mpjpe, r.cameras.te, 0.01 * scale, r.cameras.ae, r.alpha, r.alpha_gt,
                100.0 * alpha_err, r.cameras.scale_ratio, t));
}

// --- 3, 4, 6 --------------------------------------------------------------------

void NoisyRecovery() {
  const auto start = Clock::now();
  std::vector<double> init_w, final_w, init_rra, final_rra;
  std::vector<double> alpha_one_w;
  int places_wins = 0;
  int detach_wins = 0;
  std::vector<double> full_cca, np_cca, detach_w;
  double main_time = 0.0;

  hsfm::OptimConfig no_places;
  no_places.no_places = true;
  hsfm::OptimConfig detach;
  detach.detach_human_grads = true;
  hsfm::InitOptions alpha_one;
  alpha_one.alpha_init = hsfm::AlphaInit::kOne;

  for (int seed = 0; seed < kSeeds; ++seed) {
    const hsfm::SynthScene s = hsfm::GenerateScene(NoisyConfig(seed));
    const auto t0 = Clock::now();
    const Run full = Reconstruct(s, {}, {});
    main_time += Seconds(t0);
    const Run np = Reconstruct(s, {}, no_places);
    const Run dt = Reconstruct(s, {}, detach);
    const Run a1 = Reconstruct(s, alpha_one, {});

    init_w.push_back(full.init.w_mpjpe);
    final_w.push_back(full.final.w_mpjpe);
    init_rra.push_back(full.init.cameras.rra15);
    final_rra.push_back(full.final.cameras.rra15);
    full_cca.push_back(full.final.cameras.cca15);
    np_cca.push_back(np.final.cameras.cca15);
    detach_w.push_back(dt.final.w_mpjpe);
    alpha_one_w.push_back(a1.final.w_mpjpe);
    if (np.final.cameras.cca15 < full.final.cameras.cca15) ++places_wins;
    if (dt.final.w_mpjpe > full.final.w_mpjpe) ++detach_wins;
    std::printf("  seed %2d  W init %.4f full %.4f no-places %.4f detach %.4f alpha=1 %.4f  "
                "CCA@15 full %.2f no-places %.2f  TE full %.4f no-places %.4f\n",
                seed, full.init.w_mpjpe, full.final.w_mpjpe, np.final.w_mpjpe,
                dt.final.w_mpjpe, a1.final.w_mpjpe, full.final.cameras.cca15,
                np.final.cameras.cca15, full.final.cameras.te, np.final.cameras.te);
    std::fflush(stdout);
  }

  const double mi = Median(init_w);
  const double mf = Median(final_w);
  const double ri = Median(init_rra);
  const double rf = Median(final_rra);
  Report(3, mf <= 0.5 * mi && rf >= ri && main_time < 1800.0,
         Format("median W-MPJPE init %.4f -> final %.4f m (ratio %.3f)  median RRA@15 %.3f -> %.3f  "
                "%.0fs over %d seeds",
                mi, mf, mf / mi, ri, rf, main_time, kSeeds));
  Report(4, places_wins >= 15 && detach_wins >= 15,
         Format("(a) no-places CCA@15 worse in %d/%d seeds (median %.3f vs full %.3f)  "
                "(b) detach W-MPJPE worse in %d/%d seeds (median %.4f vs full %.4f m)",
                places_wins, kSeeds, Median(np_cca), Median(full_cca), detach_wins, kSeeds,
                Median(detach_w), mf));
  const double ma = Median(alpha_one_w);
  Report(6, ma >= 3.0 * mf,
         Format("median W-MPJPE alpha=1 %.4f m vs human-centric %.4f m (ratio %.2f)", ma, mf,
                ma / mf));
  std::printf("  noisy block total %.0fs\n", Seconds(start));
}

// --- 5 ------------------------------------------------------------------------

struct KendallResult {
  double tau = 0.0;
  double p_decreasing = 1.0;  // one-sided
};

// Kendall tau-b of (x, y) with the normal approximation for S; ties in x only.
KendallResult Kendall(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double s = 0.0;
  double tied_x = 0.0;
  double tied_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0.0) ++tied_x;
      if (dy == 0.0) ++tied_y;
      if (dx != 0.0 && dy != 0.0) s += (dx * dy > 0.0) ? 1.0 : -1.0;
    }
  }
  const double pairs = n * (n - 1) / 2.0;
  KendallResult k;
  k.tau = s / std::sqrt((pairs - tied_x) * (pairs - tied_y));
  std::vector<double> sorted = x;
  std::sort(sorted.begin(), sorted.end());
  double var = n * (n - 1.0) * (2.0 * n + 5.0);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    var -= t * (t - 1.0) * (2.0 * t + 5.0);
    i = j;
  }
  var /= 18.0;
  const double z = (s + 1.0) / std::sqrt(var);
  k.p_decreasing = 0.5 * std::erfc(-z / std::sqrt(2.0));
  return k;
}

void HumanSweep() {
  const auto start = Clock::now();
  std::vector<double> hs;
  std::vector<double> tes;
  std::vector<double> medians;
  for (int h = 1; h <= 4; ++h) {
    std::vector<double> te;
    for (int seed = 0; seed < kSeeds; ++seed) {
      SynthConfig c = NoisyConfig(seed);
      c.num_humans = h;
      const Run run = Reconstruct(hsfm::GenerateScene(c), {}, {});
      te.push_back(run.final.cameras.te);
      hs.push_back(h);
      tes.push_back(run.final.cameras.te);
    }
    medians.push_back(Median(te));
    std::printf("  H=%d  median TE %.4f m\n", h, medians.back());
    std::fflush(stdout);
  }
  bool non_increasing = true;
  for (std::size_t i = 1; i < medians.size(); ++i) non_increasing &= medians[i] <= medians[i - 1];
  const KendallResult k = Kendall(hs, tes);
  Report(5, non_increasing && k.tau < 0.0 && k.p_decreasing < 0.05,
         Format("median TE H=1..4: %.4f %.4f %.4f %.4f m  Kendall tau %.3f (one-sided p %.2g)  %.0fs",
                medians[0], medians[1], medians[2], medians[3], k.tau, k.p_decreasing,
                Seconds(start)));
}

// --- 7 ------------------------------------------------------------------------

void GradientCheck() {
  const auto start = Clock::now();
  SynthConfig c = NoisyConfig(7);
  c.num_cameras = 3;
  c.num_humans = 2;
  c.grid_stride = 80;
  c.beta_sigma = 0.5;
  const hsfm::SynthScene s = hsfm::GenerateScene(c);
  const hsfm::LossFunction loss(s.scene.skeleton, s.scene.keypoints, c.num_cameras, c.num_humans);
  const hsfm::ParameterLayout layout(s.ground_truth, s.scene.skeleton);

  const int B = s.scene.skeleton.num_betas();
  const int J = s.scene.skeleton.num_joints();
  const int H = c.num_humans;
  const int C = c.num_cameras;
  const int P = s.ground_truth.grid.size();
  const int E = static_cast<int>(s.ground_truth.pairs.size());
  enum Class { kAlpha, kGamma, kBeta, kPhi, kTheta, kR, kT, kK, kD, kPose, kSigma, kCount };
  const char* names[kCount] = {"alpha", "gamma", "beta", "phi", "theta", "R", "t", "K", "D", "P", "sigma"};
  std::vector<int> cls(layout.size());
  int k = 0;
  cls[k++] = kAlpha;
  for (int h = 0; h < H; ++h) {
    for (int i = 0; i < 3; ++i) cls[k++] = kGamma;
    for (int i = 0; i < B; ++i) cls[k++] = kBeta;
    for (int i = 0; i < 3; ++i) cls[k++] = kPhi;
    for (int i = 0; i < 3 * J; ++i) cls[k++] = kTheta;
  }
  for (int cam = 0; cam < C; ++cam) {
    for (int i = 0; i < 3; ++i) cls[k++] = kR;
    for (int i = 0; i < 3; ++i) cls[k++] = kT;
    cls[k++] = kK;
  }
  for (int i = 0; i < C * P; ++i) cls[k++] = kD;
  for (int e = 0; e < E; ++e) {
    for (int i = 0; i < 3; ++i) cls[k++] = kPose;
    for (int i = 0; i < 3; ++i) cls[k++] = kPose;
    cls[k++] = kSigma;
  }
  bool layout_ok = k == layout.size();

  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal(0.0, 0.05);
  double worst[kCount] = {};
  bool covered[kCount] = {};
  for (int trial = 0; trial < 50 && layout_ok; ++trial) {
    hsfm::WorldState state = s.ground_truth;
    Eigen::VectorXd delta(layout.size());
    for (int i = 0; i < layout.size(); ++i) delta(i) = normal(rng);
    layout.Apply(delta, &state);
    hsfm::LossOptions options;
    options.lambda = 0.7;
    hsfm::StateGradient grad;
    loss.Evaluate(state, options, &grad);
    const Eigen::VectorXd analytic = layout.Flatten(grad);
    const Eigen::VectorXd numeric = hsfm::FiniteDifferenceGradient(loss, state, options, layout, 1e-6);
    for (int cl = 0; cl < kCount; ++cl) {
      double diff = 0.0;
      double norm_a = 0.0;
      double norm_n = 0.0;
      for (int i = 0; i < layout.size(); ++i) {
        if (cls[i] != cl) continue;
        diff += (analytic(i) - numeric(i)) * (analytic(i) - numeric(i));
        norm_a += analytic(i) * analytic(i);
        norm_n += numeric(i) * numeric(i);
      }
      const double denom = std::sqrt(std::max(norm_a, norm_n));
      if (denom > 1e-10) {
        covered[cl] = true;
        worst[cl] = std::max(worst[cl], std::sqrt(diff) / denom);
      } else if (diff > 1e-20) {
        worst[cl] = 1.0;
      }
    }
  }
  bool pass = layout_ok;
  std::string detail;
  for (int cl = 0; cl < kCount; ++cl) {
    pass &= covered[cl] && worst[cl] < 1e-4;
    detail += Format("%s %.1e%s  ", names[cl], worst[cl], covered[cl] ? "" : " (not covered)");
  }
  Report(7, pass, "worst relative error over 50 states: " + detail + Format("%.0fs", Seconds(start)));
}

// --- 8 ------------------------------------------------------------------------

void MetricOracle() {
  std::mt19937_64 rng(8080);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  auto random_rotation = [&](double deg) {
    Eigen::Vector3d axis(normal(rng), normal(rng), normal(rng));
    axis.normalize();
    return Eigen::AngleAxisd(deg * M_PI / 180.0 * uni(rng), axis).toRotationMatrix();
  };
  double worst = 0.0;
  int chain_violations = 0;
  for (int scene = 0; scene < 200; ++scene) {
    const int C = 3 + scene % 6;
    const int H = 2 + scene % 3;
    const double noise = 0.01 + 0.2 * uni(rng);
    std::vector<Eigen::Matrix3d> gt_rot(C), pred_rot(C);
    Eigen::Matrix3Xd gt_c(3, C), pred_c(3, C);
    // The prediction lives in an arbitrary frame: rigid motion, then noise.
    const Eigen::Matrix3d frame_r = random_rotation(180.0);
    const Eigen::Vector3d frame_t(normal(rng), normal(rng), normal(rng));
    const double layout = 0.8 + 0.4 * uni(rng);
    for (int c = 0; c < C; ++c) {
      const double a = 2.0 * M_PI * c / C;
      gt_c.col(c) = Eigen::Vector3d(5 * std::cos(a), 5 * std::sin(a), 2) +
                    0.5 * Eigen::Vector3d(normal(rng), normal(rng), normal(rng));
      gt_rot[c] = random_rotation(180.0);
      pred_rot[c] = random_rotation(20.0 * noise / 0.2) * gt_rot[c] * frame_r.transpose();
      pred_c.col(c) = frame_r * (layout * gt_c.col(c)) + frame_t +
                      5.0 * noise * Eigen::Vector3d(normal(rng), normal(rng), normal(rng));
    }
    std::vector<Eigen::Matrix3Xd> gt_j(H), pred_j(H);
    for (int h = 0; h < H; ++h) {
      gt_j[h].resize(3, 17);
      pred_j[h].resize(3, 17);
      const Eigen::Vector3d root(2 * normal(rng), 2 * normal(rng), 0);
      for (int j = 0; j < 17; ++j) {
        gt_j[h].col(j) = root + 0.4 * Eigen::Vector3d(normal(rng), normal(rng), 2 * uni(rng));
        pred_j[h].col(j) = frame_r * (layout * gt_j[h].col(j)) + frame_t +
                           noise * Eigen::Vector3d(normal(rng), normal(rng), normal(rng));
      }
    }

    const hsfm::oracle::Metrics o =
        hsfm::oracle::Evaluate(pred_j, gt_j, pred_rot, pred_c, gt_rot, gt_c);
    bool degenerate = false;
    const double w = hsfm::WMpjpe(pred_j, gt_j, pred_c, gt_c, true, &degenerate);
    const double ga = hsfm::GaMpjpe(pred_j, gt_j).value();
    const double pa = hsfm::PaMpjpe(pred_j, gt_j);
    const hsfm::CameraMetrics m = hsfm::EvaluateCameras(pred_rot, pred_c, gt_rot, gt_c);
    const double diffs[] = {w - o.w, ga - o.ga, pa - o.pa, m.te - o.te, *m.s_te - o.s_te,
                            m.ae - o.ae, m.rra10 - o.rra10, m.rra15 - o.rra15,
                            m.cca10 - o.cca10, m.cca15 - o.cca15, *m.s_cca10 - o.s_cca10,
                            *m.s_cca15 - o.s_cca15};
    for (double d : diffs) worst = std::max(worst, std::abs(d));
    if (!(pa <= ga && ga <= w && *m.s_te <= m.te)) ++chain_violations;
  }
  Report(8, worst < 1e-7 && chain_violations == 0,
         Format("max |library - oracle| %.2e over 200 scenes  chain violations %d", worst,
                chain_violations));
}

// --- 9 ------------------------------------------------------------------------

void Determinism() {
  const hsfm::SynthScene s = hsfm::GenerateScene(NoisyConfig(3));
  hsfm::OptimConfig one;
  one.num_threads = 1;
  hsfm::OptimConfig many;
  many.num_threads = 4;
  const std::string a = hsfm::TraceToCsv(hsfm::ReconstructScene(s.scene, {}, one).optim.trace);
  const std::string b = hsfm::TraceToCsv(hsfm::ReconstructScene(s.scene, {}, many).optim.trace);
  Report(9, a == b, Format("trace CSV 1 thread vs 4 threads: %s (%zu bytes)",
                           a == b ? "identical" : "different", a.size()));
}

}  // namespace

int main() {
  const auto start = Clock::now();
  const std::vector<std::function<void()>> blocks = {OracleZero, ExactRecovery, GradientCheck,
                                                     MetricOracle, Determinism, NoisyRecovery,
                                                     HumanSweep};
  for (const auto& block : blocks) {
    try {
      block();
    } catch (const std::exception& e) {
      std::printf("error: %s\n", e.what());
      ++failures;
    }
  }
  std::printf("%d failing, %.0fs total\n", failures, Seconds(start));
  return failures == 0 ? 0 : 1;
}
