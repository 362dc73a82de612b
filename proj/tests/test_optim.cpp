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

#include <gtest/gtest.h>

#include <cstring>

#include "hsfm/metrics.hpp"
#include "hsfm/pipeline.hpp"
#include "hsfm/synth.hpp"

namespace hsfm {
namespace {

SynthConfig SmallConfig(std::uint64_t seed, bool noisy) {
  SynthConfig c;
  c.num_cameras = 3;
  c.num_humans = 2;
  c.grid_stride = 32;
  c.init_rotation_deg = 5.0;
  c.init_translation_frac = 0.1;
  c.init_alpha_multiplier = 2.0;
  if (noisy) {
    c.keypoint_sigma_px = 2.0;
    c.pointmap_noise = 0.02;
    c.pair_scale_drift = 0.1;
  }
  c.seed = seed;
  return c;
}

bool SameBits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

struct Fixture {
  SynthScene synth;
  InitResult init;
  LossFunction loss;

  explicit Fixture(const SynthConfig& c)
      : synth(GenerateScene(c)),
        init(InitializeWorld(synth.scene)),
        loss(synth.scene.skeleton, synth.scene.keypoints, c.num_cameras, c.num_humans) {}
};

TEST(Config, JsonRoundTripAndValidation) {
  OptimConfig c;
  c.lambda = 2.5;
  c.fixed_steps = 7;
  c.gradient_mode = GradientMode::kFiniteDifference;
  const OptimConfig d = OptimConfigFromJson(OptimConfigToJson(c));
  EXPECT_EQ(d.lambda, 2.5);
  EXPECT_EQ(d.fixed_steps, 7);
  EXPECT_EQ(d.gradient_mode, GradientMode::kFiniteDifference);
  EXPECT_EQ(OptimConfigFromJson(nlohmann::json::object()).lr, 0.015);
  EXPECT_THROW(OptimConfigFromJson({{"learning_rate", 0.1}}), ConfigError);
  EXPECT_THROW(OptimConfigFromJson({{"lr", -1.0}}), ConfigError);
  EXPECT_THROW(OptimConfigFromJson({{"lr", "fast"}}), ConfigError);
  EXPECT_THROW(OptimConfigFromJson({{"gradient_mode", "dual"}}), ConfigError);
}

TEST(StepBudget, ProportionalToSceneScale) {
  WorldState s;
  for (int c = 0; c < 2; ++c) {
    CameraModel cam;
    cam.translation = Vec3(c == 0 ? -3.0 : 3.0, 0, 0);
    s.cameras.push_back(cam);
  }
  OptimConfig c;
  EXPECT_EQ(StepBudget(s, c), 500);
  s.alpha = 2.5;
  EXPECT_EQ(StepBudget(s, c), 750);
  c.fixed_steps = 3;
  EXPECT_EQ(StepBudget(s, c), 3);
}

TEST(Layout, ZeroDeltaIsBitIdentical) {
  Fixture f(SmallConfig(1, true));
  const ParameterLayout layout(f.init.state, f.synth.scene.skeleton);
  WorldState s = f.init.state;
  layout.Apply(Eigen::VectorXd::Zero(layout.size()), &s);
  EXPECT_EQ(s.alpha, f.init.state.alpha);
  for (std::size_t c = 0; c < s.cameras.size(); ++c) {
    EXPECT_EQ(s.cameras[c].rotation.matrix(), f.init.state.cameras[c].rotation.matrix());
    EXPECT_EQ(s.cameras[c].translation, f.init.state.cameras[c].translation);
    EXPECT_TRUE(SameBits(s.depths[c].depth, f.init.state.depths[c].depth));
  }
}

TEST(FixScaleGauge, RestoresDepthUnitsAndKeepsLoss) {
  Fixture f(SmallConfig(10, true));
  WorldState moved = f.init.state;
  const double k = 1.37;
  moved.alpha /= k;
  for (CameraModel& c : moved.cameras) c.translation *= k;
  for (DepthMap& d : moved.depths) {
    for (double& v : d.depth) v *= k;
  }
  const LossBreakdown before = f.loss.Evaluate(moved, {}, nullptr);
  EXPECT_NEAR(FixScaleGauge(f.init.state, &moved), k, 1e-12);
  EXPECT_NEAR(moved.alpha, f.init.state.alpha, 1e-12 * f.init.state.alpha);
  const LossBreakdown after = f.loss.Evaluate(moved, {}, nullptr);
  EXPECT_NEAR(after.total, before.total, 1e-12 * before.total);
  for (std::size_t c = 0; c < moved.cameras.size(); ++c) {
    EXPECT_LT((moved.cameras[c].Center(moved.alpha) -
               f.init.state.cameras[c].Center(f.init.state.alpha)).norm(), 1e-12);
  }
  EXPECT_EQ(FixScaleGauge(f.init.state, &moved), 1.0);
}

TEST(RunHsfm, StageOneTouchesOnlyAlphaGammaBeta) {
  Fixture f(SmallConfig(2, true));
  OptimConfig c;
  c.run_stage2 = false;
  c.fixed_steps = 50;
  const OptimResult r = RunHsfm(f.init.state, f.loss, c);
  const WorldState& a = f.init.state;
  const WorldState& b = r.state;
  EXPECT_NE(a.alpha, b.alpha);
  for (std::size_t c2 = 0; c2 < a.cameras.size(); ++c2) {
    EXPECT_EQ(a.cameras[c2].rotation.matrix(), b.cameras[c2].rotation.matrix());
    EXPECT_EQ(a.cameras[c2].translation, b.cameras[c2].translation);
    EXPECT_EQ(a.cameras[c2].intrinsics.fx, b.cameras[c2].intrinsics.fx);
    EXPECT_TRUE(SameBits(a.depths[c2].depth, b.depths[c2].depth));
  }
  for (std::size_t h = 0; h < a.humans.size(); ++h) {
    EXPECT_EQ(a.humans[h].phi.matrix(), b.humans[h].phi.matrix());
    for (std::size_t j = 0; j < a.humans[h].theta.size(); ++j) {
      EXPECT_EQ(a.humans[h].theta[j].matrix(), b.humans[h].theta[j].matrix());
    }
    EXPECT_NE(a.humans[h].gamma, b.humans[h].gamma);
  }
  for (std::size_t e = 0; e < a.pairs.size(); ++e) {
    EXPECT_EQ(a.pairs[e].sigma, b.pairs[e].sigma);
    EXPECT_EQ(a.pairs[e].translation, b.pairs[e].translation);
  }
}

TEST(RunHsfm, DescendsAndTraceIsWellFormed) {
  Fixture f(SmallConfig(3, true));
  const OptimResult r = RunHsfm(f.init.state, f.loss, {});
  ASSERT_EQ(static_cast<int>(r.trace.size()), r.stage1_steps + r.stage2_steps + 1);
  EXPECT_GE(r.stage1_steps, 500);
  EXPECT_LT(r.trace[r.stage1_steps - 1].total, r.trace[0].total);
  EXPECT_LT(r.trace.back().total, r.trace[r.stage1_steps].total);
  EXPECT_EQ(r.trace.back().lr, 0.0);
  EXPECT_DOUBLE_EQ(r.trace[0].lr, 0.015);
  EXPECT_EQ(r.trace[r.stage1_steps].stage, 2);
  for (std::size_t i = 0; i < r.trace.size(); ++i) EXPECT_EQ(r.trace[i].step, static_cast<int>(i));
  const std::string csv = TraceToCsv(r.trace);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "step,L_humans,L_places,total,lr");
}

TEST(RunHsfm, NoiselessRecoveryAndReprojection) {
  Fixture f(SmallConfig(4, false));
  const OptimResult r = RunHsfm(f.init.state, f.loss, {});
  const EvalReport e = Evaluate(r.state, f.synth.ground_truth, f.synth.scene.skeleton);
  EXPECT_LT(e.w_mpjpe, 0.01 * e.cameras.scene_scale);
  EXPECT_LT(e.cameras.te, 0.01 * e.cameras.scene_scale);
  for (const KeypointObservation& k : f.synth.scene.keypoints) {
    const Points3 j = ForwardKinematics(r.state.humans[k.human_id], f.synth.scene.skeleton);
    for (int i = 0; i < j.cols(); ++i) {
      const Vec2 px = Project(j.col(i), r.state.cameras[k.camera_id], r.state.alpha).pixel;
      EXPECT_LT((px - k.joints.col(i)).norm(), 0.1);
    }
  }
}

TEST(RunHsfm, ThreadCountDoesNotChangeTrace) {
  Fixture f(SmallConfig(5, true));
  OptimConfig c;
  c.fixed_steps = 60;
  c.num_threads = 1;
  const std::string a = TraceToCsv(RunHsfm(f.init.state, f.loss, c).trace);
  c.num_threads = 4;
  const std::string b = TraceToCsv(RunHsfm(f.init.state, f.loss, c).trace);
  EXPECT_EQ(a, b);
}

TEST(RunHsfm, ScaleCoupling) {
  const SynthConfig cfg = SmallConfig(6, true);
  Fixture f(cfg);
  Scene scaled = f.synth.scene;
  const double k = 2.0;
  for (CameraModel& c : scaled.state.cameras) c.translation *= k;
  for (DepthMap& d : scaled.state.depths) {
    for (double& v : d.depth) v *= k;
  }
  for (PairwiseObservation& p : scaled.state.pairs) {
    for (Vec3& x : p.points_i) x *= k;
    for (Vec3& x : p.points_j) x *= k;
  }
  const PipelineResult a = ReconstructScene(f.synth.scene, {}, {});
  const PipelineResult b = ReconstructScene(scaled, {}, {});
  EXPECT_NEAR(b.init.report.alpha_hat * k, a.init.report.alpha_hat, 1e-12 * a.init.report.alpha_hat);
  EXPECT_NEAR(b.optim.state.alpha * k, a.optim.state.alpha, 1e-6 * a.optim.state.alpha);
  for (std::size_t c = 0; c < a.optim.state.cameras.size(); ++c) {
    EXPECT_LT((a.optim.state.cameras[c].Center(a.optim.state.alpha) -
               b.optim.state.cameras[c].Center(b.optim.state.alpha)).norm(), 1e-6);
  }
  for (std::size_t h = 0; h < a.optim.state.humans.size(); ++h) {
    const Points3 ja = ForwardKinematics(a.optim.state.humans[h], f.synth.scene.skeleton);
    const Points3 jb = ForwardKinematics(b.optim.state.humans[h], f.synth.scene.skeleton);
    EXPECT_LT((ja - jb).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(RunHsfm, LargeLambdaLowersPlacesResidual) {
  Fixture f(SmallConfig(7, true));
  const OptimResult balanced = RunHsfm(f.init.state, f.loss, {});
  OptimConfig heavy;
  heavy.lambda = 1e6;
  const OptimResult r = RunHsfm(f.init.state, f.loss, heavy);
  EXPECT_LE(r.trace.back().places, balanced.trace.back().places);
}

TEST(RunHsfm, FiniteDifferenceModeFollowsAnalytic) {
  SynthConfig cfg = SmallConfig(8, true);
  cfg.grid_stride = 160;
  Fixture f(cfg);
  OptimConfig c;
  c.fixed_steps = 3;
  const OptimResult a = RunHsfm(f.init.state, f.loss, c);
  c.gradient_mode = GradientMode::kFiniteDifference;
  const OptimResult b = RunHsfm(f.init.state, f.loss, c);
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    EXPECT_NEAR(a.trace[i].total, b.trace[i].total, 1e-6 * a.trace[i].total);
  }
  c.detach_human_grads = true;
  EXPECT_THROW(RunHsfm(f.init.state, f.loss, c), ConfigError);
}

TEST(RunHsfm, BlowUpThrowsAfterRetry) {
  Fixture f(SmallConfig(9, true));
  OptimConfig c;
  c.lr = 1e4;
  c.fixed_steps = 20;
  try {
    RunHsfm(f.init.state, f.loss, c);
    FAIL() << "expected a divergence error";
  } catch (const Diverged&) {
  } catch (const NonFiniteGradient&) {
  }
}

TEST(Pipeline, ParseAlphaInit) {
  InitOptions o;
  ParseAlphaInit("one", &o);
  EXPECT_EQ(o.alpha_init, AlphaInit::kOne);
  ParseAlphaInit("fixed:2.5", &o);
  EXPECT_EQ(o.alpha_init, AlphaInit::kFixed);
  EXPECT_EQ(o.alpha_fixed, 2.5);
  ParseAlphaInit("human", &o);
  EXPECT_EQ(o.alpha_init, AlphaInit::kHuman);
  EXPECT_THROW(ParseAlphaInit("fixed:", &o), ConfigError);
  EXPECT_THROW(ParseAlphaInit("fixed:-1", &o), ConfigError);
  EXPECT_THROW(ParseAlphaInit("fixed:2x", &o), ConfigError);
  EXPECT_THROW(ParseAlphaInit("metric", &o), ConfigError);
}

}  // namespace
}  // namespace hsfm
