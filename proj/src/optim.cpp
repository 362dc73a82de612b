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

#include "hsfm/optim.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>

namespace hsfm {

// --- config -------------------------------------------------------------------

nlohmann::json OptimConfigToJson(const OptimConfig& c) {
  return {{"lambda", c.lambda},
          {"lr", c.lr},
          {"adam_beta1", c.adam_beta1},
          {"adam_beta2", c.adam_beta2},
          {"adam_epsilon", c.adam_epsilon},
          {"min_steps", c.min_steps},
          {"steps_per_meter", c.steps_per_meter},
          {"fixed_steps", c.fixed_steps},
          {"run_stage1", c.run_stage1},
          {"run_stage2", c.run_stage2},
          {"stage2_alpha", c.stage2_alpha},
          {"optimize_focal", c.optimize_focal},
          {"no_places", c.no_places},
          {"detach_human_grads", c.detach_human_grads},
          {"gradient_mode",
           c.gradient_mode == GradientMode::kAnalytic ? "analytic" : "finite_difference"},
          {"finite_difference_step", c.finite_difference_step},
          {"seed", c.seed},
          {"num_threads", c.num_threads}};
}

OptimConfig OptimConfigFromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("optimizer config must be a JSON object");
  OptimConfig c;
  const std::set<std::string> known = {
      "lambda", "lr", "adam_beta1", "adam_beta2", "adam_epsilon", "min_steps",
      "steps_per_meter", "fixed_steps", "run_stage1", "run_stage2",
      "stage2_alpha", "optimize_focal", "no_places", "detach_human_grads",
      "gradient_mode", "finite_difference_step", "seed", "num_threads"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown optimizer config key: " + key);
  }
  try {
    c.lambda = j.value("lambda", c.lambda);
    c.lr = j.value("lr", c.lr);
    c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
    c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
    c.adam_epsilon = j.value("adam_epsilon", c.adam_epsilon);
    c.min_steps = j.value("min_steps", c.min_steps);
    c.steps_per_meter = j.value("steps_per_meter", c.steps_per_meter);
    c.fixed_steps = j.value("fixed_steps", c.fixed_steps);
    c.run_stage1 = j.value("run_stage1", c.run_stage1);
    c.run_stage2 = j.value("run_stage2", c.run_stage2);
    c.stage2_alpha = j.value("stage2_alpha", c.stage2_alpha);
    c.optimize_focal = j.value("optimize_focal", c.optimize_focal);
    c.no_places = j.value("no_places", c.no_places);
    c.detach_human_grads = j.value("detach_human_grads", c.detach_human_grads);
    c.finite_difference_step = j.value("finite_difference_step", c.finite_difference_step);
    c.seed = j.value("seed", c.seed);
    c.num_threads = j.value("num_threads", c.num_threads);
    const std::string mode = j.value("gradient_mode", std::string("analytic"));
    if (mode == "analytic") {
      c.gradient_mode = GradientMode::kAnalytic;
    } else if (mode == "finite_difference") {
      c.gradient_mode = GradientMode::kFiniteDifference;
    } else {
      throw ConfigError("gradient_mode must be analytic or finite_difference");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("optimizer config: ") + e.what());
  }
  if (!(c.lr > 0.0)) throw ConfigError("lr must be positive");
  if (!(c.lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
  if (c.min_steps < 1 && c.fixed_steps < 1) throw ConfigError("steps must be >= 1");
  if (!(c.finite_difference_step > 0.0)) throw ConfigError("finite_difference_step must be positive");
  return c;
}

double CameraSceneScale(const WorldState& state) {
  if (state.cameras.empty()) return 0.0;
  Vec3 centroid = Vec3::Zero();
  for (const CameraModel& c : state.cameras) centroid += c.Center(state.alpha);
  centroid /= static_cast<double>(state.cameras.size());
  double scale = 0.0;
  for (const CameraModel& c : state.cameras) {
    scale = std::max(scale, (c.Center(state.alpha) - centroid).norm());
  }
  return scale;
}

int StepBudget(const WorldState& state, const OptimConfig& config) {
  if (config.fixed_steps > 0) return config.fixed_steps;
  const double by_scale = std::ceil(config.steps_per_meter * CameraSceneScale(state));
  return std::max(config.min_steps, static_cast<int>(by_scale));
}

// --- parameter layout -----------------------------------------------------------

ParameterLayout::ParameterLayout(const WorldState& reference,
                                 const SkeletonTemplate& tmpl)
    : num_humans_(static_cast<int>(reference.humans.size())),
      num_joints_(tmpl.num_joints()),
      num_betas_(tmpl.num_betas()),
      num_cameras_(static_cast<int>(reference.cameras.size())),
      num_pixels_(reference.grid.size()),
      num_pairs_(static_cast<int>(reference.pairs.size())) {
  const int human_block = 3 + num_betas_ + 3 + 3 * num_joints_;
  size_ = 1 + num_humans_ * human_block + num_cameras_ * 7 +
          num_cameras_ * num_pixels_ + num_pairs_ * 7;

  if (num_cameras_ >= 2) {
    Vec3 centroid = Vec3::Zero();
    for (const CameraModel& c : reference.cameras) centroid += c.Center(1.0);
    centroid /= num_cameras_;
    double sq = 0.0;
    for (const CameraModel& c : reference.cameras) sq += (c.Center(1.0) - centroid).squaredNorm();
    const double rms = std::sqrt(sq / num_cameras_);
    if (rms > 1e-12) camera_scale_ = rms;
  }

  pair_scale_.assign(num_pairs_, 1.0);
  for (int e = 0; e < num_pairs_; ++e) {
    const PairwiseObservation& p = reference.pairs[e];
    double sum = 0.0;
    int n = 0;
    for (int side = 0; side < 2; ++side) {
      const auto& pts = side == 0 ? p.points_i : p.points_j;
      const auto& conf = side == 0 ? p.confidence_i : p.confidence_j;
      for (std::size_t k = 0; k < pts.size(); ++k) {
        if (conf[k] < kMinPointmapConfidence || !pts[k].allFinite()) continue;
        sum += pts[k].norm();
        ++n;
      }
    }
    if (n > 0 && sum > 0.0) pair_scale_[e] = sum / n;
  }
}

Eigen::VectorXd ParameterLayout::Flatten(const StateGradient& g) const {
  Eigen::VectorXd out(size_);
  int k = 0;
  out(k++) = g.log_alpha;
  for (int h = 0; h < num_humans_; ++h) {
    const HumanGradient& hg = g.humans[h];
    out.segment<3>(k) = hg.gamma;
    k += 3;
    out.segment(k, num_betas_) = hg.beta;
    k += num_betas_;
    out.segment<3>(k) = hg.phi;
    k += 3;
    for (int j = 0; j < num_joints_; ++j) {
      out.segment<3>(k) = hg.theta[j];
      k += 3;
    }
  }
  for (int c = 0; c < num_cameras_; ++c) {
    out.segment<3>(k) = g.cameras[c].rotation;
    out.segment<3>(k + 3) = g.cameras[c].translation * camera_scale_;
    out(k + 6) = g.cameras[c].log_focal;
    k += 7;
  }
  for (int c = 0; c < num_cameras_; ++c) {
    out.segment(k, num_pixels_) = g.log_depth[c];
    k += num_pixels_;
  }
  for (int e = 0; e < num_pairs_; ++e) {
    out.segment<3>(k) = g.pairs[e].rotation;
    out.segment<3>(k + 3) = g.pairs[e].translation * pair_scale_[e];
    out(k + 6) = g.pairs[e].log_sigma;
    k += 7;
  }
  return out;
}

namespace {

void RetractIfMoved(const Vec3& delta, Rotation3* r) {
  if (delta.x() != 0.0 || delta.y() != 0.0 || delta.z() != 0.0) r->Retract(delta);
}

void ScaleIfMoved(double delta, double* value) {
  if (delta != 0.0) *value *= std::exp(delta);
}

}  // namespace

void ParameterLayout::Apply(const Eigen::VectorXd& d, WorldState* state) const {
  int k = 0;
  ScaleIfMoved(d(k++), &state->alpha);
  for (int h = 0; h < num_humans_; ++h) {
    HumanParams& p = state->humans[h];
    p.gamma += d.segment<3>(k);
    k += 3;
    p.beta += d.segment(k, num_betas_);
    k += num_betas_;
    RetractIfMoved(d.segment<3>(k), &p.phi);
    k += 3;
    for (int j = 0; j < num_joints_; ++j) {
      RetractIfMoved(d.segment<3>(k), &p.theta[j]);
      k += 3;
    }
  }
  for (int c = 0; c < num_cameras_; ++c) {
    CameraModel& cam = state->cameras[c];
    RetractIfMoved(d.segment<3>(k), &cam.rotation);
    cam.translation += d.segment<3>(k + 3) * camera_scale_;
    ScaleIfMoved(d(k + 6), &cam.intrinsics.fx);
    ScaleIfMoved(d(k + 6), &cam.intrinsics.fy);
    k += 7;
  }
  for (int c = 0; c < num_cameras_; ++c) {
    std::vector<double>& depth = state->depths[c].depth;
    for (int p = 0; p < num_pixels_; ++p) ScaleIfMoved(d(k + p), &depth[p]);
    k += num_pixels_;
  }
  for (int e = 0; e < num_pairs_; ++e) {
    PairwiseObservation& pair = state->pairs[e];
    RetractIfMoved(d.segment<3>(k), &pair.rotation);
    pair.translation += d.segment<3>(k + 3) * pair_scale_[e];
    ScaleIfMoved(d(k + 6), &pair.sigma);
    k += 7;
  }
}

Eigen::VectorXd FiniteDifferenceGradient(const LossFunction& loss,
                                         const WorldState& state,
                                         const LossOptions& options,
                                         const ParameterLayout& layout,
                                         double step) {
  Eigen::VectorXd out(layout.size());
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(layout.size());
  for (int i = 0; i < layout.size(); ++i) {
    WorldState plus = state;
    WorldState minus = state;
    delta(i) = step;
    layout.Apply(delta, &plus);
    delta(i) = -step;
    layout.Apply(delta, &minus);
    delta(i) = 0.0;
    const double fp = loss.Evaluate(plus, options, nullptr).total;
    const double fm = loss.Evaluate(minus, options, nullptr).total;
    out(i) = (fp - fm) / (2.0 * step);
  }
  // Inactive coordinates: an analytic evaluation at the state tells which
  // entries the active set zeroes.
  StateGradient probe;
  loss.Evaluate(state, options, &probe);
  StateGradient ones = probe;
  ones.log_alpha = 1.0;
  for (HumanGradient& h : ones.humans) {
    h.gamma.setOnes();
    h.beta.setOnes();
    h.phi.setOnes();
    for (Vec3& t : h.theta) t.setOnes();
  }
  for (auto& c : ones.cameras) {
    c.rotation.setOnes();
    c.translation.setOnes();
    c.log_focal = 1.0;
  }
  for (auto& d : ones.log_depth) d.setOnes();
  for (auto& p : ones.pairs) {
    p.rotation.setOnes();
    p.translation.setOnes();
    p.log_sigma = 1.0;
  }
  detail::MaskInactive(options.active, &ones);
  const Eigen::VectorXd mask = layout.Flatten(ones);
  for (int i = 0; i < layout.size(); ++i) {
    if (mask(i) == 0.0) out(i) = 0.0;
  }
  return out;
}

// --- driver -------------------------------------------------------------------------

namespace {

struct StageSetup {
  int stage = 1;
  LossOptions options;
};

}  // namespace

double FixScaleGauge(const WorldState& reference, WorldState* state) {
  std::vector<double> ratios;
  for (std::size_t c = 0; c < state->depths.size() && c < reference.depths.size(); ++c) {
    const DepthMap& now = state->depths[c];
    const DepthMap& ref = reference.depths[c];
    if (now.depth.size() != ref.depth.size()) continue;
    for (std::size_t p = 0; p < now.depth.size(); ++p) {
      if (now.Valid(static_cast<int>(p)) && ref.Valid(static_cast<int>(p))) {
        ratios.push_back(now.depth[p] / ref.depth[p]);
      }
    }
  }
  if (ratios.empty()) return 1.0;
  const auto mid = ratios.begin() + static_cast<std::ptrdiff_t>(ratios.size() / 2);
  std::nth_element(ratios.begin(), mid, ratios.end());
  const double k = *mid;
  if (!(k > 0.0) || !std::isfinite(k) || k == 1.0) return 1.0;
  state->alpha *= k;
  for (CameraModel& cam : state->cameras) cam.translation /= k;
  for (DepthMap& d : state->depths) {
    for (double& v : d.depth) v /= k;
  }
  return k;
}

OptimResult RunHsfm(const WorldState& initial, const LossFunction& loss,
                    const OptimConfig& config) {
  if (!(config.lr > 0.0)) throw ConfigError("lr must be positive");
  if (config.gradient_mode == GradientMode::kFiniteDifference && config.detach_human_grads) {
    throw ConfigError("detached human gradients need the analytic gradient mode");
  }
  if (config.num_threads > 0) omp_set_num_threads(config.num_threads);

  OptimResult result;
  result.state = initial;
  WorldState& state = result.state;
  const ParameterLayout layout(initial, loss.skeleton());
  const int steps = StepBudget(initial, config);

  std::vector<StageSetup> stages;
  if (config.run_stage1) {
    StageSetup s;
    s.stage = 1;
    s.options.lambda = 0.0;
    s.options.active = ActiveSet::StageOne();
    s.options.detach_human_grads = config.detach_human_grads;
    stages.push_back(s);
  }
  if (config.run_stage2) {
    StageSetup s;
    s.stage = 2;
    s.options.lambda = config.no_places ? 0.0 : config.lambda;
    s.options.active = ActiveSet::StageTwo(config.stage2_alpha);
    s.options.active.focal = config.optimize_focal;
    s.options.detach_human_grads = config.detach_human_grads;
    stages.push_back(s);
  }

  int global_step = 0;
  StateGradient grad;
  for (const StageSetup& setup : stages) {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(layout.size());
    Eigen::VectorXd v = Eigen::VectorXd::Zero(layout.size());
    Eigen::VectorXd prev_m;
    Eigen::VectorXd prev_v;
    WorldState previous;
    bool have_previous = false;
    bool retried = false;
    double lr_scale = 1.0;

    int k = 0;
    while (k < steps) {
      const LossBreakdown b = loss.Evaluate(state, setup.options, &grad);
      Eigen::VectorXd g;
      if (config.gradient_mode == GradientMode::kAnalytic) {
        g = layout.Flatten(grad);
      } else {
        g = FiniteDifferenceGradient(loss, state, setup.options, layout,
                                     config.finite_difference_step);
      }
      const bool loss_ok = std::isfinite(b.total);
      if (!loss_ok || !g.allFinite()) {
        if (!retried && have_previous) {
          retried = true;
          ++result.retries;
          lr_scale *= 0.5;
          state = previous;
          m = prev_m;
          v = prev_v;
          result.trace.pop_back();
          --k;
          --global_step;
          continue;
        }
        if (!loss_ok) throw Diverged("total loss became non-finite at step " + std::to_string(global_step));
        throw NonFiniteGradient("non-finite gradient at step " + std::to_string(global_step));
      }

      const double lr = config.lr * lr_scale * (1.0 - static_cast<double>(k) / steps);
      result.trace.push_back({global_step, setup.stage, b.humans, b.places, b.total, lr});

      previous = state;
      prev_m = m;
      prev_v = v;
      have_previous = true;

      m = config.adam_beta1 * m + (1.0 - config.adam_beta1) * g;
      v = config.adam_beta2 * v + (1.0 - config.adam_beta2) * g.cwiseProduct(g);
      const double c1 = 1.0 - std::pow(config.adam_beta1, k + 1);
      const double c2 = 1.0 - std::pow(config.adam_beta2, k + 1);
      Eigen::VectorXd delta(layout.size());
      for (int i = 0; i < layout.size(); ++i) {
        delta(i) = -lr * (m(i) / c1) / (std::sqrt(v(i) / c2) + config.adam_epsilon);
      }
      layout.Apply(delta, &state);
      ++k;
      ++global_step;
    }
    if (setup.stage == 1) {
      result.stage1_steps = steps;
    } else {
      result.stage2_steps = steps;
    }
  }

  if (config.run_stage2) FixScaleGauge(initial, &state);

  if (!stages.empty()) {
    const LossBreakdown b = loss.Evaluate(state, stages.back().options, nullptr);
    if (!std::isfinite(b.total)) throw Diverged("final loss is non-finite");
    result.trace.push_back({global_step, stages.back().stage, b.humans, b.places, b.total, 0.0});
  }
  return result;
}

std::string TraceToCsv(const std::vector<TraceRow>& trace) {
  std::string out = "step,L_humans,L_places,total,lr\n";
  char line[160];
  for (const TraceRow& r : trace) {
    std::snprintf(line, sizeof(line), "%d,%.17g,%.17g,%.17g,%.17g\n", r.step,
                  r.humans, r.places, r.total, r.lr);
    out += line;
  }
  return out;
}

void WriteTraceCsv(const std::filesystem::path& path,
                   const std::vector<TraceRow>& trace) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << TraceToCsv(trace);
  if (!f) throw IoError("write failed for " + path.string());
}

}  // namespace hsfm
