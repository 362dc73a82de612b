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

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "hsfm/export.hpp"
#include "hsfm/metrics.hpp"
#include "hsfm/pipeline.hpp"
#include "hsfm/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct InitFlags {
  std::string alpha_init = "human";
  int reference_camera = -1;

  hsfm::InitOptions Options() const {
    hsfm::InitOptions o;
    o.reference_camera = reference_camera;
    hsfm::ParseAlphaInit(alpha_init, &o);
    return o;
  }
};

void AddInitFlags(CLI::App* cmd, InitFlags* flags) {
  cmd->add_option("--alpha-init", flags->alpha_init, "human | one | fixed:<v>");
  cmd->add_option("--reference-camera", flags->reference_camera,
                  "reference camera id (default: highest keypoint confidence)");
}

struct OptimizeFlags {
  std::string config;
  bool no_places = false;
  bool detach = false;
  int threads = 0;
  int steps = 0;

  hsfm::OptimConfig Config() const {
    hsfm::OptimConfig c;
    if (!config.empty()) c = hsfm::OptimConfigFromJson(hsfm::ReadJsonFile(config));
    if (no_places) c.no_places = true;
    if (detach) c.detach_human_grads = true;
    if (threads > 0) c.num_threads = threads;
    if (steps > 0) c.fixed_steps = steps;
    return c;
  }
};

void AddOptimizeFlags(CLI::App* cmd, OptimizeFlags* flags) {
  cmd->add_option("--config", flags->config, "optimizer config JSON");
  cmd->add_flag("--no-places", flags->no_places, "drop the places term (lambda = 0 throughout)");
  cmd->add_flag("--detach-human-grads", flags->detach,
                "human loss does not move cameras, alpha or the scene");
  cmd->add_option("--threads", flags->threads, "worker threads (0 = OpenMP default)");
  cmd->add_option("--steps", flags->steps, "fixed steps per stage");
}

void WriteResult(const hsfm::PipelineResult& r, const hsfm::SkeletonTemplate& tmpl,
                 const hsfm::OptimConfig& config, const fs::path& out) {
  hsfm::SaveSnapshot(r.optim.state, tmpl, out);
  hsfm::WriteTraceCsv(out / "trace.csv", r.optim.trace);
  hsfm::WriteJsonFile(out / "init_report.json", hsfm::InitReportToJson(r.init.report));
  hsfm::WriteJsonFile(out / "config.json", hsfm::OptimConfigToJson(config));
}

hsfm::EvalReport EvaluateDirs(const fs::path& result, const fs::path& gt, bool pool) {
  hsfm::SkeletonTemplate tmpl;
  hsfm::SkeletonTemplate gt_tmpl;
  const hsfm::WorldState pred = hsfm::LoadSnapshot(result, &tmpl);
  const hsfm::WorldState truth = hsfm::LoadSnapshot(gt, &gt_tmpl);
  if (tmpl.num_joints() != gt_tmpl.num_joints()) {
    throw hsfm::SchemaMismatch("result and ground truth use different skeletons");
  }
  return hsfm::Evaluate(pred, truth, gt_tmpl, pool);
}

std::vector<double> ParseValues(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      values.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw hsfm::ConfigError("bad sweep value '" + item + "'");
    }
  }
  return values;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hsfm: joint reconstruction of humans, scene and cameras"};
  app.require_subcommand(1);

  // synth
  std::string synth_config;
  std::string synth_out;
  std::int64_t synth_seed = -1;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic capture");
  synth->add_option("--config", synth_config, "synth config JSON");
  synth->add_option("--out", synth_out, "output scene directory")->required();
  synth->add_option("--seed", synth_seed, "override the config seed");

  // init
  std::string init_scene;
  std::string init_out;
  std::string init_state_out;
  InitFlags init_flags;
  CLI::App* init = app.add_subcommand("init", "initialize the world from a scene");
  init->add_option("scene", init_scene, "scene directory")->required();
  init->add_option("--out", init_out, "init report JSON")->required();
  init->add_option("--state-out", init_state_out, "snapshot directory for the initialized state");
  AddInitFlags(init, &init_flags);

  // optimize
  std::string opt_scene;
  std::string opt_out;
  InitFlags opt_init_flags;
  OptimizeFlags opt_flags;
  CLI::App* optimize = app.add_subcommand("optimize", "initialize and run the two-stage optimization");
  optimize->add_option("scene", opt_scene, "scene directory")->required();
  optimize->add_option("--out", opt_out, "result directory")->required();
  AddInitFlags(optimize, &opt_init_flags);
  AddOptimizeFlags(optimize, &opt_flags);

  // evaluate
  std::string eval_result;
  std::string eval_gt;
  std::string eval_out;
  std::string eval_csv;
  bool per_human_mean = false;
  CLI::App* evaluate = app.add_subcommand("evaluate", "compare a result against ground truth");
  evaluate->add_option("result", eval_result, "result snapshot directory")->required();
  evaluate->add_option("gt", eval_gt, "ground-truth snapshot directory")->required();
  evaluate->add_option("--out", eval_out, "report JSON")->required();
  evaluate->add_option("--csv", eval_csv, "also write a one-row CSV");
  evaluate->add_flag("--per-human-mean", per_human_mean,
                     "W-MPJPE as the mean of per-human means instead of pooled joints");

  // export
  std::string export_result;
  std::string export_out;
  bool export_ascii = false;
  CLI::App* exporter = app.add_subcommand("export", "write PLY files for a result");
  exporter->add_option("result", export_result, "snapshot directory")->required();
  exporter->add_option("--out", export_out, "output directory")->required();
  exporter->add_flag("--ascii", export_ascii, "ascii PLY instead of binary");

  // sweep
  std::string sweep_config;
  std::string sweep_axis;
  std::string sweep_values;
  std::string sweep_out;
  bool sweep_run = false;
  InitFlags sweep_init_flags;
  OptimizeFlags sweep_opt_flags;
  CLI::App* sweep = app.add_subcommand("sweep", "generate (and optionally run) a scene sweep");
  sweep->add_option("--config", sweep_config, "base synth config JSON");
  sweep->add_option("--axis", sweep_axis, "humans | cameras | noise | alpha_init")->required();
  sweep->add_option("--values", sweep_values, "comma-separated values")->required();
  sweep->add_option("--out", sweep_out, "output directory")->required();
  sweep->add_flag("--run", sweep_run, "optimize and evaluate every scene, write sweep.csv");
  AddInitFlags(sweep, &sweep_init_flags);
  sweep->add_option("--optim-config", sweep_opt_flags.config, "optimizer config JSON");
  sweep->add_option("--threads", sweep_opt_flags.threads, "worker threads");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      hsfm::SynthConfig c;
      if (!synth_config.empty()) c = hsfm::SynthConfigFromJson(hsfm::ReadJsonFile(synth_config));
      if (synth_seed >= 0) c.seed = static_cast<std::uint64_t>(synth_seed);
      hsfm::WriteSynthScene(hsfm::GenerateScene(c), synth_out);
      std::printf("wrote %s\n", synth_out.c_str());
    } else if (*init) {
      const hsfm::Scene scene = hsfm::LoadScene(init_scene);
      const hsfm::InitResult r = hsfm::InitializeWorld(scene, init_flags.Options());
      json out = {{"report", hsfm::InitReportToJson(r.report)}};
      if (!init_state_out.empty()) {
        hsfm::SaveSnapshot(r.state, scene.skeleton, init_state_out);
        out["state"] = init_state_out;
      }
      hsfm::WriteJsonFile(init_out, out);
      for (const std::string& w : r.report.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
      std::printf("anchor %d, reference camera %d, alpha %.6g\n", r.report.anchor_human,
                  r.report.reference_camera, r.report.alpha);
    } else if (*optimize) {
      const hsfm::Scene scene = hsfm::LoadScene(opt_scene);
      const hsfm::OptimConfig config = opt_flags.Config();
      const hsfm::PipelineResult r =
          hsfm::ReconstructScene(scene, opt_init_flags.Options(), config);
      for (const std::string& w : r.init.report.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
      WriteResult(r, scene.skeleton, config, opt_out);
      const hsfm::TraceRow& last = r.optim.trace.back();
      std::printf("steps %d+%d, final total %.6g (humans %.6g, places %.6g), alpha %.6g\n",
                  r.optim.stage1_steps, r.optim.stage2_steps, last.total, last.humans,
                  last.places, r.optim.state.alpha);
    } else if (*evaluate) {
      const hsfm::EvalReport report = EvaluateDirs(eval_result, eval_gt, !per_human_mean);
      hsfm::WriteJsonFile(eval_out, hsfm::EvalReportToJson(report));
      if (!eval_csv.empty()) {
        std::ofstream f(eval_csv);
        f << hsfm::EvalCsvHeader() << '\n' << hsfm::EvalCsvRow(report) << '\n';
        if (!f) throw hsfm::IoError("cannot write " + eval_csv);
      }
      std::printf("%s\n%s\n", hsfm::EvalCsvHeader().c_str(), hsfm::EvalCsvRow(report).c_str());
    } else if (*exporter) {
      hsfm::SkeletonTemplate tmpl;
      const hsfm::WorldState state = hsfm::LoadSnapshot(export_result, &tmpl);
      hsfm::ExportWorld(state, tmpl, export_out, !export_ascii);
      std::printf("wrote %s\n", export_out.c_str());
    } else if (*sweep) {
      hsfm::SynthConfig base;
      if (!sweep_config.empty()) base = hsfm::SynthConfigFromJson(hsfm::ReadJsonFile(sweep_config));
      const auto entries =
          hsfm::WriteSweep(base, sweep_axis, ParseValues(sweep_values), sweep_out);
      if (sweep_run) {
        const hsfm::OptimConfig config = sweep_opt_flags.Config();
        std::ofstream csv(fs::path(sweep_out) / "sweep.csv");
        csv << "axis,value," << hsfm::EvalCsvHeader() << '\n';
        for (const hsfm::SweepEntry& e : entries) {
          const hsfm::Scene scene = hsfm::LoadScene(e.dir);
          const hsfm::PipelineResult r =
              hsfm::ReconstructScene(scene, sweep_init_flags.Options(), config);
          WriteResult(r, scene.skeleton, config, e.dir / "result");
          const hsfm::EvalReport report = EvaluateDirs(e.dir / "result", e.dir / "gt", true);
          hsfm::WriteJsonFile(e.dir / "report.json", hsfm::EvalReportToJson(report));
          csv << e.axis << ',' << e.value << ',' << hsfm::EvalCsvRow(report) << '\n';
          std::printf("%s=%g  W-MPJPE %.4f  TE %.4f\n", e.axis.c_str(), e.value,
                      report.w_mpjpe, report.cameras.te);
        }
        if (!csv) throw hsfm::IoError("cannot write sweep.csv");
      }
      std::printf("wrote %zu scenes under %s\n", entries.size(), sweep_out.c_str());
    }
  } catch (const hsfm::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
