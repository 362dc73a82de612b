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

#include <benchmark/benchmark.h>

#include <map>

#include "hsfm/losses.hpp"
#include "hsfm/synth.hpp"

namespace {

const hsfm::SynthScene& Scene(int stride) {
  static std::map<int, hsfm::SynthScene> cache;
  auto it = cache.find(stride);
  if (it == cache.end()) {
    hsfm::SynthConfig c;
    c.grid_stride = stride;
    c.keypoint_sigma_px = 2.0;
    c.pointmap_noise = 0.02;
    it = cache.emplace(stride, hsfm::GenerateScene(c)).first;
  }
  return it->second;
}

void BM_Loss(benchmark::State& state, hsfm::Execution exec) {
  const hsfm::SynthScene& s = Scene(static_cast<int>(state.range(0)));
  const hsfm::LossFunction loss(s.scene.skeleton, s.scene.keypoints,
                                s.config.num_cameras, s.config.num_humans);
  hsfm::StateGradient grad;
  for (auto _ : state) {
    const hsfm::LossBreakdown b = loss.Evaluate(s.ground_truth, {}, &grad, exec);
    benchmark::DoNotOptimize(b.total);
  }
}

}  // namespace

BENCHMARK_CAPTURE(BM_Loss, serial, hsfm::Execution::kSerial)->Arg(32)->Arg(16)->Arg(8);
BENCHMARK_CAPTURE(BM_Loss, parallel, hsfm::Execution::kParallel)->Arg(32)->Arg(16)->Arg(8);

BENCHMARK_MAIN();
