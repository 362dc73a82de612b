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

#include "hsfm/pipeline.hpp"

#include <cmath>

namespace hsfm {

PipelineResult ReconstructScene(const Scene& scene, const InitOptions& init_options,
                                const OptimConfig& config) {
  PipelineResult out;
  out.init = InitializeWorld(scene, init_options);
  const LossFunction loss(scene.skeleton, scene.keypoints,
                          static_cast<int>(scene.state.cameras.size()), scene.num_humans);
  out.optim = RunHsfm(out.init.state, loss, config);
  return out;
}

void ParseAlphaInit(const std::string& text, InitOptions* options) {
  if (text == "human") {
    options->alpha_init = AlphaInit::kHuman;
  } else if (text == "one") {
    options->alpha_init = AlphaInit::kOne;
  } else if (text.rfind("fixed:", 0) == 0) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text.substr(6), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size() - 6 || !(v > 0.0) || !std::isfinite(v)) {
      throw ConfigError("--alpha-init fixed:<v> needs a positive number, got '" + text + "'");
    }
    options->alpha_init = AlphaInit::kFixed;
    options->alpha_fixed = v;
  } else {
    throw ConfigError("--alpha-init must be human, one or fixed:<v>, got '" + text + "'");
  }
}

}  // namespace hsfm
