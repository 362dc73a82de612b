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

#pragma once

#include "hsfm/init.hpp"
#include "hsfm/optim.hpp"
#include "hsfm/scene_io.hpp"

namespace hsfm {

struct PipelineResult {
  InitResult init;
  OptimResult optim;
};

/// initialize_world followed by run_hsfm on the scene's keypoints.
PipelineResult ReconstructScene(const Scene& scene, const InitOptions& init_options,
                                const OptimConfig& config);

/// Parses "human", "one" or "fixed:<v>" into `options`. Throws ConfigError.
void ParseAlphaInit(const std::string& text, InitOptions* options);

}  // namespace hsfm
