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

#include <stdexcept>
#include <string>

namespace hsfm {

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define HSFM_DEFINE_ERROR(Name)          \
  class Name : public Error {            \
   public:                               \
    using Error::Error;                  \
  }

// geometry
HSFM_DEFINE_ERROR(NonPositiveDepth);
HSFM_DEFINE_ERROR(DegenerateConfiguration);

// observations / io
HSFM_DEFINE_ERROR(ParseError);
HSFM_DEFINE_ERROR(SchemaMismatch);
HSFM_DEFINE_ERROR(MissingCamera);
HSFM_DEFINE_ERROR(UnknownCamera);
HSFM_DEFINE_ERROR(IoError);

// init
HSFM_DEFINE_ERROR(NoMultiViewHuman);
HSFM_DEFINE_ERROR(MissingAnchorView);
HSFM_DEFINE_ERROR(InsufficientKeypoints);
HSFM_DEFINE_ERROR(DegenerateScale);

// optim
HSFM_DEFINE_ERROR(NonFiniteGradient);
HSFM_DEFINE_ERROR(Diverged);

// synth / config
HSFM_DEFINE_ERROR(ConfigError);

#undef HSFM_DEFINE_ERROR

}  // namespace hsfm
