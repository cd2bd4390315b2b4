// Copyright 2026 The MFM Authors
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

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mfm/parameter.hpp"
#include "mfm/tape.hpp"

namespace mfm {

struct GradCheckReport {
  std::string parameter;
  Real max_relative_error = 0;
  Real tolerance = 0;
  std::size_t coordinates_checked = 0;
  bool pass = false;
  std::string message;  // set when the check could not run (non-finite loss)
};

struct GradCheckOptions {
  Real step = Real(1e-5);
  Real tolerance = Real(1e-4);
  // Parameters larger than this are checked on a seeded random subsample of
  // this many coordinates (never fewer than 64).
  std::size_t max_coordinates = 256;
  std::uint64_t seed = 0;
};

/// Builds the scalar loss on the supplied tape. Must be deterministic.
using LossBuilder = std::function<Var(Tape&)>;

/// relative error = |analytic - numeric| / max(|analytic|, |numeric|, 1e-8)
Real relative_error(Real analytic, Real numeric);

/// Compares reverse-mode gradients with central finite differences, one
/// report per parameter. Parameter values are restored on return; gradients
/// are left holding the analytic result.
std::vector<GradCheckReport> grad_check(const LossBuilder& loss, const ParameterList& params,
                                        const GradCheckOptions& options = {});

}  // namespace mfm
