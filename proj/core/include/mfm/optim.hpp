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
#include <map>
#include <string>
#include <vector>

#include "mfm/parameter.hpp"

namespace mfm {

/// Step learning-rate schedule: base × decay^(number of milestones ≤ epoch).
/// Epochs are 1-based, so with milestones {50, 100} epoch 50 is the first
/// epoch at the decayed rate.
class MultiStepSchedule {
 public:
  MultiStepSchedule(double base_lr, std::vector<int> milestones, double decay);

  double lr_at(int epoch) const;
  double base_lr() const noexcept { return base_lr_; }
  const std::vector<int>& milestones() const noexcept { return milestones_; }
  double decay() const noexcept { return decay_; }

  // Milestones must be strictly increasing and inside [1, total_epochs].
  void validate(int total_epochs) const;

 private:
  double base_lr_;
  std::vector<int> milestones_;
  double decay_;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam without weight decay. Moments are keyed by parameter name so they
/// can be saved with a checkpoint and restored.
class Adam {
 public:
  explicit Adam(ParameterList params, AdamConfig config = {});

  void step(double lr);
  void zero_grad() const { params_.zero_grad(); }

  std::int64_t steps() const noexcept { return steps_; }
  const ParameterList& parameters() const noexcept { return params_; }

  // "adam/<param>/m", "adam/<param>/v" and "adam/steps".
  std::map<std::string, Matrix> state() const;
  void load_state(const std::map<std::string, Matrix>& state);

 private:
  ParameterList params_;
  AdamConfig config_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  std::int64_t steps_ = 0;
};

}  // namespace mfm
