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

#include "mfm/optim.hpp"

#include <cmath>

#include "mfm/error.hpp"

namespace mfm {

MultiStepSchedule::MultiStepSchedule(double base_lr, std::vector<int> milestones, double decay)
    : base_lr_(base_lr), milestones_(std::move(milestones)), decay_(decay) {
  if (!(base_lr_ > 0)) throw ConfigError("learning rate must be positive");
  if (!(decay_ > 0)) throw ConfigError("lr decay must be positive");
  for (std::size_t i = 1; i < milestones_.size(); ++i) {
    if (milestones_[i] <= milestones_[i - 1]) {
      throw ConfigError("milestones must be strictly increasing");
    }
  }
}

double MultiStepSchedule::lr_at(int epoch) const {
  double lr = base_lr_;
  for (int m : milestones_)
    if (epoch >= m) lr *= decay_;
  return lr;
}

void MultiStepSchedule::validate(int total_epochs) const {
  for (int m : milestones_) {
    if (m < 1 || m > total_epochs) {
      throw ConfigError("milestone " + std::to_string(m) + " outside [1, " +
                        std::to_string(total_epochs) + "]");
    }
  }
}

Adam::Adam(ParameterList params, AdamConfig config)
    : params_(std::move(params)), config_(config) {
  for (Parameter* p : params_) {
    m_.emplace_back(p->value.rows(), p->value.cols());
    v_.emplace_back(p->value.rows(), p->value.cols());
  }
}

void Adam::step(double lr) {
  ++steps_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Parameter& p = params_[k];
    if (!p.grad.same_shape(p.value)) continue;
    Matrix& m = m_[k];
    Matrix& v = v_[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      m[i] = static_cast<Real>(config_.beta1 * m[i] + (1.0 - config_.beta1) * g);
      v[i] = static_cast<Real>(config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g);
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p.value[i] -= static_cast<Real>(lr * mhat / (std::sqrt(vhat) + config_.eps));
    }
  }
}

std::map<std::string, Matrix> Adam::state() const {
  std::map<std::string, Matrix> out;
  for (std::size_t k = 0; k < params_.size(); ++k) {
    out["adam/" + params_[k].name + "/m"] = m_[k];
    out["adam/" + params_[k].name + "/v"] = v_[k];
  }
  out["adam/steps"] = Matrix(1, 1, static_cast<Real>(steps_));
  return out;
}

void Adam::load_state(const std::map<std::string, Matrix>& state) {
  for (std::size_t k = 0; k < params_.size(); ++k) {
    const std::string base = "adam/" + params_[k].name;
    auto m = state.find(base + "/m");
    auto v = state.find(base + "/v");
    if (m == state.end() || v == state.end()) {
      throw DataError("optimizer state missing for parameter " + params_[k].name);
    }
    if (!m->second.same_shape(m_[k]) || !v->second.same_shape(v_[k])) {
      throw DataError("optimizer state shape mismatch for parameter " + params_[k].name);
    }
    m_[k] = m->second;
    v_[k] = v->second;
  }
  auto s = state.find("adam/steps");
  if (s == state.end()) throw DataError("optimizer state missing step count");
  steps_ = static_cast<std::int64_t>(s->second(0, 0));
}

}  // namespace mfm
