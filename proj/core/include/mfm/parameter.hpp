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

#include <string>
#include <vector>

#include "mfm/matrix.hpp"

namespace mfm {

/// A learnable tensor with its accumulated gradient.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  Parameter() = default;
  Parameter(std::string name_, Matrix value_)
      : name(std::move(name_)), value(std::move(value_)), grad(value.rows(), value.cols()) {}

  void zero_grad() {
    if (!grad.same_shape(value)) grad = Matrix(value.rows(), value.cols());
    grad.fill(Real(0));
  }
};

/// Non-owning, duplicate-free list of parameters. Shared parameters (weight
/// tying) appear once, so optimizers update them once.
class ParameterList {
 public:
  void add(Parameter& p);
  void extend(const ParameterList& other);

  std::size_t size() const noexcept { return params_.size(); }
  Parameter& operator[](std::size_t i) const { return *params_[i]; }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_grad() const;
  Parameter* find(const std::string& name) const;

 private:
  std::vector<Parameter*> params_;
};

}  // namespace mfm
