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

#include <span>
#include <vector>

#include "mfm/parallel.hpp"
#include "mfm/parameter.hpp"
#include "mfm/tape.hpp"

namespace mfm::detail {

/// Builds one tape per item (in parallel), then writes the batch-mean
/// gradient into Parameter::grad, summing per-item gradients in item order.
/// Returns the per-item losses. `build(tape, item)` must only read parameters.
template <typename Build>
std::vector<double> batch_gradients(const ParameterList& params, std::span<const std::size_t> items,
                                    unsigned threads, Build&& build) {
  const std::size_t n = items.size();
  std::vector<double> losses(n, 0.0);
  std::vector<std::vector<Matrix>> grads(n);
  parallel_for(n, threads, [&](std::size_t j) {
    Tape tape;
    Var loss = build(tape, items[j]);
    losses[j] = static_cast<double>(loss.value()(0, 0));
    tape.backward(loss);
    grads[j].reserve(params.size());
    for (Parameter* p : params) grads[j].push_back(tape.grad(*p));
  });
  params.zero_grad();
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < params.size(); ++k) params[k].grad += grads[j][k];
  const Real inv = Real(1) / static_cast<Real>(n);
  for (Parameter* p : params)
    for (Real& g : p->grad.data()) g *= inv;
  return losses;
}

}  // namespace mfm::detail
