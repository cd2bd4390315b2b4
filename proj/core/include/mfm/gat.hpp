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
#include <string>

#include "mfm/parameter.hpp"
#include "mfm/tape.hpp"
#include "mfm/tensor_archive.hpp"

namespace mfm {

/// Parameters of one graph attention block: attention projections U, V
/// (F×F_a), graph-layer weights W1, W2 (F×F) and the pooling vector w_p (F×1).
///
/// Forward pass over node features Y (M×F):
///   A   = rowsoftmax((Y·U)(Y·V)ᵀ / sqrt(F_a))
///   H1  = relu(A·Y·W1)
///   H2  = relu(A·H1·W2)
///   α   = softmax((H2·w_p)ᵀ)
///   out = α·H2                      (1×F)
struct GatBlock {
  Parameter U;
  Parameter V;
  Parameter W1;
  Parameter W2;
  Parameter wp;

  std::size_t features() const { return W1.value.rows(); }         // F
  std::size_t attention_dim() const { return U.value.cols(); }     // F_a

  ParameterList parameters();
  // Renames every parameter to "<prefix>/{U,V,W1,W2,w_p}".
  void set_prefix(const std::string& prefix);
};

/// Glorot-uniform initialization, a = sqrt(6 / (fan_in + fan_out)) per matrix.
GatBlock init_gat(std::size_t F, std::size_t F_a, std::uint64_t seed,
                  const std::string& prefix = "gat");

/// Value-identical deep copy with zeroed gradients.
GatBlock copy_gat(const GatBlock& src, const std::string& prefix);

/// Differentiable forward pass; `nodes` is M×F with M ≥ 1. Returns 1×F.
Var gat_forward(Tape& tape, GatBlock& block, Var nodes);

/// Intermediate values of one forward pass, for inspection and tests.
struct GatTrace {
  Matrix adjacency;  // A
  Matrix hidden1;    // H1
  Matrix hidden2;    // H2
  Matrix pooling;    // α, 1×M
  Matrix output;     // 1×F
};
GatTrace gat_trace(const GatBlock& block, const Matrix& nodes);
Matrix gat_forward(const GatBlock& block, const Matrix& nodes);

// Tensors are stored under "<prefix>/{U,V,W1,W2,w_p}".
void store_gat(TensorArchive& archive, const std::string& prefix, const GatBlock& block);
GatBlock load_gat(const TensorArchive& archive, const std::string& prefix);

}  // namespace mfm
