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

#include <cstddef>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "mfm/matrix.hpp"
#include "mfm/parameter.hpp"

namespace mfm {

class Tape;

/// Handle to a node recorded on a Tape.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Records the forward computation so that backward() can propagate
/// gradients in reverse. One tape per forward pass; tapes are cheap to build.
///
/// Parameters enter the tape once each (cached by address), so a parameter
/// used at several places, including tied weights, gets a single summed
/// gradient.
class Tape {
 public:
  using Backward =
      std::function<void(Tape&, const Matrix& upstream, const Matrix& output)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var param(Parameter& p);

  // Appends a node computed by an operation. `back` receives the upstream
  // gradient and the node's own value and must call accumulate() on its inputs.
  Var record(Matrix value, std::span<const Var> inputs, Backward back);

  const Matrix& value(Var v) const { return nodes_[v.id_].value; }
  bool requires_grad(Var v) const { return nodes_[v.id_].requires_grad; }
  void accumulate(Var v, const Matrix& g);

  /// Seeds d(out)/d(out) = 1 for a 1×1 output and propagates to every node.
  void backward(Var out);

  /// Gradient of `out` with respect to node `v` after backward(); zeros if
  /// the node did not influence the output.
  Matrix grad(Var v) const;
  Matrix grad(const Parameter& p) const;

  /// Adds the tape's parameter gradients into Parameter::grad.
  void accumulate_param_grads() const;

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    Backward back;
    Parameter* param = nullptr;
    bool requires_grad = false;
    bool has_grad = false;
  };

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> param_nodes_;
};

namespace ad {

Var matmul(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
// Adds a 1×C row to every row of an R×C matrix.
Var add_row(Var a, Var row);
Var scale(Var a, Real factor);
Var hadamard(Var a, Var b);
Var relu(Var a);
Var sigmoid(Var a);
Var rowsoftmax(Var a);
// 1×C mean over rows.
Var mean_rows(Var a);
// Horizontal concatenation of two matrices with equal row counts.
Var concat_cols(Var a, Var b);
// Vertical stack of 1×C rows into an R×C matrix.
Var stack_rows(std::span<const Var> rows);
// Copy of `a` whose listed rows are replaced by the 1×C row `row`.
Var replace_rows(Var a, Var row, std::span<const std::size_t> indices);
// 1×1 sum of all entries.
Var sum(Var a);

// Mean binary cross-entropy of sigmoid(logits) against a {0,1} target of the
// same shape, evaluated from the logits in the overflow-free form.
Var bce_with_logits(Var logits, const Matrix& target);
// Categorical cross-entropy of rowsoftmax(logits) against a target
// distribution (rows sum to 1), via log-sum-exp.
Var softmax_cross_entropy(Var logits, const Matrix& target);

}  // namespace ad
}  // namespace mfm
