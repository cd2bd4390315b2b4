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

#include "mfm/gat.hpp"

#include <cmath>
#include <random>

#include "mfm/error.hpp"
#include "mfm/rng.hpp"

namespace mfm {

ParameterList GatBlock::parameters() {
  ParameterList list;
  for (Parameter* p : {&U, &V, &W1, &W2, &wp}) list.add(*p);
  return list;
}

void GatBlock::set_prefix(const std::string& prefix) {
  U.name = prefix + "/U";
  V.name = prefix + "/V";
  W1.name = prefix + "/W1";
  W2.name = prefix + "/W2";
  wp.name = prefix + "/w_p";
}

namespace {

Matrix glorot(std::size_t rows, std::size_t cols, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-a, a);
  Matrix m(rows, cols);
  for (Real& v : m.data()) v = static_cast<Real>(dist(rng));
  return m;
}

}  // namespace

GatBlock init_gat(std::size_t F, std::size_t F_a, std::uint64_t seed, const std::string& prefix) {
  if (F == 0 || F_a == 0) throw ShapeError("init_gat: F and F_a must be >= 1");
  Rng rng(derive_seed(seed, tag(Stream::kInit)));
  GatBlock b;
  b.U = Parameter("", glorot(F, F_a, rng));
  b.V = Parameter("", glorot(F, F_a, rng));
  b.W1 = Parameter("", glorot(F, F, rng));
  b.W2 = Parameter("", glorot(F, F, rng));
  b.wp = Parameter("", glorot(F, 1, rng));
  b.set_prefix(prefix);
  return b;
}

GatBlock copy_gat(const GatBlock& src, const std::string& prefix) {
  GatBlock b = src;
  for (Parameter* p : {&b.U, &b.V, &b.W1, &b.W2, &b.wp}) p->zero_grad();
  b.set_prefix(prefix);
  return b;
}

Var gat_forward(Tape& tape, GatBlock& block, Var nodes) {
  const std::size_t F = block.features();
  if (nodes.rows() == 0) throw ShapeError("gat_forward: node set is empty");
  if (nodes.cols() != F) {
    throw ShapeError("gat_forward: nodes are " + nodes.value().shape_string() +
                     ", block expects " + std::to_string(F) + " features");
  }
  Var U = tape.param(block.U);
  Var V = tape.param(block.V);
  Var W1 = tape.param(block.W1);
  Var W2 = tape.param(block.W2);
  Var wp = tape.param(block.wp);

  const Real inv_sqrt = Real(1) / std::sqrt(static_cast<Real>(block.attention_dim()));
  Var scores = ad::scale(ad::matmul(ad::matmul(nodes, U), ad::transpose(ad::matmul(nodes, V))),
                         inv_sqrt);
  Var A = ad::rowsoftmax(scores);
  Var H1 = ad::relu(ad::matmul(ad::matmul(A, nodes), W1));
  Var H2 = ad::relu(ad::matmul(ad::matmul(A, H1), W2));
  Var alpha = ad::rowsoftmax(ad::transpose(ad::matmul(H2, wp)));
  return ad::matmul(alpha, H2);
}

GatTrace gat_trace(const GatBlock& block, const Matrix& nodes) {
  if (nodes.rows() == 0) throw ShapeError("gat_trace: node set is empty");
  if (nodes.cols() != block.features()) {
    throw ShapeError("gat_trace: nodes are " + nodes.shape_string() + ", block expects " +
                     std::to_string(block.features()) + " features");
  }
  const Real inv_sqrt = Real(1) / std::sqrt(static_cast<Real>(block.attention_dim()));
  GatTrace t;
  t.adjacency = rowsoftmax(
      scale(matmul(matmul(nodes, block.U.value), transpose(matmul(nodes, block.V.value))), inv_sqrt));
  t.hidden1 = relu(matmul(matmul(t.adjacency, nodes), block.W1.value));
  t.hidden2 = relu(matmul(matmul(t.adjacency, t.hidden1), block.W2.value));
  t.pooling = rowsoftmax(transpose(matmul(t.hidden2, block.wp.value)));
  t.output = matmul(t.pooling, t.hidden2);
  return t;
}

Matrix gat_forward(const GatBlock& block, const Matrix& nodes) {
  return gat_trace(block, nodes).output;
}

void store_gat(TensorArchive& archive, const std::string& prefix, const GatBlock& block) {
  archive[prefix + "/U"] = block.U.value;
  archive[prefix + "/V"] = block.V.value;
  archive[prefix + "/W1"] = block.W1.value;
  archive[prefix + "/W2"] = block.W2.value;
  archive[prefix + "/w_p"] = block.wp.value;
}

GatBlock load_gat(const TensorArchive& archive, const std::string& prefix) {
  const Matrix& W1 = archive_get(archive, prefix + "/W1");
  const std::size_t F = W1.rows();
  if (W1.cols() != F) throw DataError("tensor '" + prefix + "/W1' is not square");
  const Matrix& U = archive_get(archive, prefix + "/U");
  const std::size_t Fa = U.cols();
  GatBlock b;
  b.U = Parameter("", archive_get(archive, prefix + "/U", F, Fa));
  b.V = Parameter("", archive_get(archive, prefix + "/V", F, Fa));
  b.W1 = Parameter("", W1);
  b.W2 = Parameter("", archive_get(archive, prefix + "/W2", F, F));
  b.wp = Parameter("", archive_get(archive, prefix + "/w_p", F, 1));
  b.set_prefix(prefix);
  return b;
}

}  // namespace mfm
