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

#include "mfm/tape.hpp"

#include <algorithm>
#include <cmath>

#include "mfm/error.hpp"

namespace mfm {

// ---------------------------------------------------------------------------
// ParameterList

void ParameterList::add(Parameter& p) {
  if (std::find(params_.begin(), params_.end(), &p) == params_.end()) params_.push_back(&p);
}

void ParameterList::extend(const ParameterList& other) {
  for (Parameter* p : other.params_) add(*p);
}

void ParameterList::zero_grad() const {
  for (Parameter* p : params_) p->zero_grad();
}

Parameter* ParameterList::find(const std::string& name) const {
  for (Parameter* p : params_)
    if (p->name == name) return p;
  return nullptr;
}

// ---------------------------------------------------------------------------
// Tape

const Matrix& Var::value() const { return tape_->value(*this); }

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), {}, nullptr, nullptr, false, false});
  return Var(this, nodes_.size() - 1);
}

Var Tape::param(Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var(this, it->second);
  nodes_.push_back(Node{p.value, {}, nullptr, &p, true, false});
  param_nodes_.emplace(&p, nodes_.size() - 1);
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Matrix value, std::span<const Var> inputs, Backward back) {
  bool needs = false;
  for (const Var& in : inputs) {
    if (in.tape_ != this) throw ShapeError("Tape::record: input belongs to a different tape");
    needs = needs || nodes_[in.id_].requires_grad;
  }
  nodes_.push_back(Node{std::move(value), {}, needs ? std::move(back) : nullptr, nullptr, needs,
                        false});
  return Var(this, nodes_.size() - 1);
}

void Tape::accumulate(Var v, const Matrix& g) {
  Node& n = nodes_[v.id_];
  if (!n.requires_grad) return;
  if (!n.has_grad) {
    n.grad = g;
    n.has_grad = true;
  } else {
    n.grad += g;
  }
}

void Tape::backward(Var out) {
  if (out.rows() != 1 || out.cols() != 1) {
    throw ShapeError("Tape::backward: output must be 1x1, got " + out.value().shape_string());
  }
  for (auto& n : nodes_) {
    n.has_grad = false;
    n.grad = Matrix();
  }
  accumulate(out, Matrix(1, 1, Real(1)));
  for (std::size_t i = out.id_ + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.has_grad || !n.back) continue;
    // The closure may append to nodes' grads but never to nodes_ itself.
    n.back(*this, n.grad, n.value);
  }
}

Matrix Tape::grad(Var v) const {
  const Node& n = nodes_[v.id_];
  if (n.has_grad) return n.grad;
  return Matrix(n.value.rows(), n.value.cols());
}

Matrix Tape::grad(const Parameter& p) const {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return grad(Var(const_cast<Tape*>(this), it->second));
  return Matrix(p.value.rows(), p.value.cols());
}

void Tape::accumulate_param_grads() const {
  for (const auto& [param, id] : param_nodes_) {
    const Node& n = nodes_[id];
    if (!n.has_grad) continue;
    Parameter& p = *n.param;
    if (!p.grad.same_shape(p.value)) p.zero_grad();
    p.grad += n.grad;
  }
}

// ---------------------------------------------------------------------------
// Differentiable operations

namespace ad {
namespace {

void require_same(const char* op, const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shape mismatch (" + a.shape_string() + " vs " +
                     b.shape_string() + ")");
  }
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = a.tape();
  const Var in[] = {a, b};
  return t.record(mfm::matmul(a.value(), b.value()), in, [a, b](Tape& t, const Matrix& g, const Matrix&) {
    if (t.requires_grad(a)) t.accumulate(a, mfm::matmul(g, mfm::transpose(b.value())));
    if (t.requires_grad(b)) t.accumulate(b, mfm::matmul(mfm::transpose(a.value()), g));
  });
}

Var transpose(Var a) {
  const Var in[] = {a};
  return a.tape().record(mfm::transpose(a.value()), in, [a](Tape& t, const Matrix& g, const Matrix&) {
    t.accumulate(a, mfm::transpose(g));
  });
}

Var add(Var a, Var b) {
  const Var in[] = {a, b};
  return a.tape().record(mfm::add(a.value(), b.value()), in, [a, b](Tape& t, const Matrix& g, const Matrix&) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var add_row(Var a, Var row) {
  const Matrix& av = a.value();
  const Matrix& rv = row.value();
  if (rv.rows() != 1 || rv.cols() != av.cols()) {
    throw ShapeError("add_row: expected 1x" + std::to_string(av.cols()) + " row, got " +
                     rv.shape_string());
  }
  Matrix out = av;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += rv(0, j);
  const Var in[] = {a, row};
  return a.tape().record(std::move(out), in, [a, row](Tape& t, const Matrix& g, const Matrix&) {
    t.accumulate(a, g);
    if (t.requires_grad(row)) {
      Matrix gr(1, g.cols());
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) gr(0, j) += g(i, j);
      t.accumulate(row, gr);
    }
  });
}

Var scale(Var a, Real factor) {
  const Var in[] = {a};
  return a.tape().record(mfm::scale(a.value(), factor), in, [a, factor](Tape& t, const Matrix& g, const Matrix&) {
    t.accumulate(a, mfm::scale(g, factor));
  });
}

Var hadamard(Var a, Var b) {
  const Var in[] = {a, b};
  return a.tape().record(mfm::hadamard(a.value(), b.value()), in,
                         [a, b](Tape& t, const Matrix& g, const Matrix&) {
                           if (t.requires_grad(a)) t.accumulate(a, mfm::hadamard(g, b.value()));
                           if (t.requires_grad(b)) t.accumulate(b, mfm::hadamard(g, a.value()));
                         });
}

Var relu(Var a) {
  const Var in[] = {a};
  return a.tape().record(mfm::relu(a.value()), in, [a](Tape& t, const Matrix& g, const Matrix&) {
    Matrix ga = g;
    const Matrix& x = a.value();
    for (std::size_t i = 0; i < ga.size(); ++i)
      if (!(x[i] > Real(0))) ga[i] = Real(0);
    t.accumulate(a, ga);
  });
}

Var sigmoid(Var a) {
  const Var in[] = {a};
  return a.tape().record(mfm::sigmoid(a.value()), in, [a](Tape& t, const Matrix& g, const Matrix& s) {
    Matrix ga(g.rows(), g.cols());
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] = g[i] * s[i] * (Real(1) - s[i]);
    t.accumulate(a, ga);
  });
}

Var rowsoftmax(Var a) {
  const Var in[] = {a};
  return a.tape().record(mfm::rowsoftmax(a.value()), in, [a](Tape& t, const Matrix& g, const Matrix& s) {
    Matrix ga(g.rows(), g.cols());
    for (std::size_t i = 0; i < s.rows(); ++i) {
      Real dot = 0;
      for (std::size_t j = 0; j < s.cols(); ++j) dot += g(i, j) * s(i, j);
      for (std::size_t j = 0; j < s.cols(); ++j) ga(i, j) = s(i, j) * (g(i, j) - dot);
    }
    t.accumulate(a, ga);
  });
}

Var mean_rows(Var a) {
  const Matrix& av = a.value();
  if (av.rows() == 0) throw ShapeError("mean_rows: no rows");
  Matrix out(1, av.cols());
  for (std::size_t i = 0; i < av.rows(); ++i)
    for (std::size_t j = 0; j < av.cols(); ++j) out(0, j) += av(i, j);
  const Real inv = Real(1) / static_cast<Real>(av.rows());
  for (auto& v : out.data()) v *= inv;
  const Var in[] = {a};
  return a.tape().record(std::move(out), in, [a, inv](Tape& t, const Matrix& g, const Matrix&) {
    Matrix ga(a.rows(), a.cols());
    for (std::size_t i = 0; i < ga.rows(); ++i)
      for (std::size_t j = 0; j < ga.cols(); ++j) ga(i, j) = g(0, j) * inv;
    t.accumulate(a, ga);
  });
}

Var concat_cols(Var a, Var b) {
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.rows() != bv.rows()) {
    throw ShapeError("concat_cols: row counts differ (" + av.shape_string() + " vs " +
                     bv.shape_string() + ")");
  }
  Matrix out(av.rows(), av.cols() + bv.cols());
  for (std::size_t i = 0; i < av.rows(); ++i) {
    std::copy(av.row(i).begin(), av.row(i).end(), out.row(i).begin());
    std::copy(bv.row(i).begin(), bv.row(i).end(), out.row(i).begin() + av.cols());
  }
  const Var in[] = {a, b};
  return a.tape().record(std::move(out), in, [a, b](Tape& t, const Matrix& g, const Matrix&) {
    const std::size_t ca = a.cols();
    Matrix ga(a.rows(), ca);
    Matrix gb(b.rows(), b.cols());
    for (std::size_t i = 0; i < g.rows(); ++i) {
      std::copy(g.row(i).begin(), g.row(i).begin() + ca, ga.row(i).begin());
      std::copy(g.row(i).begin() + ca, g.row(i).end(), gb.row(i).begin());
    }
    t.accumulate(a, ga);
    t.accumulate(b, gb);
  });
}

Var stack_rows(std::span<const Var> rows) {
  if (rows.empty()) throw ShapeError("stack_rows: no rows");
  const std::size_t c = rows.front().cols();
  Matrix out(rows.size(), c);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Matrix& r = rows[i].value();
    if (r.rows() != 1 || r.cols() != c) {
      throw ShapeError("stack_rows: expected 1x" + std::to_string(c) + ", got " + r.shape_string());
    }
    std::copy(r.data().begin(), r.data().end(), out.row(i).begin());
  }
  std::vector<Var> captured(rows.begin(), rows.end());
  return rows.front().tape().record(std::move(out), rows, [captured](Tape& t, const Matrix& g, const Matrix&) {
    for (std::size_t i = 0; i < captured.size(); ++i) {
      if (!t.requires_grad(captured[i])) continue;
      Matrix gi(1, g.cols());
      std::copy(g.row(i).begin(), g.row(i).end(), gi.data().begin());
      t.accumulate(captured[i], gi);
    }
  });
}

Var replace_rows(Var a, Var row, std::span<const std::size_t> indices) {
  const Matrix& av = a.value();
  const Matrix& rv = row.value();
  if (rv.rows() != 1 || rv.cols() != av.cols()) {
    throw ShapeError("replace_rows: expected 1x" + std::to_string(av.cols()) + " row, got " +
                     rv.shape_string());
  }
  std::vector<char> replaced(av.rows(), 0);
  for (std::size_t idx : indices) {
    if (idx >= av.rows()) throw ShapeError("replace_rows: row index out of range");
    replaced[idx] = 1;
  }
  Matrix out = av;
  for (std::size_t i = 0; i < out.rows(); ++i)
    if (replaced[i]) std::copy(rv.data().begin(), rv.data().end(), out.row(i).begin());
  const Var in[] = {a, row};
  return a.tape().record(std::move(out), in, [a, row, replaced](Tape& t, const Matrix& g, const Matrix&) {
    if (t.requires_grad(a)) {
      Matrix ga = g;
      for (std::size_t i = 0; i < ga.rows(); ++i)
        if (replaced[i]) std::fill(ga.row(i).begin(), ga.row(i).end(), Real(0));
      t.accumulate(a, ga);
    }
    if (t.requires_grad(row)) {
      Matrix gr(1, g.cols());
      for (std::size_t i = 0; i < g.rows(); ++i) {
        if (!replaced[i]) continue;
        for (std::size_t j = 0; j < g.cols(); ++j) gr(0, j) += g(i, j);
      }
      t.accumulate(row, gr);
    }
  });
}

Var sum(Var a) {
  Real s = 0;
  for (Real v : a.value().data()) s += v;
  const Var in[] = {a};
  return a.tape().record(Matrix(1, 1, s), in, [a](Tape& t, const Matrix& g, const Matrix&) {
    t.accumulate(a, Matrix(a.rows(), a.cols(), g(0, 0)));
  });
}

Var bce_with_logits(Var logits, const Matrix& target) {
  const Matrix& z = logits.value();
  require_same("bce_with_logits", z, target);
  // log(1 + exp(-|z|)) + max(z, 0) - z*y
  Real total = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const Real x = z[i];
    total += std::max(x, Real(0)) - x * target[i] + std::log1p(std::exp(-std::abs(x)));
  }
  const Real inv = Real(1) / static_cast<Real>(z.size());
  const Var in[] = {logits};
  return logits.tape().record(Matrix(1, 1, total * inv), in,
                              [logits, target, inv](Tape& t, const Matrix& g, const Matrix&) {
                                const Matrix& zz = logits.value();
                                Matrix gz(zz.rows(), zz.cols());
                                for (std::size_t i = 0; i < gz.size(); ++i)
                                  gz[i] = g(0, 0) * inv * (stable_sigmoid(zz[i]) - target[i]);
                                t.accumulate(logits, gz);
                              });
}

Var softmax_cross_entropy(Var logits, const Matrix& target) {
  const Matrix& z = logits.value();
  require_same("softmax_cross_entropy", z, target);
  const Matrix probs = mfm::rowsoftmax(z);
  Real total = 0;
  for (std::size_t i = 0; i < z.rows(); ++i) {
    auto row = z.row(i);
    const Real mx = *std::max_element(row.begin(), row.end());
    Real se = 0;
    for (Real v : row) se += std::exp(v - mx);
    const Real lse = mx + std::log(se);
    for (std::size_t j = 0; j < z.cols(); ++j) total += target(i, j) * (lse - z(i, j));
  }
  const Var in[] = {logits};
  return logits.tape().record(Matrix(1, 1, total), in,
                              [logits, target, probs](Tape& t, const Matrix& g, const Matrix&) {
                                Matrix gz(probs.rows(), probs.cols());
                                for (std::size_t i = 0; i < probs.rows(); ++i) {
                                  Real mass = 0;
                                  for (std::size_t j = 0; j < probs.cols(); ++j) mass += target(i, j);
                                  for (std::size_t j = 0; j < probs.cols(); ++j)
                                    gz(i, j) = g(0, 0) * (mass * probs(i, j) - target(i, j));
                                }
                                t.accumulate(logits, gz);
                              });
}

}  // namespace ad
}  // namespace mfm
