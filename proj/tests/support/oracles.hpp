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

// Independent reference implementations used as test oracles. They work on
// nested std::vector<double> and share no code with mfm_core's kernels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "mfm/matrix.hpp"

namespace oracle {

using Mat = std::vector<std::vector<double>>;
using Vec = std::vector<double>;

inline Mat from(const mfm::Matrix& m) {
  Mat out(m.rows(), Vec(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

inline Mat matmul(const Mat& a, const Mat& b) {
  const std::size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
  Mat out(n, Vec(m, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0;
      for (std::size_t t = 0; t < k; ++t) s += a[i][t] * b[t][j];
      out[i][j] = s;
    }
  return out;
}

inline Vec softmax(const Vec& row) {
  // Direct exp/sum, no max subtraction; callers keep inputs small.
  Vec out(row.size());
  double sum = 0;
  for (std::size_t j = 0; j < row.size(); ++j) sum += std::exp(row[j]);
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = std::exp(row[j]) / sum;
  return out;
}

inline double relu(double x) { return x > 0 ? x : 0; }

/// Straight-line graph attention block.
inline Vec gat(const Mat& Y, const Mat& U, const Mat& V, const Mat& W1, const Mat& W2, const Vec& wp) {
  const std::size_t M = Y.size(), F = Y[0].size(), Fa = U[0].size();
  // Projections
  Mat P(M, Vec(Fa, 0.0)), R(M, Vec(Fa, 0.0));
  for (std::size_t i = 0; i < M; ++i)
    for (std::size_t a = 0; a < Fa; ++a)
      for (std::size_t f = 0; f < F; ++f) {
        P[i][a] += Y[i][f] * U[f][a];
        R[i][a] += Y[i][f] * V[f][a];
      }
  // Adjacency
  Mat A(M, Vec(M, 0.0));
  for (std::size_t i = 0; i < M; ++i) {
    Vec s(M, 0.0);
    for (std::size_t j = 0; j < M; ++j) {
      for (std::size_t a = 0; a < Fa; ++a) s[j] += P[i][a] * R[j][a];
      s[j] /= std::sqrt(static_cast<double>(Fa));
    }
    A[i] = softmax(s);
  }
  auto layer = [&](const Mat& X, const Mat& W) {
    Mat AX(M, Vec(F, 0.0));
    for (std::size_t i = 0; i < M; ++i)
      for (std::size_t j = 0; j < M; ++j)
        for (std::size_t f = 0; f < F; ++f) AX[i][f] += A[i][j] * X[j][f];
    Mat H(M, Vec(F, 0.0));
    for (std::size_t i = 0; i < M; ++i)
      for (std::size_t g = 0; g < F; ++g) {
        double s = 0;
        for (std::size_t f = 0; f < F; ++f) s += AX[i][f] * W[f][g];
        H[i][g] = relu(s);
      }
    return H;
  };
  const Mat H1 = layer(Y, W1);
  const Mat H2 = layer(H1, W2);
  Vec e(M, 0.0);
  for (std::size_t i = 0; i < M; ++i)
    for (std::size_t f = 0; f < F; ++f) e[i] += H2[i][f] * wp[f];
  const Vec alpha = softmax(e);
  Vec out(F, 0.0);
  for (std::size_t i = 0; i < M; ++i)
    for (std::size_t f = 0; f < F; ++f) out[f] += alpha[i] * H2[i][f];
  return out;
}

/// Exhaustive cosine scan; ties toward the smallest index.
template <typename T>
std::size_t cosine_scan(const std::vector<T>& h, const Mat& entries) {
  double hn = 0;
  for (T x : h) hn += static_cast<double>(x) * x;
  hn = std::sqrt(hn);
  std::size_t best = 0;
  double best_cos = -2;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    double dot = 0, en = 0;
    for (std::size_t d = 0; d < h.size(); ++d) {
      dot += static_cast<double>(h[d]) * entries[i][d];
      en += entries[i][d] * entries[i][d];
    }
    const double c = dot / (hn * std::sqrt(en));
    if (c > best_cos) {
      best_cos = c;
      best = i;
    }
  }
  return best;
}

/// Stable sort by descending count, first r positions set.
inline std::vector<std::uint8_t> stable_topr(const std::vector<std::uint32_t>& u, std::size_t r) {
  std::vector<std::size_t> idx(u.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return u[a] > u[b]; });
  std::vector<std::uint8_t> v(u.size(), 0);
  for (std::size_t i = 0; i < r; ++i) v[idx[i]] = 1;
  return v;
}

/// Mean binary cross-entropy from the probability form.
inline double bce(const Vec& logits, const std::vector<std::uint8_t>& v) {
  double s = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double g = 1.0 / (1.0 + std::exp(-logits[i]));
    s += v[i] ? std::log(g) : std::log(1.0 - g);
  }
  return -s / static_cast<double>(logits.size());
}

}  // namespace oracle
