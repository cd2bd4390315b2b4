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

// Seeded generators for property tests. Each property runs a fixed number of
// cases; a failing case reports its index so it can be replayed.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "mfm/matrix.hpp"

namespace gen {

class Source {
 public:
  explicit Source(std::uint64_t seed) : rng_(seed) {}

  std::size_t size(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }

  mfm::Matrix matrix(std::size_t rows, std::size_t cols, double scale = 1.0) {
    mfm::Matrix m(rows, cols);
    for (mfm::Real& v : m.data()) v = static_cast<mfm::Real>(scale * normal());
    return m;
  }

  std::vector<float> floats(std::size_t n, double scale = 1.0) {
    std::vector<float> v(n);
    for (float& x : v) x = static_cast<float>(scale * normal());
    return v;
  }

  std::vector<std::size_t> permutation(std::size_t n) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), std::size_t{0});
    std::shuffle(p.begin(), p.end(), rng_);
    return p;
  }

  // Counts drawn from a small range so that ties are common.
  std::vector<std::uint32_t> tied_counts(std::size_t n, std::uint32_t max_value) {
    std::vector<std::uint32_t> u(n);
    std::uniform_int_distribution<std::uint32_t> d(0, max_value);
    for (auto& x : u) x = d(rng_);
    return u;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline mfm::Matrix permute_rows(const mfm::Matrix& m, const std::vector<std::size_t>& perm) {
  mfm::Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    auto src = m.row(perm[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

inline double max_relative_diff(const mfm::Matrix& a, const mfm::Matrix& b) {
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::abs(double(a[i])), std::abs(double(b[i])), 1.0});
    worst = std::max(worst, std::abs(double(a[i]) - double(b[i])) / scale);
  }
  return worst;
}

}  // namespace gen
