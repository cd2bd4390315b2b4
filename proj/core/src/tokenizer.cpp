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

#include "mfm/tokenizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "binary_io.hpp"
#include "mfm/error.hpp"
#include "mfm/rng.hpp"

namespace mfm {

Codebook::Codebook(Matrix entries) : entries_(std::move(entries)), unit_(entries_) {
  if (entries_.rows() == 0 || entries_.cols() == 0) {
    throw DataError("codebook must have L >= 1 and D >= 1, got " + entries_.shape_string());
  }
  for (std::size_t i = 0; i < entries_.rows(); ++i) {
    double sq = 0;
    for (Real v : entries_.row(i)) sq += static_cast<double>(v) * v;
    const double norm = std::sqrt(sq);
    if (!(norm > 0) || !std::isfinite(norm)) {
      throw DataError("codebook entry " + std::to_string(i) + " has zero or non-finite norm");
    }
    for (Real& v : unit_.row(i)) v = static_cast<Real>(v / norm);
  }
}

Codebook load_codebook(const std::filesystem::path& path) {
  detail::ByteReader r(detail::read_file(path), path.string());
  if (r.bytes(4, "magic") != "MFMC") r.fail("bad codebook magic");
  if (const auto version = r.u32("version"); version != kCodebookVersion) {
    r.fail("unsupported codebook version " + std::to_string(version));
  }
  const std::uint32_t L = r.u32("L");
  const std::uint32_t D = r.u32("D");
  if (L == 0 || D == 0) r.fail("codebook dimensions must be nonzero");
  const std::uint64_t n = static_cast<std::uint64_t>(L) * D;
  r.require_elements(n, 4, "codebook entries");
  std::vector<Real> data(n);
  for (auto& v : data) v = static_cast<Real>(r.f32("codebook entries"));
  r.expect_end();
  return Codebook(Matrix(L, D, std::move(data)));
}

void save_codebook(const std::filesystem::path& path, const Codebook& codebook) {
  detail::ByteWriter w;
  w.bytes("MFMC");
  w.u32(kCodebookVersion);
  w.u32(static_cast<std::uint32_t>(codebook.size()));
  w.u32(static_cast<std::uint32_t>(codebook.dim()));
  for (Real v : codebook.entries().data()) w.f32(static_cast<float>(v));
  detail::write_file_atomic(path, w.buffer());
}

Codebook generate_codebook(std::size_t L, std::size_t D, std::uint64_t seed) {
  if (L == 0 || D == 0) throw ShapeError("generate_codebook: L and D must be >= 1");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix entries(L, D);
  for (std::size_t i = 0; i < L; ++i) {
    double sq = 0;
    do {
      sq = 0;
      for (Real& v : entries.row(i)) {
        v = static_cast<Real>(normal(rng));
        sq += static_cast<double>(v) * v;
      }
    } while (sq == 0);
    const double norm = std::sqrt(sq);
    for (Real& v : entries.row(i)) v = static_cast<Real>(v / norm);
  }
  return Codebook(std::move(entries));
}

namespace {

template <typename T>
std::size_t quantize_impl(std::span<const T> h, const Codebook& codebook) {
  if (h.size() != codebook.dim()) {
    throw ShapeError("quantize: embedding has dimension " + std::to_string(h.size()) +
                     ", codebook has " + std::to_string(codebook.dim()));
  }
  double sq = 0;
  for (T x : h) sq += static_cast<double>(x) * x;
  if (!(sq > 0)) throw ShapeError("quantize: zero-norm embedding");
  // cos(h, e_i) = <h, ê_i> / |h|; |h| is common to every i so the argmax only
  // needs the projection onto the unit entries.
  const Matrix& unit = codebook.unit_entries();
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < unit.rows(); ++i) {
    auto e = unit.row(i);
    double dot = 0;
    for (std::size_t j = 0; j < h.size(); ++j) dot += static_cast<double>(h[j]) * e[j];
    if (dot > best_score) {
      best_score = dot;
      best = i;
    }
  }
  return best;
}

}  // namespace

std::size_t quantize(std::span<const float> h, const Codebook& codebook) {
  return quantize_impl(h, codebook);
}

std::size_t quantize(std::span<const double> h, const Codebook& codebook) {
  return quantize_impl(h, codebook);
}

std::vector<std::uint8_t> top_r(std::span<const std::uint32_t> u, std::size_t r) {
  if (r < 1 || r > u.size()) {
    throw ShapeError("top_r: r = " + std::to_string(r) + " outside [1, " +
                     std::to_string(u.size()) + "]");
  }
  std::vector<std::size_t> order(u.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(r), order.end(),
                    [&](std::size_t a, std::size_t b) { return u[a] != u[b] ? u[a] > u[b] : a < b; });
  std::vector<std::uint8_t> v(u.size(), 0);
  for (std::size_t i = 0; i < r; ++i) v[order[i]] = 1;
  return v;
}

Matrix TokenTarget::target_row() const {
  Matrix m(1, topr.size());
  for (std::size_t i = 0; i < topr.size(); ++i) m(0, i) = topr[i] ? Real(1) : Real(0);
  return m;
}

TokenTarget tokenize_video(const PatchView& patches, const Codebook& codebook, std::size_t r) {
  const std::size_t L = codebook.size();
  if (r < 1 || r > L) {
    throw ShapeError("tokenize_video: r = " + std::to_string(r) + " outside [1, " +
                     std::to_string(L) + "]");
  }
  if (patches.dim != codebook.dim()) {
    throw ShapeError("tokenize_video: patch dimension " + std::to_string(patches.dim) +
                     " does not match codebook dimension " + std::to_string(codebook.dim()));
  }
  const std::size_t D = patches.dim;
  const std::size_t total = patches.frames * patches.objects * patches.patches;
  if (patches.data.size() != total * D) {
    throw ShapeError("tokenize_video: patch payload size does not match declared dimensions");
  }
  TokenTarget target;
  target.counts.assign(L, 0);
  target.r = r;
  for (std::size_t p = 0; p < total; ++p) {
    auto h = patches.data.subspan(p * D, D);
    const bool nonzero = std::any_of(h.begin(), h.end(), [](float x) { return x != 0.0f; });
    if (!nonzero) {
      const std::size_t j = p % patches.patches;
      const std::size_t k = (p / patches.patches) % patches.objects;
      const std::size_t n = p / (patches.patches * patches.objects);
      throw DataError("zero-norm patch embedding at (frame " + std::to_string(n) + ", object " +
                      std::to_string(k) + ", patch " + std::to_string(j) + ")");
    }
    ++target.counts[quantize(h, codebook)];
  }
  target.topr = top_r(target.counts, r);
  return target;
}

}  // namespace mfm
