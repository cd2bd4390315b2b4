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
#include <filesystem>
#include <span>
#include <vector>

#include "mfm/matrix.hpp"

namespace mfm {

/// Visual vocabulary: L embeddings of dimension D, every one with nonzero
/// norm. Unit-normalized copies are kept for cosine scoring.
class Codebook {
 public:
  explicit Codebook(Matrix entries);

  std::size_t size() const noexcept { return entries_.rows(); }   // L
  std::size_t dim() const noexcept { return entries_.cols(); }     // D
  const Matrix& entries() const noexcept { return entries_; }
  const Matrix& unit_entries() const noexcept { return unit_; }

 private:
  Matrix entries_;
  Matrix unit_;
};

// Codebook file: "MFMC" | u32 version=1 | u32 L | u32 D | L·D × f32, little-endian.
inline constexpr std::uint32_t kCodebookVersion = 1;

Codebook load_codebook(const std::filesystem::path& path);
void save_codebook(const std::filesystem::path& path, const Codebook& codebook);
/// Entries drawn i.i.d. standard normal, then scaled to unit norm.
Codebook generate_codebook(std::size_t L, std::size_t D, std::uint64_t seed);

/// Index of the entry with the largest cosine similarity to h; ties go to the
/// smallest index. Throws ShapeError on dimension mismatch or zero-norm h.
std::size_t quantize(std::span<const float> h, const Codebook& codebook);
std::size_t quantize(std::span<const double> h, const Codebook& codebook);

/// Binary vector with ones at the r largest counts; among equal counts the
/// smaller index wins. Requires 1 ≤ r ≤ u.size().
std::vector<std::uint8_t> top_r(std::span<const std::uint32_t> u, std::size_t r);

/// Patch embeddings of one video, laid out [frame][object][patch][dim].
struct PatchView {
  std::size_t frames = 0;   // N
  std::size_t objects = 0;  // K
  std::size_t patches = 0;  // Q
  std::size_t dim = 0;      // D
  std::span<const float> data;
};

struct TokenTarget {
  std::vector<std::uint32_t> counts;  // u, length L
  std::vector<std::uint8_t> topr;     // v, length L
  std::size_t r = 0;

  Matrix target_row() const;  // v as a 1×L matrix
};

/// Histogram of quantized patches and its top-r binarization. A zero-norm
/// patch raises DataError naming its (frame, object, patch) coordinates.
TokenTarget tokenize_video(const PatchView& patches, const Codebook& codebook, std::size_t r);

}  // namespace mfm
