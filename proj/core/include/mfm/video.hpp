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
#include <optional>
#include <string>
#include <vector>

#include "mfm/matrix.hpp"
#include "mfm/tokenizer.hpp"

namespace mfm {

/// Precomputed features of one video. Payloads are kept as float32, the
/// on-disk precision, and widened to Real when a matrix is requested.
struct VideoFeatures {
  std::string id;
  std::size_t frames = 0;    // N
  std::size_t objects = 0;   // K
  std::size_t features = 0;  // F

  std::vector<float> object_data;                // N×K×F
  std::optional<std::vector<float>> frame_data;  // N×F
  std::size_t patches = 0;                       // Q, meaningful with patch_data
  std::size_t patch_dim = 0;                     // D, meaningful with patch_data
  std::optional<std::vector<float>> patch_data;  // N×K×Q×D
  std::optional<int> label;

  bool has_frames() const { return frame_data.has_value(); }
  bool has_patches() const { return patch_data.has_value(); }

  /// All N·K object rows as one (N·K)×F matrix, frame-major.
  Matrix object_matrix() const;
  /// The K object rows of frame n.
  Matrix frame_objects(std::size_t n) const;
  /// N×F frame-level features; requires has_frames().
  Matrix frame_matrix() const;
  PatchView patch_view() const;

  /// Throws DataError when declared dimensions disagree with payload sizes.
  void validate() const;

  friend bool operator==(const VideoFeatures&, const VideoFeatures&) = default;
};

// Container layout, little-endian:
//   "MFMV" | u32 version=1 | u32 flags (1 frames, 2 patches, 4 label) |
//   u32 N | u32 K | u32 F | u32 Q | u32 D | i32 label | u32 id_len | id |
//   objects N·K·F f32 | [frames N·F f32] | [patches N·K·Q·D f32]
inline constexpr std::uint32_t kVideoVersion = 1;

void write_video(const std::filesystem::path& path, const VideoFeatures& video);
VideoFeatures read_video(const std::filesystem::path& path);

}  // namespace mfm
