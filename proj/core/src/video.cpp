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

#include "mfm/video.hpp"

#include <limits>

#include "binary_io.hpp"
#include "mfm/error.hpp"

namespace mfm {

namespace {

constexpr std::uint32_t kHasFrames = 1;
constexpr std::uint32_t kHasPatches = 2;
constexpr std::uint32_t kHasLabel = 4;

Matrix widen(const float* data, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows * cols; ++i) m[i] = static_cast<Real>(data[i]);
  return m;
}

void check_size(const char* what, std::size_t actual, std::size_t expected, const std::string& id) {
  if (actual != expected) {
    throw DataError("video '" + id + "': " + what + " payload has " + std::to_string(actual) +
                    " values, dimensions require " + std::to_string(expected));
  }
}

}  // namespace

Matrix VideoFeatures::object_matrix() const {
  return widen(object_data.data(), frames * objects, features);
}

Matrix VideoFeatures::frame_objects(std::size_t n) const {
  if (n >= frames) throw ShapeError("frame index out of range");
  return widen(object_data.data() + n * objects * features, objects, features);
}

Matrix VideoFeatures::frame_matrix() const {
  if (!frame_data) throw DataError("video '" + id + "' has no frame features");
  return widen(frame_data->data(), frames, features);
}

PatchView VideoFeatures::patch_view() const {
  if (!patch_data) throw DataError("video '" + id + "' has no patch embeddings");
  return PatchView{frames, objects, patches, patch_dim, *patch_data};
}

void VideoFeatures::validate() const {
  if (frames == 0 || objects == 0 || features == 0) {
    throw DataError("video '" + id + "': N, K and F must all be >= 1");
  }
  check_size("object", object_data.size(), frames * objects * features, id);
  if (frame_data) check_size("frame", frame_data->size(), frames * features, id);
  if (patch_data) {
    if (patches == 0 || patch_dim == 0) {
      throw DataError("video '" + id + "': Q and D must be >= 1 when patches are present");
    }
    check_size("patch", patch_data->size(), frames * objects * patches * patch_dim, id);
  }
}

void write_video(const std::filesystem::path& path, const VideoFeatures& video) {
  video.validate();
  detail::ByteWriter w;
  w.bytes("MFMV");
  w.u32(kVideoVersion);
  std::uint32_t flags = 0;
  if (video.frame_data) flags |= kHasFrames;
  if (video.patch_data) flags |= kHasPatches;
  if (video.label) flags |= kHasLabel;
  w.u32(flags);
  w.u32(static_cast<std::uint32_t>(video.frames));
  w.u32(static_cast<std::uint32_t>(video.objects));
  w.u32(static_cast<std::uint32_t>(video.features));
  w.u32(static_cast<std::uint32_t>(video.patch_data ? video.patches : 0));
  w.u32(static_cast<std::uint32_t>(video.patch_data ? video.patch_dim : 0));
  w.i32(video.label.value_or(-1));
  w.u32(static_cast<std::uint32_t>(video.id.size()));
  w.bytes(video.id);
  for (float v : video.object_data) w.f32(v);
  if (video.frame_data)
    for (float v : *video.frame_data) w.f32(v);
  if (video.patch_data)
    for (float v : *video.patch_data) w.f32(v);
  detail::write_file_atomic(path, w.buffer());
}

namespace {

std::uint64_t checked_product(detail::ByteReader& r, std::initializer_list<std::uint64_t> dims) {
  std::uint64_t out = 1;
  for (std::uint64_t d : dims) {
    if (d != 0 && out > std::numeric_limits<std::uint64_t>::max() / d) r.fail("dimension product overflows");
    out *= d;
  }
  return out;
}

std::vector<float> read_floats(detail::ByteReader& r, std::uint64_t count, const char* section) {
  r.require_elements(count, 4, section);
  std::vector<float> out(count);
  for (auto& v : out) v = r.f32(section);
  return out;
}

}  // namespace

VideoFeatures read_video(const std::filesystem::path& path) {
  detail::ByteReader r(detail::read_file(path), path.string());
  if (r.bytes(4, "magic") != "MFMV") r.fail("bad video magic");
  if (const auto version = r.u32("version"); version != kVideoVersion) {
    r.fail("unsupported video container version " + std::to_string(version));
  }
  const std::uint32_t flags = r.u32("flags");
  if (flags & ~(kHasFrames | kHasPatches | kHasLabel)) r.fail("unknown section flags");
  VideoFeatures v;
  v.frames = r.u32("header N");
  v.objects = r.u32("header K");
  v.features = r.u32("header F");
  const std::uint32_t Q = r.u32("header Q");
  const std::uint32_t D = r.u32("header D");
  const std::int32_t label = r.i32("header label");
  const std::uint32_t id_len = r.u32("id length");
  v.id = r.bytes(id_len, "id");
  if (v.frames == 0 || v.objects == 0 || v.features == 0) r.fail("zero N, K or F in header");

  v.object_data =
      read_floats(r, checked_product(r, {v.frames, v.objects, v.features}), "objects section");
  if (flags & kHasFrames) {
    v.frame_data = read_floats(r, checked_product(r, {v.frames, v.features}), "frames section");
  }
  if (flags & kHasPatches) {
    if (Q == 0 || D == 0) r.fail("patch section declared with zero Q or D");
    v.patches = Q;
    v.patch_dim = D;
    v.patch_data =
        read_floats(r, checked_product(r, {v.frames, v.objects, Q, D}), "patches section");
  }
  if (flags & kHasLabel) {
    if (label < 0) r.fail("negative label");
    v.label = label;
  }
  r.expect_end();
  return v;
}

}  // namespace mfm
