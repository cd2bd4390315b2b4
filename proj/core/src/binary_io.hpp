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

// Little-endian byte encoding shared by the codebook, video and checkpoint
// containers. Internal to mfm_core.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mfm/error.hpp"

namespace mfm::detail {

class ByteWriter {
 public:
  void bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

  const std::vector<char>& buffer() const { return buf_; }

 private:
  std::vector<char> buf_;
};

/// Bounds-checked reader; every failure names the section and byte offset.
class ByteReader {
 public:
  ByteReader(std::vector<char> data, std::string source)
      : data_(std::move(data)), source_(std::move(source)) {}

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

  void require(std::size_t n, std::string_view section) const {
    if (remaining() < n) {
      throw DataError(source_ + ": truncated " + std::string(section) + " at offset " +
                      std::to_string(pos_) + " (need " + std::to_string(n) + " bytes, have " +
                      std::to_string(remaining()) + ")");
    }
  }

  void require_elements(std::uint64_t count, std::size_t width, std::string_view section) const {
    if (count > remaining() / width) {
      throw DataError(source_ + ": truncated " + std::string(section) + " at offset " +
                      std::to_string(pos_) + " (need " + std::to_string(count) + " elements of " +
                      std::to_string(width) + " bytes, have " + std::to_string(remaining()) +
                      " bytes)");
    }
  }

  [[noreturn]] void fail(std::string_view what) const {
    throw DataError(source_ + ": " + std::string(what) + " at offset " + std::to_string(pos_));
  }

  std::string bytes(std::size_t n, std::string_view section) {
    require(n, section);
    std::string out(data_.data() + pos_, n);
    pos_ += n;
    return out;
  }
  std::uint32_t u32(std::string_view section) {
    require(4, section);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::int32_t i32(std::string_view section) { return static_cast<std::int32_t>(u32(section)); }
  std::uint64_t u64(std::string_view section) {
    require(8, section);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  float f32(std::string_view section) { return std::bit_cast<float>(u32(section)); }
  double f64(std::string_view section) { return std::bit_cast<double>(u64(section)); }

  void expect_end() const {
    if (remaining() != 0) fail(std::to_string(remaining()) + " trailing bytes");
  }

 private:
  std::vector<char> data_;
  std::string source_;
  std::size_t pos_ = 0;
};

std::vector<char> read_file(const std::filesystem::path& path);
// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::vector<char>& bytes);

}  // namespace mfm::detail
