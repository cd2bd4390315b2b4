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

#include "mfm/tensor_archive.hpp"

#include <fstream>
#include <system_error>

#include "binary_io.hpp"
#include "mfm/error.hpp"

namespace mfm {

namespace detail {

std::vector<char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return std::vector<char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_atomic(const std::filesystem::path& path, const std::vector<char>& bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw DataError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

}  // namespace detail

void write_archive(const std::filesystem::path& path, const TensorArchive& archive) {
  detail::ByteWriter w;
  w.bytes("MFMK");
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(archive.size()));
  for (const auto& [name, m] : archive) {
    w.u32(static_cast<std::uint32_t>(name.size()));
    w.bytes(name);
    w.u32(static_cast<std::uint32_t>(m.rows()));
    w.u32(static_cast<std::uint32_t>(m.cols()));
    for (Real v : m.data()) w.f64(static_cast<double>(v));
  }
  detail::write_file_atomic(path, w.buffer());
}

TensorArchive read_archive(const std::filesystem::path& path) {
  detail::ByteReader r(detail::read_file(path), path.string());
  if (r.bytes(4, "magic") != "MFMK") r.fail("bad checkpoint magic");
  if (const auto version = r.u32("version"); version != kCheckpointVersion) {
    r.fail("unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint32_t count = r.u32("tensor count");
  TensorArchive archive;
  for (std::uint32_t t = 0; t < count; ++t) {
    const std::uint32_t name_len = r.u32("tensor name length");
    std::string name = r.bytes(name_len, "tensor name");
    const std::uint32_t rows = r.u32("tensor rows");
    const std::uint32_t cols = r.u32("tensor cols");
    const std::uint64_t n = static_cast<std::uint64_t>(rows) * cols;
    r.require_elements(n, 8, "tensor '" + name + "' payload");
    std::vector<Real> data(n);
    for (auto& v : data) v = static_cast<Real>(r.f64("tensor payload"));
    if (!archive.emplace(name, Matrix(rows, cols, std::move(data))).second) {
      r.fail("duplicate tensor '" + name + "'");
    }
  }
  r.expect_end();
  return archive;
}

const Matrix& archive_get(const TensorArchive& archive, const std::string& key) {
  auto it = archive.find(key);
  if (it == archive.end()) throw DataError("checkpoint has no tensor '" + key + "'");
  return it->second;
}

const Matrix& archive_get(const TensorArchive& archive, const std::string& key, std::size_t rows,
                          std::size_t cols) {
  const Matrix& m = archive_get(archive, key);
  if (m.rows() != rows || m.cols() != cols) {
    throw DataError("tensor '" + key + "' is " + m.shape_string() + ", expected " +
                    std::to_string(rows) + "x" + std::to_string(cols));
  }
  return m;
}

}  // namespace mfm
