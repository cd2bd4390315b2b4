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

#include <filesystem>
#include <map>
#include <string>

#include "mfm/matrix.hpp"

namespace mfm {

/// Named tensors in key order. This is the in-memory form of a checkpoint
/// or model file.
using TensorArchive = std::map<std::string, Matrix>;

// On disk:
//   "MFMK" | u32 version=1 | u32 count |
//   count × ( u32 name_len | name | u32 rows | u32 cols | rows·cols × f64 )
// All integers and floats little-endian. Writes are atomic.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_archive(const std::filesystem::path& path, const TensorArchive& archive);
TensorArchive read_archive(const std::filesystem::path& path);

// Throws DataError naming the key when it is absent or has the wrong shape.
const Matrix& archive_get(const TensorArchive& archive, const std::string& key);
const Matrix& archive_get(const TensorArchive& archive, const std::string& key, std::size_t rows,
                          std::size_t cols);

}  // namespace mfm
