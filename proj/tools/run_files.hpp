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
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

namespace mfm::cli {

inline constexpr const char* kRunManifest = "run.cfg";
inline constexpr const char* kMetricsLog = "metrics.log";

/// One "k=v k=v ..." record. Doubles are written with enough digits to
/// round-trip.
class Record {
 public:
  Record& add(std::string_view key, double value);
  Record& add(std::string_view key, long long value);
  Record& add(std::string_view key, int value) { return add(key, static_cast<long long>(value)); }
  Record& add(std::string_view key, std::size_t value) {
    return add(key, static_cast<long long>(value));
  }
  Record& add(std::string_view key, std::string_view value);
  std::string str() const { return out_.str(); }

 private:
  void key(std::string_view k);
  std::ostringstream out_;
  bool first_ = true;
};

/// Output directory of one run: the effective-config manifest, written up
/// front, and a metrics log appended one record per line.
class RunFiles {
 public:
  RunFiles(const std::filesystem::path& dir, std::string_view command, const std::string& config);

  void log(const Record& record);
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::ofstream metrics_;
};

}  // namespace mfm::cli
