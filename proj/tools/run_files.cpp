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

#include "run_files.hpp"

#include <iomanip>
#include <limits>

#include "mfm/error.hpp"

#ifndef MFM_VERSION_STRING
#define MFM_VERSION_STRING "unknown"
#endif

namespace mfm::cli {

void Record::key(std::string_view k) {
  if (!first_) out_ << ' ';
  first_ = false;
  out_ << k << '=';
}

Record& Record::add(std::string_view k, double value) {
  key(k);
  out_ << std::setprecision(std::numeric_limits<double>::max_digits10) << value;
  return *this;
}

Record& Record::add(std::string_view k, long long value) {
  key(k);
  out_ << value;
  return *this;
}

Record& Record::add(std::string_view k, std::string_view value) {
  key(k);
  out_ << value;
  return *this;
}

RunFiles::RunFiles(const std::filesystem::path& dir, std::string_view command,
                   const std::string& config)
    : dir_(dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + dir.string() + ": " + ec.message());
  std::ofstream manifest(dir / kRunManifest, std::ios::trunc);
  manifest << "# mfm " << MFM_VERSION_STRING << ' ' << command << '\n' << config;
  if (!manifest) throw DataError("cannot write " + (dir / kRunManifest).string());
  metrics_.open(dir / kMetricsLog, std::ios::trunc);
  if (!metrics_) throw DataError("cannot write " + (dir / kMetricsLog).string());
}

void RunFiles::log(const Record& record) {
  metrics_ << record.str() << '\n';
  metrics_.flush();
}

}  // namespace mfm::cli
