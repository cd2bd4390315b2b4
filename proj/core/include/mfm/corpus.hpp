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
#include <optional>
#include <string>
#include <vector>

#include "mfm/video.hpp"

namespace mfm {

struct ManifestEntry {
  std::string id;
  std::filesystem::path path;  // relative paths resolve against the manifest's directory
  std::optional<int> label;
};

struct CorpusManifest {
  std::string split;
  std::vector<ManifestEntry> entries;
};

/// UTF-8 lines "id<TAB>path[<TAB>label]". A leading "# split=<name>" line
/// names the split; other '#' lines are comments.
CorpusManifest parse_manifest(const std::string& text, const std::string& source = "manifest");
std::string format_manifest(const CorpusManifest& manifest);

inline constexpr const char* kManifestName = "manifest.tsv";

/// Reads <dir>/manifest.tsv and every listed video. Ids must be unique and
/// match the ids stored in the containers.
std::vector<VideoFeatures> load_corpus(const std::filesystem::path& dir);
CorpusManifest read_manifest(const std::filesystem::path& dir);

/// Writes videos/<id>.mfmv for each video plus the manifest.
void write_corpus(const std::filesystem::path& dir, const std::vector<VideoFeatures>& videos,
                  const std::string& split);

}  // namespace mfm
