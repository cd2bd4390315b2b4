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

#include "mfm/corpus.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "mfm/error.hpp"

namespace mfm {

CorpusManifest parse_manifest(const std::string& text, const std::string& source) {
  CorpusManifest manifest;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      constexpr std::string_view kSplit = "# split=";
      if (line.rfind(kSplit, 0) == 0) manifest.split = line.substr(kSplit.size());
      continue;
    }
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t tab; (tab = line.find('\t', start)) != std::string::npos; start = tab + 1) {
      fields.push_back(line.substr(start, tab - start));
    }
    fields.push_back(line.substr(start));
    const std::string where = source + ":" + std::to_string(lineno);
    if (fields.size() < 2 || fields.size() > 3 || fields[0].empty() || fields[1].empty()) {
      throw DataError(where + ": expected id<TAB>path[<TAB>label]");
    }
    ManifestEntry e{fields[0], fields[1], std::nullopt};
    if (fields.size() == 3 && !fields[2].empty()) {
      int label = 0;
      const auto& f = fields[2];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), label);
      if (ec != std::errc() || ptr != f.data() + f.size() || label < 0) {
        throw DataError(where + ": bad label '" + f + "'");
      }
      e.label = label;
    }
    manifest.entries.push_back(std::move(e));
  }
  return manifest;
}

std::string format_manifest(const CorpusManifest& manifest) {
  std::ostringstream out;
  if (!manifest.split.empty()) out << "# split=" << manifest.split << '\n';
  for (const auto& e : manifest.entries) {
    out << e.id << '\t' << e.path.generic_string();
    if (e.label) out << '\t' << *e.label;
    out << '\n';
  }
  return out.str();
}

CorpusManifest read_manifest(const std::filesystem::path& dir) {
  const auto path = dir / kManifestName;
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus manifest " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_manifest(buf.str(), path.string());
}

std::vector<VideoFeatures> load_corpus(const std::filesystem::path& dir) {
  const CorpusManifest manifest = read_manifest(dir);
  std::set<std::string> seen;
  std::vector<VideoFeatures> videos;
  videos.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) {
    if (!seen.insert(e.id).second) throw DataError("duplicate video id '" + e.id + "' in manifest");
    const auto path = e.path.is_absolute() ? e.path : dir / e.path;
    if (!std::filesystem::exists(path)) {
      throw DataError("video '" + e.id + "': file " + path.string() + " does not exist");
    }
    VideoFeatures v = read_video(path);
    if (v.id != e.id) {
      throw DataError("video file " + path.string() + " holds id '" + v.id + "', manifest says '" +
                      e.id + "'");
    }
    if (e.label) {
      if (v.label && *v.label != *e.label) {
        throw DataError("video '" + e.id + "': manifest label disagrees with container label");
      }
      v.label = e.label;
    }
    videos.push_back(std::move(v));
  }
  return videos;
}

void write_corpus(const std::filesystem::path& dir, const std::vector<VideoFeatures>& videos,
                  const std::string& split) {
  std::filesystem::create_directories(dir / "videos");
  CorpusManifest manifest{split, {}};
  std::set<std::string> seen;
  for (const auto& v : videos) {
    if (!seen.insert(v.id).second) throw DataError("duplicate video id '" + v.id + "'");
    const std::filesystem::path rel = std::filesystem::path("videos") / (v.id + ".mfmv");
    write_video(dir / rel, v);
    manifest.entries.push_back({v.id, rel, v.label});
  }
  std::ofstream out(dir / kManifestName, std::ios::trunc);
  if (!out) throw DataError("cannot write manifest in " + dir.string());
  out << format_manifest(manifest);
}

}  // namespace mfm
