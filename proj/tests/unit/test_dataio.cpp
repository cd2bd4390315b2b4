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

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

#include "generators.hpp"
#include "mfm/corpus.hpp"
#include "mfm/error.hpp"
#include "mfm/synth.hpp"
#include "mfm/tensor_archive.hpp"
#include "mfm/video.hpp"
#include "temp_dir.hpp"

using namespace mfm;
using testing_support::TempDir;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << bytes;
}

VideoFeatures make_video(gen::Source& src, bool frames, bool patches, bool label) {
  VideoFeatures v;
  v.id = "clip-" + std::to_string(src.size(0, 999));
  v.frames = 2;
  v.objects = 3;
  v.features = 4;
  v.object_data = src.floats(24);
  if (frames) v.frame_data = src.floats(8);
  if (patches) {
    v.patches = 2;
    v.patch_dim = 5;
    v.patch_data = src.floats(60);
  }
  if (label) v.label = static_cast<int>(src.size(0, 9));
  return v;
}

// Video containers store f32 and the features are already f32: read(write(v))
// must equal v exactly, NaN payloads aside.
void check_same(const VideoFeatures& a, const VideoFeatures& b) {
  CHECK(a.id == b.id);
  CHECK(a.frames == b.frames);
  CHECK(a.label == b.label);
  CHECK(a.has_frames() == b.has_frames());
  CHECK(a.has_patches() == b.has_patches());
  CHECK(std::memcmp(a.object_data.data(), b.object_data.data(), a.object_data.size() * 4) == 0);
  CHECK(a == b);
}

}  // namespace

TEST_CASE("video container: round trip for every section combination") {
  TempDir dir("video");
  gen::Source src(61);
  for (int mask = 0; mask < 8; ++mask) {
    const VideoFeatures v = make_video(src, mask & 1, mask & 2, mask & 4);
    const auto path = dir / ("v" + std::to_string(mask) + ".mfmv");
    write_video(path, v);
    const VideoFeatures back = read_video(path);
    check_same(v, back);
    write_video(dir / "again.mfmv", back);
    CHECK(slurp(path) == slurp(dir / "again.mfmv"));
  }
}

TEST_CASE("video container: special float values survive bitwise") {
  TempDir dir("special");
  gen::Source src(62);
  VideoFeatures v = make_video(src, true, false, false);
  v.object_data[0] = -0.0f;
  v.object_data[1] = std::numeric_limits<float>::denorm_min();
  v.object_data[2] = std::numeric_limits<float>::max();
  write_video(dir / "s.mfmv", v);
  const VideoFeatures back = read_video(dir / "s.mfmv");
  CHECK(std::signbit(back.object_data[0]));
  CHECK(std::memcmp(back.object_data.data(), v.object_data.data(), 24 * 4) == 0);
}

TEST_CASE("video container: corruption is reported, never crashes") {
  TempDir dir("corrupt");
  gen::Source src(63);
  const VideoFeatures v = make_video(src, true, true, true);
  write_video(dir / "good.mfmv", v);
  const std::string bytes = slurp(dir / "good.mfmv");

  auto expect_error = [&](const std::string& data, const std::string& needle) {
    spit(dir / "bad.mfmv", data);
    try {
      read_video(dir / "bad.mfmv");
      FAIL("expected DataError");
    } catch (const DataError& e) {
      INFO(std::string(e.what()));
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  expect_error(bytes.substr(0, bytes.size() - 4), "patches section");
  const std::size_t header = 4 + 4 * 9 + v.id.size();
  expect_error(bytes.substr(0, header + 10), "objects section");
  expect_error(bytes.substr(0, header + 24 * 4 + 8), "frames section");
  expect_error(bytes.substr(0, 10), "truncated flags");
  expect_error(bytes.substr(0, 20), "truncated header");
  expect_error("XXXX" + bytes.substr(4), "magic");
  std::string version = bytes;
  version[4] = 9;
  expect_error(version, "version");
  expect_error(bytes + "!", "trailing");
  std::string flags = bytes;
  flags[8] = 64;
  expect_error(flags, "flags");
  std::string dims = bytes;
  dims[20] = 5;  // F = 5 no longer matches the payload
  expect_error(dims, "section");
  CHECK_THROWS_AS(read_video(dir / "missing.mfmv"), DataError);

  // Random truncations and byte flips: either a clean parse or DataError.
  for (int trial = 0; trial < 500; ++trial) {
    std::string mutated = bytes;
    if (trial % 2 == 0) {
      mutated.resize(src.size(0, bytes.size() - 1));
    } else {
      for (int k = 0; k < 3; ++k)
        mutated[src.size(0, bytes.size() - 1)] = static_cast<char>(src.size(0, 255));
    }
    spit(dir / "fuzz.mfmv", mutated);
    try {
      read_video(dir / "fuzz.mfmv").validate();
    } catch (const DataError&) {
    }
  }
}

TEST_CASE("video validate checks payload sizes") {
  gen::Source src(64);
  VideoFeatures v = make_video(src, true, true, false);
  CHECK_NOTHROW(v.validate());
  v.frame_data->pop_back();
  CHECK_THROWS_AS(v.validate(), DataError);
  v = make_video(src, false, true, false);
  v.patch_dim = 0;
  CHECK_THROWS_AS(v.validate(), DataError);
  v = make_video(src, false, false, false);
  v.features = 5;
  CHECK_THROWS_AS(v.validate(), DataError);
  TempDir dir("invalid");
  CHECK_THROWS_AS(write_video(dir / "x.mfmv", v), DataError);
}

TEST_CASE("manifest: parse and format") {
  const std::string text = "# split=train\n# a comment\nv1\tvideos/v1.mfmv\t3\r\n\nv2\t/abs/v2.mfmv\n";
  const CorpusManifest m = parse_manifest(text);
  CHECK(m.split == "train");
  REQUIRE(m.entries.size() == 2);
  CHECK(m.entries[0].id == "v1");
  CHECK(m.entries[0].label == 3);
  CHECK(m.entries[1].path == "/abs/v2.mfmv");
  CHECK_FALSE(m.entries[1].label.has_value());
  CHECK(format_manifest(m) == "# split=train\nv1\tvideos/v1.mfmv\t3\nv2\t/abs/v2.mfmv\n");
  CHECK(format_manifest(parse_manifest(format_manifest(m))) == format_manifest(m));

  CHECK_THROWS_AS(parse_manifest("only-id\n"), DataError);
  CHECK_THROWS_AS(parse_manifest("a\tb\tc\td\n"), DataError);
  CHECK_THROWS_AS(parse_manifest("a\tb\t-1\n"), DataError);
  try {
    parse_manifest("a\tb\n\nc\td\tx7\n", "m.tsv");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("m.tsv:3") != std::string::npos);
  }
}

TEST_CASE("corpus directories: round trip and consistency checks") {
  TempDir dir("corpus");
  gen::Source src(65);
  std::vector<VideoFeatures> videos;
  for (int i = 0; i < 4; ++i) {
    videos.push_back(make_video(src, true, false, true));
    videos.back().id = "video-" + std::to_string(i);
  }
  write_corpus(dir / "a", videos, "test");
  CHECK(read_manifest(dir / "a").split == "test");
  CHECK(load_corpus(dir / "a") == videos);

  CHECK_THROWS_AS(load_corpus(dir / "none"), DataError);
  auto dup = videos;
  dup[1].id = dup[0].id;
  CHECK_THROWS_AS(write_corpus(dir / "b", dup, "x"), DataError);

  const auto manifest = dir / "a" / kManifestName;
  const std::string original = slurp(manifest);
  spit(manifest, original + "video-0\tvideos/video-0.mfmv\n");
  CHECK_THROWS_AS(load_corpus(dir / "a"), DataError);  // duplicate id
  spit(manifest, "ghost\tvideos/ghost.mfmv\n");
  CHECK_THROWS_AS(load_corpus(dir / "a"), DataError);  // missing file
  spit(manifest, "other\tvideos/video-0.mfmv\n");
  CHECK_THROWS_AS(load_corpus(dir / "a"), DataError);  // id mismatch
  spit(manifest, "video-0\tvideos/video-0.mfmv\t" + std::to_string(*videos[0].label + 1) + "\n");
  CHECK_THROWS_AS(load_corpus(dir / "a"), DataError);  // label mismatch
}

TEST_CASE("checkpoint archive: round trip and corruption") {
  TempDir dir("archive");
  gen::Source src(66);
  TensorArchive a;
  a["x/W"] = src.matrix(3, 4);
  a["x/b"] = Matrix(1, 4, -0.0);
  a["empty"] = Matrix(0, 3);
  a["x/W"](0, 0) = std::numeric_limits<Real>::denorm_min();
  write_archive(dir / "a.mfmk", a);
  const TensorArchive back = read_archive(dir / "a.mfmk");
  REQUIRE(back.size() == 3);
  CHECK(back.at("x/W") == a.at("x/W"));
  CHECK(std::signbit(back.at("x/b")(0, 0)));
  CHECK(back.at("empty").rows() == 0);
  write_archive(dir / "b.mfmk", back);
  CHECK(slurp(dir / "a.mfmk") == slurp(dir / "b.mfmk"));

  const std::string bytes = slurp(dir / "a.mfmk");
  spit(dir / "c.mfmk", bytes.substr(0, bytes.size() - 1));
  CHECK_THROWS_AS(read_archive(dir / "c.mfmk"), DataError);
  spit(dir / "c.mfmk", bytes + "x");
  CHECK_THROWS_AS(read_archive(dir / "c.mfmk"), DataError);
  spit(dir / "c.mfmk", "MFMV" + bytes.substr(4));
  CHECK_THROWS_AS(read_archive(dir / "c.mfmk"), DataError);
  std::string count = bytes;
  count[8] = 4;
  spit(dir / "c.mfmk", count);
  CHECK_THROWS_AS(read_archive(dir / "c.mfmk"), DataError);

  CHECK_THROWS_AS(archive_get(back, "nope"), DataError);
  CHECK_THROWS_AS(archive_get(back, "x/W", 4, 3), DataError);
  CHECK(archive_get(back, "x/W", 3, 4)(1, 1) == a.at("x/W")(1, 1));

  for (int trial = 0; trial < 300; ++trial) {
    std::string mutated = bytes;
    if (trial % 2 == 0) {
      mutated.resize(src.size(0, bytes.size() - 1));
    } else {
      mutated[src.size(0, bytes.size() - 1)] = static_cast<char>(src.size(0, 255));
    }
    spit(dir / "fuzz.mfmk", mutated);
    try {
      read_archive(dir / "fuzz.mfmk");
    } catch (const DataError&) {
    }
  }
}

TEST_CASE("synthetic world and pretraining corpus") {
  const SynthWorldConfig wc{16, 6, 8, 4, 0, 3};
  const SynthWorld a = make_world(wc);
  const SynthWorld b = make_world(wc);
  CHECK(a.codebook.entries() == b.codebook.entries());
  CHECK(a.mixing == b.mixing);
  REQUIRE(a.topics.size() == 4);
  std::set<std::size_t> all;
  for (const auto& t : a.topics) all.insert(t.begin(), t.end());
  CHECK(all.size() == 16);
  CHECK_THROWS_AS(make_world(SynthWorldConfig{4, 6, 8, 5, 0, 3}), ConfigError);

  // Low-rank mixing: an 16×8 map of rank 3.
  const SynthWorld low = make_world(SynthWorldConfig{16, 6, 8, 4, 3, 3});
  CHECK(low.mixing.rows() == 16);

  PretrainSynthConfig pc;
  pc.videos = 6;
  pc.frames = 2;
  pc.objects = 4;
  pc.patches = 3;
  const auto c1 = synth_pretrain_corpus(a, pc);
  CHECK(c1 == synth_pretrain_corpus(a, pc));
  pc.seed = 99;
  CHECK_FALSE(c1 == synth_pretrain_corpus(a, pc));
  for (const auto& v : c1) {
    CHECK_NOTHROW(v.validate());
    CHECK(v.has_patches());
    CHECK(v.has_frames());
    CHECK_FALSE(v.label.has_value());
  }
}

TEST_CASE("synthetic patches: noiseless draws quantize back into two topics") {
  const SynthWorld world = make_world(SynthWorldConfig{16, 6, 8, 4, 0, 3});
  PretrainSynthConfig pc;
  pc.videos = 20;
  pc.frames = 3;
  pc.objects = 4;
  pc.patches = 5;
  pc.patch_noise = 0;
  std::vector<std::size_t> topic_of(16);
  for (std::size_t t = 0; t < world.topics.size(); ++t)
    for (std::size_t i : world.topics[t]) topic_of[i] = t;
  for (const auto& v : synth_pretrain_corpus(world, pc)) {
    const TokenTarget t = tokenize_video(v.patch_view(), world.codebook, 1);
    std::vector<std::uint32_t> mass(4, 0);
    for (std::size_t i = 0; i < 16; ++i) mass[topic_of[i]] += t.counts[i];
    std::sort(mass.begin(), mass.end(), std::greater<>());
    CHECK(mass[2] == 0);
    CHECK(mass[0] >= mass[1]);
  }
}

TEST_CASE("synthetic labeled corpus: balanced, separable, disjoint splits") {
  const SynthWorld world = make_world(SynthWorldConfig{});
  LabeledSynthConfig lc;
  lc.videos = 40;
  const auto train = synth_labeled_corpus(world, lc);
  CHECK(train == synth_labeled_corpus(world, lc));
  std::vector<int> counts(4, 0);
  for (const auto& v : train) {
    CHECK_NOTHROW(v.validate());
    REQUIRE(v.label.has_value());
    ++counts[*v.label];
    CHECK_FALSE(v.has_patches());
  }
  CHECK(counts == std::vector<int>{10, 10, 10, 10});

  lc.first_index = 40;
  const auto test = synth_labeled_corpus(world, lc);
  std::set<std::string> ids;
  for (const auto& v : train) ids.insert(v.id);
  for (const auto& v : test) CHECK(ids.count(v.id) == 0);

  lc.classes = 9;  // more classes than topics
  CHECK_THROWS_AS(synth_labeled_corpus(world, lc), ConfigError);
  lc.classes = 1;
  CHECK_THROWS_AS(synth_labeled_corpus(world, lc), ConfigError);
}

TEST_CASE("synthetic histograms concentrate on the video's topics at noise 0.1") {
  const SynthWorld world = make_world(SynthWorldConfig{});
  PretrainSynthConfig pc;
  pc.videos = 30;
  std::vector<std::size_t> topic_of(world.config.vocab);
  for (std::size_t t = 0; t < world.topics.size(); ++t)
    for (std::size_t i : world.topics[t]) topic_of[i] = t;
  for (const auto& v : synth_pretrain_corpus(world, pc)) {
    const TokenTarget t = tokenize_video(v.patch_view(), world.codebook, 1);
    std::vector<double> mass(world.topics.size(), 0);
    double total = 0;
    for (std::size_t i = 0; i < t.counts.size(); ++i) {
      mass[topic_of[i]] += t.counts[i];
      total += t.counts[i];
    }
    std::sort(mass.begin(), mass.end(), std::greater<>());
    CHECK((mass[0] + mass[1]) / total >= 0.8);
  }
}

TEST_CASE("synthetic class means are pairwise distinct") {
  const SynthWorld world = make_world(SynthWorldConfig{});
  LabeledSynthConfig lc;
  lc.videos = 80;
  const std::size_t F = world.config.features;
  std::vector<std::vector<double>> means(lc.classes, std::vector<double>(F, 0));
  for (const auto& v : synth_labeled_corpus(world, lc)) {
    const Matrix X = v.object_matrix();
    for (std::size_t r = 0; r < X.rows(); ++r)
      for (std::size_t f = 0; f < F; ++f) means[*v.label][f] += X(r, f);
  }
  for (std::size_t a = 0; a < lc.classes; ++a) {
    for (std::size_t b = a + 1; b < lc.classes; ++b) {
      double d = 0;
      for (std::size_t f = 0; f < F; ++f) d += std::abs(means[a][f] - means[b][f]);
      CHECK(d > 0);
    }
  }
}
