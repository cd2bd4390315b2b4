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

#include "mfm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mfm/error.hpp"
#include "mfm/rng.hpp"

namespace mfm {

SynthWorld make_world(const SynthWorldConfig& config) {
  if (config.vocab == 0 || config.embed_dim == 0 || config.features == 0 || config.topic_size == 0) {
    throw ConfigError("synthetic world dimensions must be >= 1");
  }
  if (config.topic_size > config.vocab) throw ConfigError("topic size exceeds vocabulary size");
  const std::uint64_t base = derive_seed(config.seed, tag(Stream::kSynth));
  SynthWorld world{config, generate_codebook(config.vocab, config.embed_dim, derive_seed(base, 1)),
                   {}, Matrix(config.vocab, config.features)};

  Rng rng(derive_seed(base, 2));
  std::vector<std::size_t> perm(config.vocab);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  const std::size_t num_topics = config.vocab / config.topic_size;
  for (std::size_t t = 0; t < num_topics; ++t) {
    auto first = perm.begin() + static_cast<std::ptrdiff_t>(t * config.topic_size);
    std::vector<std::size_t> topic(first, first + static_cast<std::ptrdiff_t>(config.topic_size));
    std::sort(topic.begin(), topic.end());
    world.topics.push_back(std::move(topic));
  }

  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t rank = config.signal_rank;
  if (rank == 0 || rank >= config.features) {
    for (Real& v : world.mixing.data()) v = static_cast<Real>(normal(rng));
  } else {
    // L×rank codes times a rank×F projection, scaled to unit per-entry variance.
    Matrix codes(config.vocab, rank), proj(rank, config.features);
    for (Real& v : codes.data()) v = static_cast<Real>(normal(rng));
    for (Real& v : proj.data()) v = static_cast<Real>(normal(rng) / std::sqrt(static_cast<double>(rank)));
    world.mixing = matmul(codes, proj);
  }
  return world;
}

namespace {

// Draws Q patches for one object from `topic`, appends their embeddings to
// `patch_out` (when non-null) and returns the object's feature vector.
void draw_object(const SynthWorld& world, const std::vector<std::size_t>& topic, std::size_t Q,
                 double patch_noise, double feature_noise, Rng& rng,
                 std::vector<float>* patch_out, std::vector<float>& feature_out) {
  const std::size_t D = world.config.embed_dim;
  const std::size_t F = world.config.features;
  std::uniform_int_distribution<std::size_t> pick(0, topic.size() - 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double mix_scale = 1.0 / std::sqrt(static_cast<double>(Q));

  std::vector<double> feature(F, 0.0);
  std::vector<float> h(D);
  for (std::size_t j = 0; j < Q; ++j) {
    const std::size_t source = topic[pick(rng)];
    auto entry = world.codebook.entries().row(source);
    bool nonzero = false;
    for (std::size_t d = 0; d < D; ++d) {
      h[d] = static_cast<float>(entry[d] + patch_noise * normal(rng));
      nonzero = nonzero || h[d] != 0.0f;
    }
    if (!nonzero) h[0] = static_cast<float>(entry[0]);
    const std::size_t token = quantize(std::span<const float>(h), world.codebook);
    auto row = world.mixing.row(token);
    for (std::size_t f = 0; f < F; ++f) feature[f] += mix_scale * row[f];
    if (patch_out) patch_out->insert(patch_out->end(), h.begin(), h.end());
  }
  for (std::size_t f = 0; f < F; ++f) {
    feature_out.push_back(static_cast<float>(feature[f] + feature_noise * normal(rng)));
  }
}

void add_video_offset(VideoFeatures& v, double noise, Rng& rng) {
  if (noise <= 0) return;
  std::normal_distribution<double> normal(0.0, noise);
  std::vector<double> offset(v.features);
  for (double& o : offset) o = normal(rng);
  for (std::size_t i = 0; i < v.object_data.size(); ++i) {
    v.object_data[i] += static_cast<float>(offset[i % v.features]);
  }
}

void add_frame_features(VideoFeatures& v, double noise, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<float> frames;
  frames.reserve(v.frames * v.features);
  for (std::size_t n = 0; n < v.frames; ++n) {
    for (std::size_t f = 0; f < v.features; ++f) {
      double mean = 0;
      for (std::size_t k = 0; k < v.objects; ++k)
        mean += v.object_data[(n * v.objects + k) * v.features + f];
      mean /= static_cast<double>(v.objects);
      frames.push_back(static_cast<float>(mean + noise * normal(rng)));
    }
  }
  v.frame_data = std::move(frames);
}

std::string make_id(const char* prefix, std::size_t index) {
  std::string digits = std::to_string(index);
  if (digits.size() < 5) digits.insert(0, 5 - digits.size(), '0');
  return std::string(prefix) + digits;
}

}  // namespace

std::vector<VideoFeatures> synth_pretrain_corpus(const SynthWorld& world,
                                                 const PretrainSynthConfig& config) {
  if (config.frames == 0 || config.objects == 0 || config.patches == 0) {
    throw ConfigError("synthetic pretraining corpus needs N, K, Q >= 1");
  }
  if (world.topics.empty()) throw ConfigError("synthetic world has no topics");
  const std::size_t T = world.topics.size();
  std::vector<VideoFeatures> videos;
  videos.reserve(config.videos);
  for (std::size_t i = 0; i < config.videos; ++i) {
    Rng rng(derive_seed(config.seed, tag(Stream::kSynth), i));
    std::uniform_int_distribution<std::size_t> topic_pick(0, T - 1);
    const std::size_t dominant = topic_pick(rng);
    std::size_t secondary = dominant;
    if (T > 1) {
      std::uniform_int_distribution<std::size_t> other(0, T - 2);
      secondary = other(rng);
      if (secondary >= dominant) ++secondary;
    }
    std::bernoulli_distribution use_dominant(config.dominant_weight);

    VideoFeatures v;
    v.id = make_id("pre-", i);
    v.frames = config.frames;
    v.objects = config.objects;
    v.features = world.config.features;
    v.patches = config.patches;
    v.patch_dim = world.config.embed_dim;
    std::vector<float> patches;
    patches.reserve(config.frames * config.objects * config.patches * v.patch_dim);
    v.object_data.reserve(config.frames * config.objects * v.features);
    for (std::size_t n = 0; n < config.frames; ++n) {
      for (std::size_t k = 0; k < config.objects; ++k) {
        const auto& topic = world.topics[use_dominant(rng) ? dominant : secondary];
        draw_object(world, topic, config.patches, config.patch_noise, config.feature_noise, rng,
                    &patches, v.object_data);
      }
    }
    v.patch_data = std::move(patches);
    add_video_offset(v, config.video_noise, rng);
    add_frame_features(v, config.feature_noise, rng);
    videos.push_back(std::move(v));
  }
  return videos;
}

std::vector<VideoFeatures> synth_labeled_corpus(const SynthWorld& world,
                                                const LabeledSynthConfig& config) {
  if (config.classes < 2) throw ConfigError("labeled corpus needs at least 2 classes");
  if (config.frames == 0 || config.objects == 0 || config.patches == 0) {
    throw ConfigError("labeled corpus needs N, K, Q >= 1");
  }
  const std::size_t T = world.topics.size();
  if (T < config.classes) {
    throw ConfigError("synthetic world has " + std::to_string(T) + " topics, fewer than " +
                      std::to_string(config.classes) + " classes");
  }
  std::vector<VideoFeatures> videos;
  videos.reserve(config.videos);
  for (std::size_t i = 0; i < config.videos; ++i) {
    const std::size_t index = config.first_index + i;
    Rng rng(derive_seed(config.seed, tag(Stream::kSynth) + 16, index));
    const std::size_t label = i % config.classes;
    std::vector<std::size_t> class_topics;
    for (std::size_t t = label; t < T; t += config.classes) class_topics.push_back(t);
    std::uniform_int_distribution<std::size_t> class_pick(0, class_topics.size() - 1);
    const std::size_t dominant = class_topics[class_pick(rng)];
    std::uniform_int_distribution<std::size_t> other(0, T - 2);
    std::size_t secondary = other(rng);
    if (secondary >= dominant) ++secondary;
    std::bernoulli_distribution signal(config.class_signal);

    VideoFeatures v;
    v.id = make_id("lab-", index);
    v.frames = config.frames;
    v.objects = config.objects;
    v.features = world.config.features;
    v.label = static_cast<int>(label);
    v.object_data.reserve(config.frames * config.objects * v.features);
    for (std::size_t n = 0; n < config.frames; ++n) {
      for (std::size_t k = 0; k < config.objects; ++k) {
        const std::size_t t = signal(rng) ? dominant : secondary;
        draw_object(world, world.topics[t], config.patches, 0.1, config.feature_noise, rng,
                    nullptr, v.object_data);
      }
    }
    add_video_offset(v, config.video_noise, rng);
    add_frame_features(v, config.frame_noise, rng);
    videos.push_back(std::move(v));
  }
  return videos;
}

}  // namespace mfm
