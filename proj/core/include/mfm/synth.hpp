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

#include <cstdint>
#include <vector>

#include "mfm/matrix.hpp"
#include "mfm/tokenizer.hpp"
#include "mfm/video.hpp"

namespace mfm {

/// Latent structure shared by the synthetic pretraining and labeled corpora.
/// Both generators draw object features through the same mixing map, so a
/// block pretrained on one transfers to the other.
struct SynthWorldConfig {
  std::size_t vocab = 64;       // L
  std::size_t embed_dim = 16;   // D
  std::size_t features = 32;    // F
  std::size_t topic_size = 8;   // codebook entries per topic
  // Rank of the mixing map; 0 means full rank. Below F, token information
  // occupies a subspace of the feature space.
  std::size_t signal_rank = 8;
  std::uint64_t seed = 7;
};

struct SynthWorld {
  SynthWorldConfig config;
  Codebook codebook;
  // Disjoint groups of codebook indices; floor(L / topic_size) of them.
  std::vector<std::vector<std::size_t>> topics;
  // L×F map from an object's patch-token histogram to its feature vector.
  Matrix mixing;
};

SynthWorld make_world(const SynthWorldConfig& config);

struct PretrainSynthConfig {
  std::size_t videos = 64;
  std::size_t frames = 5;     // N
  std::size_t objects = 8;    // K
  std::size_t patches = 4;    // Q
  double patch_noise = 0.1;   // std-dev of noise added to codebook entries
  double feature_noise = 0.1; // std-dev of noise added to object features
  double video_noise = 1.0;   // std-dev of an offset shared by all objects of a video
  // Probability that an object is drawn from the video's dominant topic
  // rather than its secondary topic.
  double dominant_weight = 0.75;
  std::uint64_t seed = 1;
};

/// Videos whose patches are noisy copies of codebook entries from a per-video
/// pair of topics, and whose object features are the mixing-map image of
/// each object's patch-token histogram plus noise.
std::vector<VideoFeatures> synth_pretrain_corpus(const SynthWorld& world,
                                                 const PretrainSynthConfig& config);

struct LabeledSynthConfig {
  std::size_t videos = 80;
  std::size_t classes = 4;
  std::size_t frames = 5;   // N
  std::size_t objects = 8;  // K
  std::size_t patches = 4;  // Q, used internally to draw object histograms
  double feature_noise = 0.1;
  double video_noise = 1.0;
  double frame_noise = 0.1;
  // Probability that an object is drawn from the video's dominant topic, one
  // of its class's topics, rather than a random secondary topic.
  double class_signal = 0.75;
  std::uint64_t seed = 2;
  // Offset added to video indices, so train and test splits drawn with the
  // same seed never share videos.
  std::size_t first_index = 0;
};

/// Balanced labels (video i has label i mod classes). A video of class c has
/// its dominant topic in {c, c + C, c + 2C, ...}, so the class is the latent
/// the pretraining targets expose.
std::vector<VideoFeatures> synth_labeled_corpus(const SynthWorld& world,
                                                const LabeledSynthConfig& config);

}  // namespace mfm
