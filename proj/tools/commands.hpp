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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mfm/synth.hpp"

namespace mfm::cli {

/// Flags shared by every subcommand.
struct Common {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string out;      // run directory; empty where optional and omitted
  std::string config;   // effective config text for the run manifest
  bool quiet = false;
};

struct SynthGenArgs {
  std::string kind;  // "pretrain" or "labeled"
  SynthWorldConfig world;
  PretrainSynthConfig pretrain;
  LabeledSynthConfig labeled;
  std::size_t videos = 0;  // 0 keeps the per-kind default
  std::size_t frames = 5, objects = 8, patches = 4;
  double feature_noise = 0.1, video_noise = 1.0;
};

struct PretrainArgs {
  std::string corpus, codebook, resume;
  int epochs = 200;
  double lr = 1e-3;
  std::string milestones = "50,100";
  double decay = 0.1;
  std::size_t batch = 16;
  std::size_t top_r = 50;
  std::size_t attention_dim = 0;
  std::string head = "sigmoid";
  double gamma = 0.4;
  std::optional<std::uint64_t> mask_seed;
  int checkpoint_every = 0;
};

/// Fine-tune hyperparameters and architecture flags, shared with ablate.
struct TrainArgs {
  std::string train, val, ckpt = "none";
  std::string init_w1 = "rand", init_w2 = "rand", init_w3 = "rand";
  bool share_23 = false;
  bool global = true;
  std::size_t frames = 0;
  std::size_t classes = 10;
  std::size_t hidden = 0;
  std::size_t attention_dim = 0;
  int epochs = 200;
  double lr = 1e-4;
  std::string milestones = "60,110";
  double decay = 0.1;
  std::size_t batch = 16;
};

struct EvaluateArgs {
  std::string model, test;
  std::size_t frames = 0;
};

struct GradcheckArgs {
  std::string head = "sigmoid";
  double step = 1e-5;
  double tolerance = 1e-4;
};

struct AblateArgs {
  TrainArgs train;
  std::string test;
  int repeats = 1;
};

/// "50,100", "50 100" or "none".
std::vector<int> parse_milestones(const std::string& text);

int synth_gen(const SynthGenArgs& a, const Common& c, std::ostream& out);
int pretrain(const PretrainArgs& a, const Common& c, std::ostream& out);
int finetune(const TrainArgs& a, const Common& c, std::ostream& out);
int evaluate(const EvaluateArgs& a, const Common& c, std::ostream& out);
int gradcheck(const GradcheckArgs& a, const Common& c, std::ostream& out);
int ablate(const AblateArgs& a, const Common& c, std::ostream& out);

}  // namespace mfm::cli
