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
#include <functional>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "mfm/gat.hpp"
#include "mfm/mfm.hpp"
#include "mfm/optim.hpp"
#include "mfm/tensor_archive.hpp"
#include "mfm/video.hpp"

namespace mfm {

enum class BlockMode { kGatRandom, kGatPretrained, kMeanPool };

std::string_view to_string(BlockMode mode);
/// Accepts "gat_random"/"rand", "gat_pretrained"/"pretrained", "mean_pool"/"mean".
BlockMode parse_block_mode(std::string_view text);

struct VigatConfig {
  bool use_global = true;
  BlockMode omega1 = BlockMode::kGatRandom;  // frame features across frames
  BlockMode omega2 = BlockMode::kGatRandom;  // objects within a frame
  BlockMode omega3 = BlockMode::kGatRandom;  // per-frame vectors across frames
  bool share_23 = false;
  std::size_t num_classes = 10;
  std::size_t hidden = 0;         // classifier width; 0 means F
  std::size_t attention_dim = 0;  // 0 means F

  bool needs_pretrained() const {
    return omega2 == BlockMode::kGatPretrained || omega3 == BlockMode::kGatPretrained;
  }
  /// Throws ConfigError for combinations the model cannot represent.
  void validate() const;
};

struct FinetuneConfig {
  int epochs = 200;
  double lr = 1e-4;
  std::vector<int> milestones{60, 110};
  double lr_decay = 0.1;
  std::size_t batch_size = 16;
  AdamConfig adam;
  std::uint64_t seed = 0;
};

/// affine (F_cat → hidden) → ReLU → affine (hidden → classes).
struct ClassifierHead {
  Parameter W1;
  Parameter b1;
  Parameter W2;
  Parameter b2;
};

/// Blocks are shared_ptr so that with weight sharing ω_2 and ω_3 are one
/// object; a null block means mean pooling. Copying is disabled because a
/// member-wise copy would alias blocks between models; use clone().
struct VigatModel {
  VigatConfig config;
  std::size_t features = 0;  // F
  std::shared_ptr<GatBlock> omega1;
  std::shared_ptr<GatBlock> omega2;
  std::shared_ptr<GatBlock> omega3;
  ClassifierHead head;

  VigatModel() = default;
  VigatModel(VigatModel&&) = default;
  VigatModel& operator=(VigatModel&&) = default;
  VigatModel(const VigatModel&) = delete;
  VigatModel& operator=(const VigatModel&) = delete;

  /// Deep copy that preserves ω_2/ω_3 sharing.
  VigatModel clone() const;

  std::size_t concat_dim() const { return config.use_global ? 2 * features : features; }
  ParameterList parameters();
};

/// ω_2 / ω_3 in gat_pretrained mode are copied from `pretrained`; ω_1 and
/// the classifier are always randomly initialized.
VigatModel init_from_pretrained(const VigatConfig& config, std::size_t F, std::uint64_t seed,
                                const GatBlock* pretrained = nullptr);

struct VigatOutput {
  Var local;                  // 1×F
  std::optional<Var> global;  // 1×F when the global branch is enabled
  Var logits;                 // 1×classes
};

VigatOutput vigat_forward(Tape& tape, VigatModel& model, const VideoFeatures& video);
/// Class probabilities (softmax of the logits), 1×classes.
Matrix vigat_predict(const VigatModel& model, const VideoFeatures& video);

/// Index of the largest score; exact ties go to the smallest index.
std::size_t argmax(std::span<const Real> scores);

struct FinetuneOptions {
  unsigned threads = 1;
  const std::vector<VideoFeatures>* validation = nullptr;
  std::function<void(const EpochRecord&)> on_epoch;
  // Called after every optimizer step.
  std::function<void(const VigatModel&, int epoch, std::int64_t step)> on_step;
};

/// Categorical cross-entropy over the class scores, Adam, step schedule.
std::vector<EpochRecord> finetune(VigatModel& model, const std::vector<VideoFeatures>& train,
                                  const FinetuneConfig& config, const FinetuneOptions& options = {});

/// Top-1 accuracy in percent, rounded to two decimals.
double evaluate(const VigatModel& model, const std::vector<VideoFeatures>& corpus,
                unsigned threads = 1);

// Tensors under "vigat/…"; with weight sharing only ω_2's tensors are stored.
void store_vigat(TensorArchive& archive, const VigatModel& model);
VigatModel load_vigat(const TensorArchive& archive);

}  // namespace mfm
