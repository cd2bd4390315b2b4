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
#include <filesystem>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "mfm/gat.hpp"
#include "mfm/optim.hpp"
#include "mfm/tensor_archive.hpp"
#include "mfm/tokenizer.hpp"
#include "mfm/video.hpp"

namespace mfm {

// ---------------------------------------------------------------------------
// Masking

struct MaskingConfig {
  double gamma = 0.4;  // fraction of objects masked in every frame
  std::uint64_t seed = 0;
};

/// floor(gamma · K), guarded against representation error (0.29·100 → 29).
std::size_t mask_count(double gamma, std::size_t K);

/// Sorted masked object indices, one list per frame.
using FrameMasks = std::vector<std::vector<std::size_t>>;

/// Uniformly random masked subsets for every frame. Deterministic in
/// (config.seed, video_id, epoch).
FrameMasks draw_masks(std::size_t frames, std::size_t objects, const MaskingConfig& config,
                      std::string_view video_id, int epoch);

/// Row indices n·K + k of the masked objects in the (N·K)×F object matrix.
std::vector<std::size_t> masked_rows(const FrameMasks& masks, std::size_t objects);

struct MaskedFeatures {
  Matrix features;  // (N·K)×F
  FrameMasks masks;
};

/// Replaces the masked object rows of the video with the 1×F embedding p.
MaskedFeatures mask_features(const VideoFeatures& video, const MaskingConfig& config,
                             const Matrix& p, int epoch);

// ---------------------------------------------------------------------------
// Model

enum class HeadKind { kSigmoid, kSoftmax };

std::string_view to_string(HeadKind kind);
HeadKind parse_head_kind(std::string_view text);

/// FC layer of F inputs and L outputs.
struct ScoreHead {
  Parameter W;  // F×L
  Parameter b;  // 1×L
  HeadKind kind = HeadKind::kSigmoid;
};

struct MfmModel {
  GatBlock omega_t;
  Parameter mask_embedding;  // p, 1×F
  ScoreHead head;

  std::size_t features() const { return omega_t.features(); }
  std::size_t vocab() const { return head.W.value.cols(); }
  ParameterList parameters();
};

MfmModel init_mfm_model(std::size_t F, std::size_t F_a, std::size_t L, HeadKind kind,
                        std::uint64_t seed);

struct MfmOutput {
  Var logits;  // 1×L pre-activations
  Var scores;  // g, 1×L
};

/// One node set of all N·K (masked) object rows → ω_t → FC head.
MfmOutput mfm_forward(Tape& tape, MfmModel& model, Var nodes);

/// Sigmoid head: mean binary cross-entropy against v, from the logits.
/// Softmax head: categorical cross-entropy against v / r.
Var mfm_loss(HeadKind kind, Var logits, const TokenTarget& target);
double mfm_loss_value(HeadKind kind, const Matrix& logits, const TokenTarget& target);

/// Full differentiable per-video objective: masking with the learnable p,
/// forward pass and loss.
Var mfm_video_loss(Tape& tape, MfmModel& model, const Matrix& objects, std::size_t objects_per_frame,
                   const FrameMasks& masks, const TokenTarget& target);

// Tensors: "gat/omega_t/…", "mfm/p", "mfm/head/W", "mfm/head/b", "mfm/head/kind".
void store_mfm_model(TensorArchive& archive, const MfmModel& model);
MfmModel load_mfm_model(const TensorArchive& archive);

// ---------------------------------------------------------------------------
// Pretraining

struct PretrainConfig {
  int epochs = 200;
  double lr = 1e-3;
  std::vector<int> milestones{50, 100};
  double lr_decay = 0.1;
  std::size_t batch_size = 16;
  std::size_t top_r = 50;
  std::size_t attention_dim = 0;  // 0 means F
  HeadKind head = HeadKind::kSigmoid;
  AdamConfig adam;
  std::uint64_t seed = 0;
};

struct EpochRecord {
  int epoch = 0;
  double lr = 0;
  double loss = 0;
  std::optional<double> top1;  // percent, downstream validation only

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct PretrainOptions {
  unsigned threads = 1;
  std::filesystem::path checkpoint;  // empty: no checkpoint files
  int checkpoint_every = 0;          // epochs between periodic checkpoints; 0 = final only
  std::optional<std::filesystem::path> resume;
  std::function<void(const EpochRecord&)> on_epoch;
};

struct PretrainResult {
  MfmModel model;
  std::vector<EpochRecord> log;
};

/// Token targets come from the unmasked patch embeddings; masks are redrawn
/// every epoch; one Adam step per batch on the batch-mean loss. A non-finite
/// loss writes the last good state to the checkpoint path and throws
/// NumericError.
PretrainResult pretrain(const std::vector<VideoFeatures>& corpus, const Codebook& codebook,
                        const PretrainConfig& config, const MaskingConfig& masking,
                        const PretrainOptions& options = {});

}  // namespace mfm
