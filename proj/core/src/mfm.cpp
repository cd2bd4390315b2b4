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

#include "mfm/mfm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "batch.hpp"
#include "mfm/error.hpp"
#include "mfm/rng.hpp"

namespace mfm {

// ---------------------------------------------------------------------------
// Masking

std::size_t mask_count(double gamma, std::size_t K) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("masking ratio must lie in [0, 1]");
  const double raw = gamma * static_cast<double>(K);
  const auto count = static_cast<std::size_t>(std::floor(raw + 1e-9));
  return std::min(count, K);
}

FrameMasks draw_masks(std::size_t frames, std::size_t objects, const MaskingConfig& config,
                      std::string_view video_id, int epoch) {
  const std::size_t m = mask_count(config.gamma, objects);
  Rng rng(derive_seed(derive_seed(config.seed, tag(Stream::kMask)), hash_string(video_id),
                      static_cast<std::uint64_t>(epoch)));
  FrameMasks masks(frames);
  std::vector<std::size_t> pool(objects);
  for (auto& frame : masks) {
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    // Partial Fisher-Yates: the first m slots are a uniform m-subset.
    for (std::size_t i = 0; i < m; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, objects - 1);
      std::swap(pool[i], pool[pick(rng)]);
    }
    frame.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(m));
    std::sort(frame.begin(), frame.end());
  }
  return masks;
}

std::vector<std::size_t> masked_rows(const FrameMasks& masks, std::size_t objects) {
  std::vector<std::size_t> rows;
  for (std::size_t n = 0; n < masks.size(); ++n)
    for (std::size_t k : masks[n]) rows.push_back(n * objects + k);
  return rows;
}

MaskedFeatures mask_features(const VideoFeatures& video, const MaskingConfig& config,
                             const Matrix& p, int epoch) {
  if (p.rows() != 1 || p.cols() != video.features) {
    throw ShapeError("mask_features: p is " + p.shape_string() + ", expected 1x" +
                     std::to_string(video.features));
  }
  MaskedFeatures out{video.object_matrix(), draw_masks(video.frames, video.objects, config, video.id, epoch)};
  for (std::size_t row : masked_rows(out.masks, video.objects))
    std::copy(p.data().begin(), p.data().end(), out.features.row(row).begin());
  return out;
}

// ---------------------------------------------------------------------------
// Model

std::string_view to_string(HeadKind kind) {
  return kind == HeadKind::kSigmoid ? "sigmoid" : "softmax";
}

HeadKind parse_head_kind(std::string_view text) {
  if (text == "sigmoid") return HeadKind::kSigmoid;
  if (text == "softmax") return HeadKind::kSoftmax;
  throw ConfigError("unknown head kind '" + std::string(text) + "' (expected sigmoid or softmax)");
}

ParameterList MfmModel::parameters() {
  ParameterList list = omega_t.parameters();
  list.add(mask_embedding);
  list.add(head.W);
  list.add(head.b);
  return list;
}

MfmModel init_mfm_model(std::size_t F, std::size_t F_a, std::size_t L, HeadKind kind,
                        std::uint64_t seed) {
  if (L == 0) throw ShapeError("init_mfm_model: L must be >= 1");
  MfmModel model;
  model.omega_t = init_gat(F, F_a == 0 ? F : F_a, derive_seed(seed, 1), "gat/omega_t");
  Rng rng(derive_seed(seed, tag(Stream::kInit), 2));
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix p(1, F);
  for (Real& v : p.data()) v = static_cast<Real>(normal(rng));
  model.mask_embedding = Parameter("mfm/p", std::move(p));
  const double a = std::sqrt(6.0 / static_cast<double>(F + L));
  std::uniform_real_distribution<double> uniform(-a, a);
  Matrix W(F, L);
  for (Real& v : W.data()) v = static_cast<Real>(uniform(rng));
  model.head.W = Parameter("mfm/head/W", std::move(W));
  model.head.b = Parameter("mfm/head/b", Matrix(1, L));
  model.head.kind = kind;
  return model;
}

MfmOutput mfm_forward(Tape& tape, MfmModel& model, Var nodes) {
  if (nodes.cols() != model.features()) {
    throw ShapeError("mfm_forward: features are " + nodes.value().shape_string() +
                     ", model expects F = " + std::to_string(model.features()));
  }
  Var latent = gat_forward(tape, model.omega_t, nodes);
  Var logits = ad::add(ad::matmul(latent, tape.param(model.head.W)), tape.param(model.head.b));
  Var scores = model.head.kind == HeadKind::kSigmoid ? ad::sigmoid(logits) : ad::rowsoftmax(logits);
  return {logits, scores};
}

namespace {

Matrix softmax_target(const TokenTarget& target) {
  Matrix t = target.target_row();
  const Real inv = Real(1) / static_cast<Real>(target.r);
  for (Real& v : t.data()) v *= inv;
  return t;
}

void check_target(const Matrix& logits, const TokenTarget& target) {
  if (logits.rows() != 1 || logits.cols() != target.topr.size()) {
    throw ShapeError("mfm_loss: logits are " + logits.shape_string() + ", target has length " +
                     std::to_string(target.topr.size()));
  }
}

}  // namespace

Var mfm_loss(HeadKind kind, Var logits, const TokenTarget& target) {
  check_target(logits.value(), target);
  if (kind == HeadKind::kSigmoid) return ad::bce_with_logits(logits, target.target_row());
  return ad::softmax_cross_entropy(logits, softmax_target(target));
}

double mfm_loss_value(HeadKind kind, const Matrix& logits, const TokenTarget& target) {
  Tape tape;
  Var loss = mfm_loss(kind, tape.constant(logits), target);
  const double value = loss.value()(0, 0);
  if (!std::isfinite(value)) throw NumericError("mfm_loss: non-finite loss");
  return value;
}

Var mfm_video_loss(Tape& tape, MfmModel& model, const Matrix& objects, std::size_t objects_per_frame,
                   const FrameMasks& masks, const TokenTarget& target) {
  const std::vector<std::size_t> rows = masked_rows(masks, objects_per_frame);
  Var nodes = ad::replace_rows(tape.constant(objects), tape.param(model.mask_embedding), rows);
  MfmOutput out = mfm_forward(tape, model, nodes);
  return mfm_loss(model.head.kind, out.logits, target);
}

void store_mfm_model(TensorArchive& archive, const MfmModel& model) {
  store_gat(archive, "gat/omega_t", model.omega_t);
  archive["mfm/p"] = model.mask_embedding.value;
  archive["mfm/head/W"] = model.head.W.value;
  archive["mfm/head/b"] = model.head.b.value;
  archive["mfm/head/kind"] = Matrix(1, 1, model.head.kind == HeadKind::kSigmoid ? Real(0) : Real(1));
}

MfmModel load_mfm_model(const TensorArchive& archive) {
  MfmModel model;
  model.omega_t = load_gat(archive, "gat/omega_t");
  const std::size_t F = model.omega_t.features();
  model.mask_embedding = Parameter("mfm/p", archive_get(archive, "mfm/p", 1, F));
  const Matrix& W = archive_get(archive, "mfm/head/W");
  if (W.rows() != F) throw DataError("tensor 'mfm/head/W' has " + W.shape_string() + ", expected F rows");
  model.head.W = Parameter("mfm/head/W", W);
  model.head.b = Parameter("mfm/head/b", archive_get(archive, "mfm/head/b", 1, W.cols()));
  if (auto it = archive.find("mfm/head/kind"); it != archive.end()) {
    model.head.kind = it->second(0, 0) == Real(0) ? HeadKind::kSigmoid : HeadKind::kSoftmax;
  }
  return model;
}

// ---------------------------------------------------------------------------
// Pretraining

namespace {

TensorArchive training_state(const MfmModel& model, const Adam& adam, int epoch) {
  TensorArchive archive;
  store_mfm_model(archive, model);
  for (auto& [key, value] : adam.state()) archive[key] = value;
  archive["train/epoch"] = Matrix(1, 1, static_cast<Real>(epoch));
  return archive;
}

}  // namespace

PretrainResult pretrain(const std::vector<VideoFeatures>& corpus, const Codebook& codebook,
                        const PretrainConfig& config, const MaskingConfig& masking,
                        const PretrainOptions& options) {
  if (corpus.empty()) throw DataError("pretraining corpus is empty");
  if (config.epochs < 1) throw ConfigError("epochs must be >= 1");
  if (config.batch_size < 1) throw ConfigError("batch size must be >= 1");
  MultiStepSchedule schedule(config.lr, config.milestones, config.lr_decay);
  schedule.validate(config.epochs);
  mask_count(masking.gamma, 1);  // validates gamma

  const std::size_t F = corpus.front().features;
  std::vector<TokenTarget> targets;
  std::vector<Matrix> objects;
  targets.reserve(corpus.size());
  objects.reserve(corpus.size());
  for (const auto& v : corpus) {
    v.validate();
    if (v.features != F) {
      throw DataError("video '" + v.id + "' has F = " + std::to_string(v.features) +
                      ", corpus uses F = " + std::to_string(F));
    }
    if (!v.has_patches()) throw DataError("video '" + v.id + "' has no patch embeddings");
    targets.push_back(tokenize_video(v.patch_view(), codebook, config.top_r));
    objects.push_back(v.object_matrix());
  }

  PretrainResult result;
  result.model = init_mfm_model(F, config.attention_dim, codebook.size(), config.head, config.seed);
  MfmModel& model = result.model;
  ParameterList params = model.parameters();
  Adam adam(params, config.adam);

  int start_epoch = 1;
  if (options.resume) {
    const TensorArchive archive = read_archive(*options.resume);
    MfmModel restored = load_mfm_model(archive);
    if (restored.features() != F || restored.vocab() != codebook.size() ||
        restored.omega_t.attention_dim() != model.omega_t.attention_dim()) {
      throw DataError("resume checkpoint dimensions do not match the corpus and codebook");
    }
    model.omega_t.U.value = restored.omega_t.U.value;
    model.omega_t.V.value = restored.omega_t.V.value;
    model.omega_t.W1.value = restored.omega_t.W1.value;
    model.omega_t.W2.value = restored.omega_t.W2.value;
    model.omega_t.wp.value = restored.omega_t.wp.value;
    model.mask_embedding.value = restored.mask_embedding.value;
    model.head.W.value = restored.head.W.value;
    model.head.b.value = restored.head.b.value;
    adam.load_state(archive);
    start_epoch = static_cast<int>(archive_get(archive, "train/epoch", 1, 1)(0, 0)) + 1;
  }

  const std::size_t n = corpus.size();
  const bool checkpointing = !options.checkpoint.empty();
  for (int epoch = start_epoch; epoch <= config.epochs; ++epoch) {
    const double lr = schedule.lr_at(epoch);
    // State at the end of the previous epoch, written if this epoch diverges.
    TensorArchive last_good;
    if (checkpointing) last_good = training_state(model, adam, epoch - 1);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(derive_seed(config.seed, tag(Stream::kShuffle), static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double loss_sum = 0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t end = std::min(n, start + config.batch_size);
      std::span<const std::size_t> batch(order.data() + start, end - start);
      const std::vector<double> losses =
          detail::batch_gradients(params, batch, options.threads, [&](Tape& tape, std::size_t i) {
            const VideoFeatures& v = corpus[i];
            const FrameMasks masks = draw_masks(v.frames, v.objects, masking, v.id, epoch);
            return mfm_video_loss(tape, model, objects[i], v.objects, masks, targets[i]);
          });
      for (std::size_t j = 0; j < losses.size(); ++j) {
        if (!std::isfinite(losses[j])) {
          if (checkpointing) write_archive(options.checkpoint, last_good);
          throw NumericError("non-finite loss on video '" + corpus[batch[j]].id + "' in epoch " +
                             std::to_string(epoch));
        }
        loss_sum += losses[j];
      }
      adam.step(lr);
    }

    EpochRecord record{epoch, lr, loss_sum / static_cast<double>(n), std::nullopt};
    result.log.push_back(record);
    if (options.on_epoch) options.on_epoch(record);
    if (checkpointing && options.checkpoint_every > 0 && epoch % options.checkpoint_every == 0 &&
        epoch != config.epochs) {
      write_archive(options.checkpoint, training_state(model, adam, epoch));
    }
  }
  if (checkpointing) write_archive(options.checkpoint, training_state(model, adam, config.epochs));
  return result;
}

}  // namespace mfm
