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

#include "mfm/vigat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "batch.hpp"
#include "mfm/error.hpp"
#include "mfm/parallel.hpp"
#include "mfm/rng.hpp"

namespace mfm {

std::string_view to_string(BlockMode mode) {
  switch (mode) {
    case BlockMode::kGatRandom: return "gat_random";
    case BlockMode::kGatPretrained: return "gat_pretrained";
    case BlockMode::kMeanPool: return "mean_pool";
  }
  return "?";
}

BlockMode parse_block_mode(std::string_view text) {
  if (text == "gat_random" || text == "rand" || text == "random") return BlockMode::kGatRandom;
  if (text == "gat_pretrained" || text == "pretrained") return BlockMode::kGatPretrained;
  if (text == "mean_pool" || text == "mean") return BlockMode::kMeanPool;
  throw ConfigError("unknown block mode '" + std::string(text) +
                    "' (expected gat_random, gat_pretrained or mean_pool)");
}

void VigatConfig::validate() const {
  if (num_classes < 2) throw ConfigError("num_classes must be >= 2");
  if (use_global && omega1 == BlockMode::kGatPretrained) {
    throw ConfigError("omega1 cannot be initialized from the pretrained block");
  }
  if (share_23) {
    if (omega2 == BlockMode::kMeanPool || omega3 == BlockMode::kMeanPool) {
      throw ConfigError("weight sharing needs omega2 and omega3 in a gat mode");
    }
    if (omega2 != omega3) throw ConfigError("weight sharing needs omega2 and omega3 in the same mode");
  }
}

ParameterList VigatModel::parameters() {
  ParameterList list;
  for (const auto& block : {omega1, omega2, omega3})
    if (block) list.extend(block->parameters());
  for (Parameter* p : {&head.W1, &head.b1, &head.W2, &head.b2}) list.add(*p);
  return list;
}

VigatModel VigatModel::clone() const {
  VigatModel out;
  out.config = config;
  out.features = features;
  auto copy = [](const std::shared_ptr<GatBlock>& b) {
    return b ? std::make_shared<GatBlock>(*b) : nullptr;
  };
  out.omega1 = copy(omega1);
  out.omega2 = copy(omega2);
  out.omega3 = omega3 == omega2 ? out.omega2 : copy(omega3);
  out.head = head;
  return out;
}

namespace {

Matrix glorot(std::size_t rows, std::size_t cols, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-a, a);
  Matrix m(rows, cols);
  for (Real& v : m.data()) v = static_cast<Real>(dist(rng));
  return m;
}

std::shared_ptr<GatBlock> make_block(BlockMode mode, std::size_t F, std::size_t Fa,
                                     std::uint64_t seed, const GatBlock* pretrained,
                                     const std::string& prefix) {
  switch (mode) {
    case BlockMode::kMeanPool: return nullptr;
    case BlockMode::kGatRandom: return std::make_shared<GatBlock>(init_gat(F, Fa, seed, prefix));
    case BlockMode::kGatPretrained:
      if (!pretrained) throw ConfigError(prefix + ": gat_pretrained mode needs a checkpoint");
      if (pretrained->features() != F || pretrained->attention_dim() != Fa) {
        throw DataError("pretrained block has F = " + std::to_string(pretrained->features()) +
                        ", F_a = " + std::to_string(pretrained->attention_dim()) +
                        "; model needs F = " + std::to_string(F) + ", F_a = " + std::to_string(Fa));
      }
      return std::make_shared<GatBlock>(copy_gat(*pretrained, prefix));
  }
  return nullptr;
}

}  // namespace

VigatModel init_from_pretrained(const VigatConfig& config, std::size_t F, std::uint64_t seed,
                                const GatBlock* pretrained) {
  config.validate();
  if (F == 0) throw ShapeError("init_from_pretrained: F must be >= 1");
  const std::size_t Fa = config.attention_dim == 0 ? F : config.attention_dim;
  VigatModel model;
  model.config = config;
  model.features = F;
  if (config.use_global) {
    model.omega1 = make_block(config.omega1, F, Fa, derive_seed(seed, 11), nullptr, "vigat/omega1");
  }
  model.omega2 = make_block(config.omega2, F, Fa, derive_seed(seed, 12), pretrained, "vigat/omega2");
  model.omega3 = config.share_23
                     ? model.omega2
                     : make_block(config.omega3, F, Fa, derive_seed(seed, 13), pretrained, "vigat/omega3");

  const std::size_t hidden = config.hidden == 0 ? F : config.hidden;
  Rng rng(derive_seed(seed, tag(Stream::kInit), 14));
  model.head.W1 = Parameter("vigat/head/W1", glorot(model.concat_dim(), hidden, rng));
  model.head.b1 = Parameter("vigat/head/b1", Matrix(1, hidden));
  model.head.W2 = Parameter("vigat/head/W2", glorot(hidden, config.num_classes, rng));
  model.head.b2 = Parameter("vigat/head/b2", Matrix(1, config.num_classes));
  return model;
}

namespace {

Var pool(Tape& tape, GatBlock* block, Var nodes) {
  return block ? gat_forward(tape, *block, nodes) : ad::mean_rows(nodes);
}

}  // namespace

VigatOutput vigat_forward(Tape& tape, VigatModel& model, const VideoFeatures& video) {
  if (video.features != model.features) {
    throw ShapeError("video '" + video.id + "' has F = " + std::to_string(video.features) +
                     ", model expects " + std::to_string(model.features));
  }
  if (model.config.use_global && !video.has_frames()) {
    throw DataError("video '" + video.id + "' has no frame features but the global branch is enabled");
  }
  std::vector<Var> frame_vectors;
  frame_vectors.reserve(video.frames);
  for (std::size_t n = 0; n < video.frames; ++n) {
    frame_vectors.push_back(pool(tape, model.omega2.get(), tape.constant(video.frame_objects(n))));
  }
  VigatOutput out;
  out.local = pool(tape, model.omega3.get(), ad::stack_rows(frame_vectors));
  Var features = out.local;
  if (model.config.use_global) {
    out.global = pool(tape, model.omega1.get(), tape.constant(video.frame_matrix()));
    features = ad::concat_cols(*out.global, out.local);
  }
  ClassifierHead& h = model.head;
  Var hidden = ad::relu(ad::add(ad::matmul(features, tape.param(h.W1)), tape.param(h.b1)));
  out.logits = ad::add(ad::matmul(hidden, tape.param(h.W2)), tape.param(h.b2));
  return out;
}

Matrix vigat_predict(const VigatModel& model, const VideoFeatures& video) {
  Tape tape;
  // The tape only reads parameter values.
  VigatOutput out = vigat_forward(tape, const_cast<VigatModel&>(model), video);
  return rowsoftmax(out.logits.value());
}

std::size_t argmax(std::span<const Real> scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return best;
}

namespace {

void check_labels(const std::vector<VideoFeatures>& corpus, std::size_t classes, const char* what) {
  for (const auto& v : corpus) {
    if (!v.label) throw DataError(std::string(what) + " video '" + v.id + "' has no label");
    if (*v.label < 0 || static_cast<std::size_t>(*v.label) >= classes) {
      throw DataError(std::string(what) + " video '" + v.id + "' has label " +
                      std::to_string(*v.label) + " outside [0, " + std::to_string(classes) + ")");
    }
  }
}

Matrix one_hot(std::size_t label, std::size_t classes) {
  Matrix m(1, classes);
  m(0, label) = Real(1);
  return m;
}

}  // namespace

std::vector<EpochRecord> finetune(VigatModel& model, const std::vector<VideoFeatures>& train,
                                  const FinetuneConfig& config, const FinetuneOptions& options) {
  if (train.empty()) throw DataError("training corpus is empty");
  if (config.epochs < 1) throw ConfigError("epochs must be >= 1");
  if (config.batch_size < 1) throw ConfigError("batch size must be >= 1");
  const std::size_t classes = model.config.num_classes;
  check_labels(train, classes, "training");
  if (options.validation) check_labels(*options.validation, classes, "validation");
  MultiStepSchedule schedule(config.lr, config.milestones, config.lr_decay);
  schedule.validate(config.epochs);

  ParameterList params = model.parameters();
  Adam adam(params, config.adam);
  std::vector<EpochRecord> log;
  const std::size_t n = train.size();
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const double lr = schedule.lr_at(epoch);
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
            const VideoFeatures& v = train[i];
            VigatOutput out = vigat_forward(tape, model, v);
            return ad::softmax_cross_entropy(out.logits,
                                             one_hot(static_cast<std::size_t>(*v.label), classes));
          });
      for (std::size_t j = 0; j < losses.size(); ++j) {
        if (!std::isfinite(losses[j])) {
          throw NumericError("non-finite loss on video '" + train[batch[j]].id + "' in epoch " +
                             std::to_string(epoch));
        }
        loss_sum += losses[j];
      }
      adam.step(lr);
      if (options.on_step) options.on_step(model, epoch, adam.steps());
    }

    EpochRecord record{epoch, lr, loss_sum / static_cast<double>(n), std::nullopt};
    if (options.validation) record.top1 = evaluate(model, *options.validation, options.threads);
    log.push_back(record);
    if (options.on_epoch) options.on_epoch(record);
  }
  return log;
}

double evaluate(const VigatModel& model, const std::vector<VideoFeatures>& corpus, unsigned threads) {
  if (corpus.empty()) throw DataError("evaluation corpus is empty");
  check_labels(corpus, model.config.num_classes, "evaluation");
  std::vector<char> correct(corpus.size(), 0);
  parallel_for(corpus.size(), threads, [&](std::size_t i) {
    const Matrix probs = vigat_predict(model, corpus[i]);
    correct[i] = argmax(probs.data()) == static_cast<std::size_t>(*corpus[i].label);
  });
  const auto hits = static_cast<double>(std::count(correct.begin(), correct.end(), 1));
  const double percent = 100.0 * hits / static_cast<double>(corpus.size());
  return std::round(percent * 100.0) / 100.0;
}

// ---------------------------------------------------------------------------
// Model files

namespace {

Real mode_code(BlockMode m) { return static_cast<Real>(static_cast<int>(m)); }

BlockMode mode_from(Real code) {
  const int c = static_cast<int>(code);
  if (c < 0 || c > 2 || static_cast<Real>(c) != code) throw DataError("bad block mode in model file");
  return static_cast<BlockMode>(c);
}

}  // namespace

void store_vigat(TensorArchive& archive, const VigatModel& model) {
  const VigatConfig& c = model.config;
  archive["vigat/config"] = Matrix(
      1, 9,
      std::vector<Real>{Real(c.use_global ? 1 : 0), mode_code(c.omega1), mode_code(c.omega2),
                        mode_code(c.omega3), Real(c.share_23 ? 1 : 0), static_cast<Real>(c.num_classes),
                        static_cast<Real>(model.head.W1.value.cols()), static_cast<Real>(model.features),
                        static_cast<Real>(c.attention_dim)});
  if (model.omega1) store_gat(archive, "vigat/omega1", *model.omega1);
  if (model.omega2) store_gat(archive, "vigat/omega2", *model.omega2);
  if (model.omega3 && model.omega3 != model.omega2) store_gat(archive, "vigat/omega3", *model.omega3);
  archive["vigat/head/W1"] = model.head.W1.value;
  archive["vigat/head/b1"] = model.head.b1.value;
  archive["vigat/head/W2"] = model.head.W2.value;
  archive["vigat/head/b2"] = model.head.b2.value;
}

VigatModel load_vigat(const TensorArchive& archive) {
  const Matrix& cfg = archive_get(archive, "vigat/config", 1, 9);
  VigatModel model;
  VigatConfig& c = model.config;
  c.use_global = cfg(0, 0) != 0;
  c.omega1 = mode_from(cfg(0, 1));
  c.omega2 = mode_from(cfg(0, 2));
  c.omega3 = mode_from(cfg(0, 3));
  c.share_23 = cfg(0, 4) != 0;
  c.num_classes = static_cast<std::size_t>(cfg(0, 5));
  c.hidden = static_cast<std::size_t>(cfg(0, 6));
  model.features = static_cast<std::size_t>(cfg(0, 7));
  c.attention_dim = static_cast<std::size_t>(cfg(0, 8));
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
  const std::size_t F = model.features;
  auto load_block = [&](const std::string& prefix) {
    auto block = std::make_shared<GatBlock>(load_gat(archive, prefix));
    if (block->features() != F) throw DataError(prefix + " does not match F = " + std::to_string(F));
    return block;
  };
  if (c.use_global && c.omega1 != BlockMode::kMeanPool) model.omega1 = load_block("vigat/omega1");
  if (c.omega2 != BlockMode::kMeanPool) model.omega2 = load_block("vigat/omega2");
  if (c.share_23) {
    model.omega3 = model.omega2;
  } else if (c.omega3 != BlockMode::kMeanPool) {
    model.omega3 = load_block("vigat/omega3");
  }
  model.head.W1 = Parameter("vigat/head/W1", archive_get(archive, "vigat/head/W1", model.concat_dim(), c.hidden));
  model.head.b1 = Parameter("vigat/head/b1", archive_get(archive, "vigat/head/b1", 1, c.hidden));
  model.head.W2 = Parameter("vigat/head/W2", archive_get(archive, "vigat/head/W2", c.hidden, c.num_classes));
  model.head.b2 = Parameter("vigat/head/b2", archive_get(archive, "vigat/head/b2", 1, c.num_classes));
  return model;
}

}  // namespace mfm
