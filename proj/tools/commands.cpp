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

#include "commands.hpp"

#include <charconv>
#include <iomanip>
#include <iostream>
#include <memory>

#include "cli.hpp"
#include "mfm/corpus.hpp"
#include "mfm/error.hpp"
#include "mfm/grad_check.hpp"
#include "mfm/mfm.hpp"
#include "mfm/rng.hpp"
#include "mfm/vigat.hpp"
#include "run_files.hpp"

namespace mfm::cli {

std::vector<int> parse_milestones(const std::string& text) {
  std::vector<int> out;
  if (text == "none" || text.empty()) return out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t end = text.find_first_of(", ", pos);
    const std::string token = text.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
    if (!token.empty()) {
      int value = 0;
      auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
      if (ec != std::errc() || ptr != token.data() + token.size()) {
        throw ConfigError("bad milestone '" + token + "' in '" + text + "'");
      }
      out.push_back(value);
    }
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  return out;
}

namespace {

std::vector<VideoFeatures> load(const std::string& dir, std::size_t frames) {
  std::vector<VideoFeatures> corpus = load_corpus(dir);
  if (corpus.empty()) throw DataError("corpus " + dir + " lists no videos");
  if (frames > 0) {
    for (const auto& v : corpus) {
      if (v.frames != frames) {
        throw DataError("video '" + v.id + "' has N = " + std::to_string(v.frames) +
                        " frames, --frames is " + std::to_string(frames));
      }
    }
  }
  return corpus;
}

Record epoch_record(const EpochRecord& r) {
  Record rec;
  rec.add("epoch", r.epoch).add("lr", r.lr).add("loss", r.loss);
  if (r.top1) rec.add("top1", *r.top1);
  return rec;
}

std::string fixed2(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << v;
  return s.str();
}

struct Pretrained {
  std::optional<GatBlock> block;
};

Pretrained load_pretrained(const std::string& path) {
  if (path.empty() || path == "none") return {};
  return {load_mfm_model(read_archive(path)).omega_t};
}

VigatConfig vigat_config(const TrainArgs& a, const Pretrained& p) {
  VigatConfig v;
  v.use_global = a.global;
  v.omega1 = parse_block_mode(a.init_w1);
  v.omega2 = parse_block_mode(a.init_w2);
  v.omega3 = parse_block_mode(a.init_w3);
  v.share_23 = a.share_23;
  v.num_classes = a.classes;
  v.hidden = a.hidden;
  v.attention_dim = a.attention_dim;
  if (v.attention_dim == 0 && p.block) v.attention_dim = p.block->attention_dim();
  v.validate();
  if (v.needs_pretrained() && !p.block) {
    throw ConfigError("gat_pretrained mode needs --ckpt <checkpoint>");
  }
  return v;
}

FinetuneConfig finetune_config(const TrainArgs& a, std::uint64_t seed) {
  FinetuneConfig f;
  f.epochs = a.epochs;
  f.lr = a.lr;
  f.milestones = parse_milestones(a.milestones);
  f.lr_decay = a.decay;
  f.batch_size = a.batch;
  f.seed = seed;
  return f;
}

}  // namespace

int synth_gen(const SynthGenArgs& a, const Common& c, std::ostream& out) {
  const SynthWorld world = make_world(a.world);
  std::vector<VideoFeatures> videos;
  Record summary;
  summary.add("kind", a.kind);
  if (a.kind == "pretrain") {
    PretrainSynthConfig pc = a.pretrain;
    if (a.videos > 0) pc.videos = a.videos;
    pc.frames = a.frames;
    pc.objects = a.objects;
    pc.patches = a.patches;
    pc.feature_noise = a.feature_noise;
    pc.video_noise = a.video_noise;
    pc.seed = c.seed;
    videos = synth_pretrain_corpus(world, pc);
  } else {
    LabeledSynthConfig lc = a.labeled;
    if (a.videos > 0) lc.videos = a.videos;
    lc.frames = a.frames;
    lc.objects = a.objects;
    lc.patches = a.patches;
    lc.feature_noise = a.feature_noise;
    lc.video_noise = a.video_noise;
    lc.seed = c.seed;
    videos = synth_labeled_corpus(world, lc);
  }
  RunFiles files(c.out, "synth-gen", c.config);
  write_corpus(c.out, videos, a.kind);
  if (a.kind == "pretrain") save_codebook(files.dir() / "codebook.mfmc", world.codebook);
  summary.add("videos", videos.size()).add("frames", a.frames).add("objects", a.objects);
  summary.add("features", a.world.features);
  files.log(summary);
  if (!c.quiet) out << summary.str() << '\n';
  return kOk;
}

int pretrain(const PretrainArgs& a, const Common& c, std::ostream& out) {
  const auto corpus = load(a.corpus, 0);
  const Codebook codebook = load_codebook(a.codebook);
  PretrainConfig config;
  config.epochs = a.epochs;
  config.lr = a.lr;
  config.milestones = parse_milestones(a.milestones);
  config.lr_decay = a.decay;
  config.batch_size = a.batch;
  config.top_r = a.top_r;
  config.attention_dim = a.attention_dim;
  config.head = parse_head_kind(a.head);
  config.seed = c.seed;
  const MaskingConfig masking{a.gamma, a.mask_seed.value_or(c.seed)};

  RunFiles files(c.out, "pretrain", c.config);
  PretrainOptions options;
  options.threads = c.threads;
  options.checkpoint = files.dir() / "checkpoint.mfmk";
  options.checkpoint_every = a.checkpoint_every;
  if (!a.resume.empty()) options.resume = a.resume;
  options.on_epoch = [&](const EpochRecord& r) {
    const Record rec = epoch_record(r);
    files.log(rec);
    if (!c.quiet) out << rec.str() << '\n';
  };
  const PretrainResult result = pretrain(corpus, codebook, config, masking, options);
  if (!result.log.empty()) {
    files.log(Record().add("final_loss", result.log.back().loss).add("epochs", config.epochs));
  }
  if (!c.quiet) out << "checkpoint " << options.checkpoint.string() << '\n';
  return kOk;
}

int finetune(const TrainArgs& a, const Common& c, std::ostream& out) {
  const auto train = load(a.train, a.frames);
  std::optional<std::vector<VideoFeatures>> val;
  if (!a.val.empty()) val = load(a.val, a.frames);
  const Pretrained pretrained = load_pretrained(a.ckpt);
  const VigatConfig config = vigat_config(a, pretrained);
  VigatModel model = init_from_pretrained(config, train.front().features, c.seed,
                                          pretrained.block ? &*pretrained.block : nullptr);

  RunFiles files(c.out, "finetune", c.config);
  FinetuneOptions options;
  options.threads = c.threads;
  if (val) options.validation = &*val;
  options.on_epoch = [&](const EpochRecord& r) {
    const Record rec = epoch_record(r);
    files.log(rec);
    if (!c.quiet) out << rec.str() << '\n';
  };
  const auto log = mfm::finetune(model, train, finetune_config(a, c.seed), options);
  TensorArchive archive;
  store_vigat(archive, model);
  write_archive(files.dir() / "model.mfmk", archive);
  Record final;
  final.add("final_loss", log.back().loss);
  if (log.back().top1) final.add("final_top1", *log.back().top1);
  files.log(final);
  if (!c.quiet) out << "model " << (files.dir() / "model.mfmk").string() << '\n';
  return kOk;
}

int evaluate(const EvaluateArgs& a, const Common& c, std::ostream& out) {
  const VigatModel model = load_vigat(read_archive(a.model));
  const auto test = load(a.test, a.frames);
  const double top1 = mfm::evaluate(model, test, c.threads);
  out << "top1=" << fixed2(top1) << '\n';
  if (!c.out.empty()) {
    RunFiles files(c.out, "evaluate", c.config);
    files.log(Record().add("videos", test.size()).add("top1", top1));
  }
  return kOk;
}

int gradcheck(const GradcheckArgs& a, const Common& c, std::ostream& out) {
  // N=2, K=3, F=F_a=5, L=7, Q=2, D=4.
  constexpr std::size_t N = 2, K = 3, F = 5, L = 7, Q = 2, D = 4;
  const HeadKind head = parse_head_kind(a.head);
  Rng rng(derive_seed(c.seed, 101));
  std::normal_distribution<double> normal(0.0, 1.0);
  VideoFeatures v;
  v.id = "gradcheck";
  v.frames = N;
  v.objects = K;
  v.features = F;
  v.patches = Q;
  v.patch_dim = D;
  for (std::size_t i = 0; i < N * K * F; ++i) v.object_data.push_back(static_cast<float>(normal(rng)));
  std::vector<float> patches;
  for (std::size_t i = 0; i < N * K * Q * D; ++i) patches.push_back(static_cast<float>(normal(rng)));
  v.patch_data = std::move(patches);

  const Codebook codebook = generate_codebook(L, D, derive_seed(c.seed, 102));
  const TokenTarget target = tokenize_video(v.patch_view(), codebook, 3);
  const FrameMasks masks = draw_masks(N, K, MaskingConfig{0.4, c.seed}, v.id, 1);
  MfmModel model = init_mfm_model(F, F, L, head, derive_seed(c.seed, 103));
  // p starts at zero in training; a random value exercises its gradient better.
  for (Real& x : model.mask_embedding.value.data()) x = static_cast<Real>(normal(rng));
  const Matrix objects = v.object_matrix();

  GradCheckOptions options;
  options.step = static_cast<Real>(a.step);
  options.tolerance = static_cast<Real>(a.tolerance);
  options.seed = c.seed;
  const auto reports = grad_check(
      [&](Tape& t) { return mfm_video_loss(t, model, objects, K, masks, target); },
      model.parameters(), options);

  std::optional<RunFiles> files;
  if (!c.out.empty()) files.emplace(c.out, "gradcheck", c.config);
  bool pass = true;
  for (const auto& r : reports) {
    Record rec;
    rec.add("param", r.parameter).add("max_rel_error", static_cast<double>(r.max_relative_error));
    rec.add("coords", r.coordinates_checked).add("status", r.pass ? "ok" : "FAIL");
    if (!r.message.empty()) rec.add("note", r.message);
    out << rec.str() << '\n';
    if (files) files->log(rec);
    pass = pass && r.pass;
  }
  return pass ? kOk : kNumericError;
}

int ablate(const AblateArgs& a, const Common& c, std::ostream& out) {
  if (a.repeats < 1) throw ConfigError("--repeats must be >= 1");
  const auto train = load(a.train.train, a.train.frames);
  const auto test = load(a.test, a.train.frames);
  const Pretrained pretrained = load_pretrained(a.train.ckpt);
  if (!pretrained.block) throw ConfigError("ablate needs --ckpt <checkpoint>");

  struct Row {
    const char* w2;
    const char* w3;
    bool share;
  };
  static constexpr Row kRows[] = {
      {"mean_pool", "mean_pool", false},           {"gat_pretrained", "gat_random", false},
      {"gat_random", "mean_pool", false},          {"gat_random", "gat_random", true},
      {"gat_pretrained", "mean_pool", false},      {"gat_pretrained", "gat_pretrained", true},
  };

  std::optional<RunFiles> files;
  if (!c.out.empty()) files.emplace(c.out, "ablate", c.config);
  std::ostringstream table;
  table << std::left << std::setw(16) << "omega2" << std::setw(16) << "omega3" << std::setw(9)
        << "sharing" << "top1\n";
  for (const Row& row : kRows) {
    TrainArgs args = a.train;
    args.init_w2 = row.w2;
    args.init_w3 = row.w3;
    args.share_23 = row.share;
    const VigatConfig config = vigat_config(args, pretrained);
    double sum = 0;
    for (int r = 0; r < a.repeats; ++r) {
      const std::uint64_t seed = c.seed + static_cast<std::uint64_t>(r);
      VigatModel model = init_from_pretrained(config, train.front().features, seed, &*pretrained.block);
      FinetuneOptions options;
      options.threads = c.threads;
      mfm::finetune(model, train, finetune_config(args, seed), options);
      sum += mfm::evaluate(model, test, c.threads);
    }
    const double top1 = sum / a.repeats;
    table << std::setw(16) << row.w2 << std::setw(16) << row.w3 << std::setw(9)
          << (row.share ? "yes" : "no") << fixed2(top1) << '\n';
    if (files) {
      files->log(Record()
                     .add("omega2", row.w2)
                     .add("omega3", row.w3)
                     .add("sharing", row.share ? "yes" : "no")
                     .add("top1", top1));
    }
  }
  out << table.str();
  if (files) {
    std::ofstream tsv(files->dir() / "ablation.txt", std::ios::trunc);
    tsv << table.str();
  }
  return kOk;
}

}  // namespace mfm::cli
