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

#include "cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <memory>

#include "commands.hpp"
#include "mfm/error.hpp"

#ifndef MFM_VERSION_STRING
#define MFM_VERSION_STRING "unknown"
#endif

namespace mfm::cli {
namespace {

// Plain "key=value" lines in a --config file apply to the subcommand being
// run; "[section]" headers and dotted keys keep their CLI11 meaning.
class SubcommandConfig : public CLI::ConfigINI {
 public:
  explicit SubcommandConfig(const CLI::App* app) : app_(app) {}

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    auto items = CLI::ConfigINI::from_config(input);
    const auto active = app_->get_subcommands();
    if (!active.empty()) {
      for (auto& item : items)
        if (item.parents.empty()) item.parents = {active.front()->get_name()};
    }
    return items;
  }

 private:
  const CLI::App* app_;
};

void add_common(CLI::App* sub, Common& c, bool out_required) {
  sub->add_option("--seed", c.seed, "Random seed")->envname("MFM_SEED")->capture_default_str();
  sub->add_option("--threads", c.threads, "Maximum worker threads")
      ->check(CLI::Range(1u, 1024u))
      ->capture_default_str();
  auto* out = sub->add_option("--out", c.out, "Output directory");
  if (out_required) out->required();
}

void add_train(CLI::App* sub, TrainArgs& t) {
  sub->add_option("--train", t.train, "Labeled training corpus directory")->required();
  sub->add_option("--ckpt", t.ckpt, "Pretraining checkpoint, or 'none'")->capture_default_str();
  sub->add_option("--init-w1", t.init_w1, "omega1 mode: rand | mean")->capture_default_str();
  sub->add_option("--global", t.global, "Enable the global frame branch")->capture_default_str();
  sub->add_option("--frames", t.frames, "Required frames per video; 0 accepts any")
      ->capture_default_str();
  sub->add_option("--classes", t.classes, "Number of classes")->capture_default_str();
  sub->add_option("--hidden", t.hidden, "Classifier width; 0 means F")->capture_default_str();
  sub->add_option("--attention-dim", t.attention_dim, "F_a; 0 means the checkpoint's or F")
      ->capture_default_str();
  sub->add_option("--epochs", t.epochs)->capture_default_str();
  sub->add_option("--lr", t.lr)->capture_default_str();
  sub->add_option("--milestones", t.milestones, "Epochs where lr decays, e.g. 60,110 or none")
      ->capture_default_str();
  sub->add_option("--decay", t.decay)->capture_default_str();
  sub->add_option("--batch", t.batch)->check(CLI::PositiveNumber)->capture_default_str();
}

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    std::cerr << "mfm: config error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericError& e) {
    std::cerr << "mfm: numeric failure: " << e.what() << '\n';
    return kNumericError;
  } catch (const DataError& e) {
    std::cerr << "mfm: data error: " << e.what() << '\n';
    return kDataError;
  } catch (const ShapeError& e) {
    std::cerr << "mfm: data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "mfm: data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "mfm: error: " << e.what() << '\n';
    return kDataError;
  }
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app("Masked feature modelling pretraining and ViGAT fine-tuning", "mfm");
  app.set_version_flag("--version", MFM_VERSION_STRING);
  app.set_config("--config", "", "key=value file; command-line flags take precedence");
  app.config_formatter(std::make_shared<SubcommandConfig>(&app));
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.fallthrough();
  app.require_subcommand(1);
  Common common;
  app.add_flag("-q,--quiet", common.quiet, "Only print final results");

  SynthGenArgs synth;
  auto* s = app.add_subcommand("synth-gen", "Generate a synthetic corpus");
  s->add_option("kind", synth.kind, "pretrain | labeled")
      ->required()
      ->check(CLI::IsMember({"pretrain", "labeled"}));
  add_common(s, common, true);
  s->add_option("--videos", synth.videos, "Number of videos; 0 keeps the default")->capture_default_str();
  s->add_option("--frames", synth.frames)->check(CLI::PositiveNumber)->capture_default_str();
  s->add_option("--objects", synth.objects)->check(CLI::PositiveNumber)->capture_default_str();
  s->add_option("--patches", synth.patches)->check(CLI::PositiveNumber)->capture_default_str();
  s->add_option("--vocab", synth.world.vocab)->capture_default_str();
  s->add_option("--embed-dim", synth.world.embed_dim)->capture_default_str();
  s->add_option("--features", synth.world.features)->capture_default_str();
  s->add_option("--topic-size", synth.world.topic_size)->capture_default_str();
  s->add_option("--signal-rank", synth.world.signal_rank)->capture_default_str();
  s->add_option("--world-seed", synth.world.seed, "Seed of the shared latent structure")
      ->capture_default_str();
  s->add_option("--feature-noise", synth.feature_noise)->capture_default_str();
  s->add_option("--video-noise", synth.video_noise)->capture_default_str();
  s->add_option("--patch-noise", synth.pretrain.patch_noise)->capture_default_str();
  s->add_option("--dominant-weight", synth.pretrain.dominant_weight)->capture_default_str();
  s->add_option("--classes", synth.labeled.classes)->capture_default_str();
  s->add_option("--class-signal", synth.labeled.class_signal)->capture_default_str();
  s->add_option("--frame-noise", synth.labeled.frame_noise)->capture_default_str();
  s->add_option("--first-index", synth.labeled.first_index)->capture_default_str();

  PretrainArgs pre;
  auto* p = app.add_subcommand("pretrain", "MFM pretraining of the GAT block");
  p->add_option("--corpus", pre.corpus, "Pretraining corpus directory")->required();
  p->add_option("--codebook", pre.codebook, "Tokenizer codebook file")->required();
  add_common(p, common, true);
  p->add_option("--epochs", pre.epochs)->capture_default_str();
  p->add_option("--lr", pre.lr)->capture_default_str();
  p->add_option("--milestones", pre.milestones, "Epochs where lr decays, e.g. 50,100 or none")
      ->capture_default_str();
  p->add_option("--decay", pre.decay)->capture_default_str();
  p->add_option("--batch", pre.batch)->check(CLI::PositiveNumber)->capture_default_str();
  p->add_option("--top-r", pre.top_r)->capture_default_str();
  p->add_option("--attention-dim", pre.attention_dim, "F_a; 0 means F")->capture_default_str();
  p->add_option("--head", pre.head, "sigmoid | softmax")
      ->check(CLI::IsMember({"sigmoid", "softmax"}))
      ->capture_default_str();
  p->add_option("--gamma", pre.gamma, "Masking ratio")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  p->add_option("--mask-seed", pre.mask_seed, "Masking seed; defaults to --seed");
  p->add_option("--checkpoint-every", pre.checkpoint_every)->capture_default_str();
  p->add_option("--resume", pre.resume, "Checkpoint to resume from");

  TrainArgs ft;
  auto* f = app.add_subcommand("finetune", "Fine-tune ViGAT on a labeled corpus");
  add_train(f, ft);
  add_common(f, common, true);
  f->add_option("--val", ft.val, "Validation corpus directory");
  f->add_option("--init-w2", ft.init_w2, "omega2 mode: rand | pretrained | mean")->capture_default_str();
  f->add_option("--init-w3", ft.init_w3, "omega3 mode: rand | pretrained | mean")->capture_default_str();
  f->add_option("--share-23", ft.share_23, "Share omega2 and omega3 weights")->capture_default_str();

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Top-1 accuracy of a fine-tuned model");
  e->add_option("--model", ev.model, "Model file written by finetune")->required();
  e->add_option("--test", ev.test, "Labeled test corpus directory")->required();
  e->add_option("--frames", ev.frames)->capture_default_str();
  add_common(e, common, false);

  GradcheckArgs gc;
  auto* g = app.add_subcommand("gradcheck", "Finite-difference check of the MFM loss");
  g->add_option("--head", gc.head)->check(CLI::IsMember({"sigmoid", "softmax"}))->capture_default_str();
  g->add_option("--step", gc.step)->capture_default_str();
  g->add_option("--tolerance", gc.tolerance)->capture_default_str();
  add_common(g, common, false);

  AblateArgs ab;
  ab.train.global = false;
  auto* a = app.add_subcommand("ablate", "Fine-tune the six local-branch configurations");
  add_train(a, ab.train);
  a->add_option("--test", ab.test, "Labeled test corpus directory")->required();
  a->add_option("--repeats", ab.repeats, "Seeds averaged per row")->capture_default_str();
  add_common(a, common, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  common.config = sub->config_to_str(true, false);
  return guarded([&] {
    std::ostream& out = std::cout;
    if (sub == s) return synth_gen(synth, common, out);
    if (sub == p) return pretrain(pre, common, out);
    if (sub == f) return finetune(ft, common, out);
    if (sub == e) return evaluate(ev, common, out);
    if (sub == g) return gradcheck(gc, common, out);
    return ablate(ab, common, out);
  });
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"mfm"};
  for (const auto& s : args) argv.push_back(s.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace mfm::cli
