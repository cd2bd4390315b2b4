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

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <sys/wait.h>

#include "cli.hpp"
#include "commands.hpp"
#include "mfm/corpus.hpp"
#include "mfm/error.hpp"
#include "temp_dir.hpp"

using testing_support::TempDir;
namespace cli = mfm::cli;

namespace {

struct Result {
  int code;
  std::string out;
};

// Runs in-process with stdout and stderr captured.
Result mfm_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  auto* old_out = std::cout.rdbuf(out.rdbuf());
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  const int code = cli::run(args);
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  return {code, out.str() + err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

int subprocess(const std::string& args) {
  const std::string cmd = std::string(MFM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Small pretraining and labeled corpora shared by the tests below.
struct Corpora {
  TempDir dir{"cli"};
  std::string pre, train, test, codebook;
  Corpora() {
    pre = (dir / "pre").string();
    train = (dir / "train").string();
    test = (dir / "test").string();
    codebook = pre + "/codebook.mfmc";
    const std::vector<std::string> dims{"--frames", "3", "--objects", "4", "-q"};
    auto with = [&](std::vector<std::string> a) {
      a.insert(a.end(), dims.begin(), dims.end());
      return a;
    };
    REQUIRE(mfm_run(with({"synth-gen", "pretrain", "--out", pre, "--videos", "10"})).code == 0);
    REQUIRE(mfm_run(with({"synth-gen", "labeled", "--out", train, "--videos", "16"})).code == 0);
    REQUIRE(mfm_run(with({"synth-gen", "labeled", "--out", test, "--videos", "8", "--first-index",
                          "16"})).code == 0);
  }
  std::vector<std::string> pretrain(const std::string& out, int epochs = 4) const {
    return {"pretrain", "--corpus", pre, "--codebook", codebook, "--out", out, "--epochs",
            std::to_string(epochs), "--milestones", "2", "--top-r", "8", "-q"};
  }
};

}  // namespace

TEST_CASE("usage errors exit with 1") {
  CHECK(mfm_run({}).code == cli::kUsage);
  CHECK(mfm_run({"train"}).code == cli::kUsage);
  CHECK(mfm_run({"gradcheck", "--bogus"}).code == cli::kUsage);
  CHECK(mfm_run({"--help"}).code == cli::kOk);
  CHECK(mfm_run({"--version"}).code == cli::kOk);
  const Result r = mfm_run({"pretrain", "--corpus", "x", "--out", "y"});
  CHECK(r.code == cli::kUsage);
  CHECK(r.out.find("--codebook is required") != std::string::npos);
  CHECK(mfm_run({"gradcheck", "--threads", "0"}).code == cli::kUsage);
}

TEST_CASE("milestone lists") {
  CHECK(cli::parse_milestones("50,100") == std::vector<int>{50, 100});
  CHECK(cli::parse_milestones("60 110") == std::vector<int>{60, 110});
  CHECK(cli::parse_milestones("none").empty());
  CHECK_THROWS_AS(cli::parse_milestones("5,x"), mfm::ConfigError);
}

TEST_CASE("gradcheck passes, and fails with exit 3 at an impossible tolerance") {
  const Result r = mfm_run({"gradcheck", "--seed", "1"});
  CHECK(r.code == cli::kOk);
  CHECK(lines(r.out).size() == 8);
  CHECK(r.out.find("param=mfm/p ") != std::string::npos);
  CHECK(r.out.find("FAIL") == std::string::npos);
  CHECK(mfm_run({"gradcheck", "--seed", "1", "--head", "softmax"}).code == cli::kOk);
  CHECK(mfm_run({"gradcheck", "--seed", "1", "--tolerance", "1e-300"}).code == cli::kNumericError);
}

TEST_CASE("pretrain writes the manifest and a reproducible metrics log") {
  Corpora c;
  const std::string run = (c.dir / "run").string();
  REQUIRE(mfm_run(c.pretrain(run)).code == 0);
  const std::string manifest = slurp(run + "/run.cfg");
  CHECK(manifest.rfind("# mfm ", 0) == 0);
  CHECK(manifest.find("epochs=4") != std::string::npos);
  CHECK(manifest.find("gamma=0.4") != std::string::npos);
  const auto log = lines(slurp(run + "/metrics.log"));
  REQUIRE(log.size() == 5);
  for (int e = 1; e <= 4; ++e) CHECK(log[e - 1].rfind("epoch=" + std::to_string(e) + " lr=", 0) == 0);
  CHECK(log[1].find("lr=0.0001 ") != std::string::npos);
  CHECK(log[4].rfind("final_loss=", 0) == 0);
  CHECK(std::filesystem::exists(run + "/checkpoint.mfmk"));

  // Rerunning from the manifest alone reproduces the log.
  const std::string first = slurp(run + "/metrics.log");
  std::filesystem::copy_file(run + "/run.cfg", c.dir / "copy.cfg");
  REQUIRE(mfm_run({"pretrain", "--config", (c.dir / "copy.cfg").string(), "-q"}).code == 0);
  CHECK(slurp(run + "/metrics.log") == first);

  // Thread count does not change results.
  const std::string threaded = (c.dir / "threaded").string();
  auto args = c.pretrain(threaded);
  args.insert(args.end(), {"--threads", "3"});
  REQUIRE(mfm_run(args).code == 0);
  CHECK(slurp(threaded + "/metrics.log") == first);
}

TEST_CASE("config files: flags override, unknown keys rejected, MFM_SEED fallback") {
  Corpora c;
  const auto cfg = c.dir / "a.cfg";
  std::ofstream(cfg) << "epochs=2\nmilestones=none\nseed=11\n";
  const std::string run = (c.dir / "r").string();
  auto args = c.pretrain(run, 3);
  args.insert(args.end(), {"--config", cfg.string()});
  REQUIRE(mfm_run(args).code == 0);
  CHECK(lines(slurp(run + "/metrics.log")).size() == 4);  // --epochs 3 wins
  CHECK(slurp(run + "/run.cfg").find("seed=11") != std::string::npos);

  std::ofstream(c.dir / "bad.cfg") << "epochz=2\n";
  CHECK(mfm_run({"gradcheck", "--config", (c.dir / "bad.cfg").string()}).code == cli::kUsage);
  CHECK(mfm_run({"gradcheck", "--config", (c.dir / "missing.cfg").string()}).code == cli::kUsage);

  ::setenv("MFM_SEED", "23", 1);
  const std::string g1 = (c.dir / "g1").string(), g2 = (c.dir / "g2").string();
  REQUIRE(mfm_run({"gradcheck", "--out", g1}).code == 0);
  REQUIRE(mfm_run({"gradcheck", "--out", g2, "--seed", "4"}).code == 0);
  ::unsetenv("MFM_SEED");
  CHECK(slurp(g1 + "/run.cfg").find("seed=23") != std::string::npos);
  CHECK(slurp(g2 + "/run.cfg").find("seed=4") != std::string::npos);
}

TEST_CASE("finetune, evaluate and ablate") {
  Corpora c;
  const std::string run = (c.dir / "run").string();
  REQUIRE(mfm_run(c.pretrain(run)).code == 0);
  const std::string ckpt = run + "/checkpoint.mfmk";
  const std::string ft = (c.dir / "ft").string();
  const std::vector<std::string> common{"--classes", "4", "--epochs", "3", "--milestones", "none", "-q"};
  auto with = [&](std::vector<std::string> a) {
    a.insert(a.end(), common.begin(), common.end());
    return a;
  };

  REQUIRE(mfm_run(with({"finetune", "--train", c.train, "--val", c.test, "--ckpt", ckpt, "--init-w2",
                        "pretrained", "--init-w3", "pretrained", "--share-23", "true", "--global",
                        "false", "--frames", "3", "--out", ft}))
              .code == 0);
  const auto log = lines(slurp(ft + "/metrics.log"));
  REQUIRE(log.size() == 4);
  CHECK(log[0].find(" top1=") != std::string::npos);
  CHECK(log[3].rfind("final_loss=", 0) == 0);

  const Result ev = mfm_run({"evaluate", "--model", ft + "/model.mfmk", "--test", c.test});
  CHECK(ev.code == 0);
  CHECK(ev.out.rfind("top1=", 0) == 0);
  CHECK(log[2].find("top1=" + ev.out.substr(5, ev.out.find('.') - 5)) != std::string::npos);

  // Configuration and data errors.
  CHECK(mfm_run(with({"finetune", "--train", c.train, "--init-w2", "pretrained", "--out", ft})).code ==
        cli::kUsage);
  CHECK(mfm_run(with({"finetune", "--train", c.train, "--frames", "5", "--out", ft})).code ==
        cli::kDataError);
  CHECK(mfm_run({"finetune", "--train", c.train, "--classes", "2", "--epochs", "1", "--milestones",
                 "none", "--out", ft, "-q"})
            .code == cli::kDataError);  // labels up to 3
  CHECK(mfm_run(with({"finetune", "--train", c.pre, "--out", ft})).code == cli::kDataError);

  const std::string ab1 = (c.dir / "ab1").string(), ab2 = (c.dir / "ab2").string();
  const Result a1 = mfm_run(with({"ablate", "--train", c.train, "--test", c.test, "--ckpt", ckpt, "--out", ab1}));
  REQUIRE(a1.code == 0);
  const auto table = lines(a1.out);
  REQUIRE(table.size() == 7);
  CHECK(table[0].find("sharing") != std::string::npos);
  CHECK(table[6].rfind("gat_pretrained  gat_pretrained  yes", 0) == 0);
  REQUIRE(mfm_run(with({"ablate", "--train", c.train, "--test", c.test, "--ckpt", ckpt, "--out", ab2})).code == 0);
  CHECK(slurp(ab1 + "/metrics.log") == slurp(ab2 + "/metrics.log"));
  CHECK(lines(slurp(ab1 + "/metrics.log")).size() == 6);
  CHECK(mfm_run(with({"ablate", "--train", c.train, "--test", c.test})).code == cli::kUsage);
}

TEST_CASE("non-finite training exits with 3 and keeps a checkpoint") {
  Corpora c;
  auto videos = mfm::load_corpus(c.pre);
  for (float& x : videos[0].object_data) x = std::numeric_limits<float>::infinity();
  const std::string bad = (c.dir / "bad").string();
  mfm::write_corpus(bad, videos, "pretrain");
  const std::string run = (c.dir / "run").string();
  CHECK(mfm_run({"pretrain", "--corpus", bad, "--codebook", c.codebook, "--out", run, "--epochs", "2",
                 "--milestones", "none", "--top-r", "8", "-q"})
            .code == cli::kNumericError);
  CHECK(std::filesystem::exists(run + "/checkpoint.mfmk"));
}

TEST_CASE("corrupted inputs exit with 2 from the real executable") {
  Corpora c;
  const auto video = c.dir / "train" / "videos";
  const auto first = std::filesystem::directory_iterator(video)->path();
  const std::string bytes = slurp(first);
  std::ofstream(first, std::ios::binary | std::ios::trunc) << bytes.substr(0, bytes.size() / 2);
  const std::string out = (c.dir / "o").string();
  CHECK(subprocess("finetune --train " + c.train + " --classes 4 --epochs 1 --out " + out) == 2);
  std::ofstream(c.dir / "junk.mfmc", std::ios::binary) << "garbage";
  CHECK(subprocess("pretrain --corpus " + c.pre + " --codebook " + (c.dir / "junk.mfmc").string() +
                   " --out " + out) == 2);
  CHECK(subprocess("evaluate --model " + (c.dir / "junk.mfmc").string() + " --test " + c.test) == 2);
  CHECK(subprocess("pretrain") == 1);
  CHECK(subprocess("gradcheck --seed 2") == 0);
}
