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

#include <benchmark/benchmark.h>

#include <random>

#include "mfm/gat.hpp"
#include "mfm/mfm.hpp"
#include "mfm/tokenizer.hpp"

namespace {

mfm::Matrix random_matrix(std::size_t rows, std::size_t cols, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  mfm::Matrix m(rows, cols);
  for (auto& v : m.data()) v = normal(rng);
  return m;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const mfm::Matrix a = random_matrix(n, n, 1), b = random_matrix(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(mfm::matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(64)->Arg(128);

// One ω_t pass over the N·K object rows of a video.
void BM_GatForward(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const mfm::GatBlock block = mfm::init_gat(32, 32, 1);
  const mfm::Matrix Y = random_matrix(rows, 32, 3);
  for (auto _ : state) benchmark::DoNotOptimize(mfm::gat_forward(block, Y));
}
BENCHMARK(BM_GatForward)->Arg(8)->Arg(40)->Arg(250);

void BM_MfmStep(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  mfm::MfmModel model = mfm::init_mfm_model(32, 32, 64, mfm::HeadKind::kSigmoid, 1);
  const mfm::Matrix X = random_matrix(rows, 32, 4);
  mfm::TokenTarget target;
  target.counts.assign(64, 0);
  target.topr.assign(64, 0);
  for (std::size_t i = 0; i < 8; ++i) target.topr[i * 8] = 1;
  target.r = 8;
  const mfm::FrameMasks masks = mfm::draw_masks(rows / 8, 8, mfm::MaskingConfig{}, "bench", 1);
  for (auto _ : state) {
    mfm::Tape tape;
    tape.backward(mfm::mfm_video_loss(tape, model, X, 8, masks, target));
    benchmark::DoNotOptimize(tape.grad(model.head.W));
  }
}
BENCHMARK(BM_MfmStep)->Arg(40)->Arg(240);

void BM_Tokenize(benchmark::State& state) {
  const auto L = static_cast<std::size_t>(state.range(0));
  const mfm::Codebook codebook = mfm::generate_codebook(L, 16, 1);
  const std::size_t N = 5, K = 8, Q = 4, D = 16;
  std::mt19937_64 rng(5);
  std::normal_distribution<float> normal;
  std::vector<float> data(N * K * Q * D);
  for (auto& v : data) v = normal(rng);
  const mfm::PatchView view{N, K, Q, D, data};
  for (auto _ : state) benchmark::DoNotOptimize(mfm::tokenize_video(view, codebook, 8));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(N * K * Q));
}
BENCHMARK(BM_Tokenize)->Arg(64)->Arg(512)->Arg(8192);

}  // namespace
BENCHMARK_MAIN();
