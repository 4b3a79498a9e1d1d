// Copyright 2026 The spatialkd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <random>

#include <benchmark/benchmark.h>

#include "spatialkd/audio/stft.hpp"
#include "spatialkd/model/networks.hpp"
#include "spatialkd/nn/ops.hpp"

namespace {

using namespace spatialkd;

audio::Waveform noise(std::size_t n) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 0.1);
  audio::Waveform w;
  w.samples.resize(n);
  for (auto& v : w.samples) v = g(rng);
  return w;
}

nn::Tensor uniform(nn::Shape shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(nn::numel(shape));
  for (auto& x : v) x = u(rng);
  return nn::Tensor(std::move(shape), std::move(v));
}

void BM_Stft(benchmark::State& state) {
  const audio::StftConfig cfg;
  const audio::Waveform w = noise(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(audio::stft(w, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Stft)->Arg(16000)->Arg(64000);

void BM_StftRoundTrip(benchmark::State& state) {
  const audio::StftConfig cfg;
  const audio::Waveform w = noise(16000);
  for (auto _ : state) benchmark::DoNotOptimize(audio::istft(audio::stft(w, cfg)));
}
BENCHMARK(BM_StftRoundTrip);

void BM_Conv2dForward(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  const nn::Tensor x = uniform({4, c, 100, 40}, 1);
  const nn::Tensor w = uniform({2 * c, c, 2, 3}, 2);
  const nn::Tensor b = uniform({2 * c}, 3);
  nn::NoGradGuard no_grad;
  for (auto _ : state) benchmark::DoNotOptimize(nn::conv2d(x, w, b, {{1, 2}, {0, 0}}));
}
BENCHMARK(BM_Conv2dForward)->Arg(8)->Arg(32);

void BM_Conv2dBackward(benchmark::State& state) {
  const nn::Tensor x = uniform({4, 16, 100, 40}, 1);
  nn::Tensor w = uniform({32, 16, 2, 3}, 2);
  nn::Tensor b = uniform({32}, 3);
  w.set_requires_grad(true);
  b.set_requires_grad(true);
  for (auto _ : state) {
    nn::backward(nn::sum(nn::conv2d(x, w, b, {{1, 2}, {0, 0}})));
    w.zero_grad();
    b.zero_grad();
  }
}
BENCHMARK(BM_Conv2dBackward);

void BM_StudentForward(benchmark::State& state) {
  const audio::StftConfig stft;
  const model::ModelConfig cfg = model::make_preset(
      state.range(0) == 0 ? "tiny" : "small", stft.bins());
  model::Network net(model::ModelRole::kStudent, cfg, stft, 1);
  const audio::Waveform w = noise(16000);
  for (auto _ : state) benchmark::DoNotOptimize(model::enhance_waveform(net, w));
}
BENCHMARK(BM_StudentForward)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
