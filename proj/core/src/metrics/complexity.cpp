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

#include "spatialkd/metrics/complexity.hpp"

#include <cmath>

namespace spatialkd::metrics {

using model::kEncoderStages;

std::size_t count_params(const nn::ParamList& params, const std::set<std::string>& frozen) {
  std::size_t n = 0;
  for (const auto& p : params)
    if (p.trainable && !frozen.contains(p.name)) n += p.tensor.numel();
  return n;
}

std::size_t count_params(const model::Network& net, const std::set<std::string>& frozen) {
  return count_params(net.state(), frozen);
}

std::uint64_t count_macs(const model::ModelConfig& cfg, model::ModelRole role,
                         std::size_t frames) {
  cfg.validate();
  using u64 = std::uint64_t;
  const u64 t = frames;
  const u64 kt = cfg.kernel_time, kf = cfg.kernel_freq;
  const auto& ch = cfg.encoder_channels;
  const auto bins = cfg.stage_bins();
  u64 macs = 0;

  u64 in = 1;
  for (std::size_t i = 0; i < kEncoderStages; ++i) {
    macs += 2 * in * ch[i] * kt * kf * t * bins[i];  // left and right encoders
    in = ch[i];
  }
  const u64 h = cfg.lstm_hidden();
  macs += static_cast<u64>(cfg.lstm_layers) * t * 4 * h * (h + h);
  for (std::size_t k = kEncoderStages; k-- > 0;) {
    const u64 prev = k == kEncoderStages - 1 ? 2 * ch[k] : ch[k];
    const u64 out = k == 0 ? 1 : ch[k - 1];
    macs += (prev + ch[k]) * out * kt * kf * t * bins[k];
  }
  if (role == model::ModelRole::kTeacher) return macs;

  const u64 f = cfg.freq_bins;
  const u64 c = cfg.phase_channels;
  macs += 1 * (c / 2) * t * f;  // magnitude projection
  macs += 2 * (c / 2) * t * f;  // phase projection
  const u64 ka = cfg.phase_kernel_a[0] * cfg.phase_kernel_a[1];
  const u64 kb = cfg.phase_kernel_b[0] * cfg.phase_kernel_b[1];
  macs += static_cast<u64>(cfg.phase_blocks) * c * c * (ka + kb) * t * f;
  macs += c * 2 * t * f;  // residual projection
  return macs;
}

std::uint64_t macs_per_second(const model::ModelConfig& cfg, model::ModelRole role,
                              const audio::StftConfig& stft, double sample_rate) {
  const auto n = static_cast<std::size_t>(std::lround(sample_rate));
  return count_macs(cfg, role, stft.frames_for(n));
}

}  // namespace spatialkd::metrics
