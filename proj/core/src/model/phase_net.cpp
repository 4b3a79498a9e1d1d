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

#include "spatialkd/model/phase_net.hpp"

#include <fmt/format.h>

#include "spatialkd/error.hpp"

namespace spatialkd::model {

using nn::Tensor;

PhaseNet::PhaseNet(const ModelConfig& cfg, nn::Initializer& init) : cfg_(cfg) {
  cfg_.validate();
  const std::size_t c = cfg_.phase_channels;
  const nn::Conv2dOptions pointwise{};
  mag_proj_ = nn::Conv2dLayer(1, c / 2, 1, 1, pointwise, init);
  phase_proj_ = nn::Conv2dLayer(2, c / 2, 1, 1, pointwise, init);
  const auto& ka = cfg_.phase_kernel_a;
  const auto& kb = cfg_.phase_kernel_b;
  for (std::size_t i = 0; i < cfg_.phase_blocks; ++i) {
    blocks_.push_back(
        {nn::Conv2dLayer(c, c, ka[0], ka[1], {{1, 1}, {ka[0] / 2, ka[1] / 2}}, init),
         nn::Conv2dLayer(c, c, kb[0], kb[1], {{1, 1}, {kb[0] / 2, kb[1] / 2}}, init)});
  }
  norm_ = nn::GlobalLayerNormLayer(c);
  residual_proj_ = nn::Conv2dLayer(c, 2, 1, 1, pointwise, init);
}

Tensor PhaseNet::forward(const Tensor& magnitude, const Tensor& noisy_phase,
                         nn::Lengths lengths) const {
  if (magnitude.rank() != 4 || magnitude.dim(1) != 1 || noisy_phase.rank() != 4 ||
      noisy_phase.dim(1) != 2 || magnitude.dim(0) != noisy_phase.dim(0) ||
      magnitude.dim(2) != noisy_phase.dim(2) || magnitude.dim(3) != noisy_phase.dim(3))
    throw ShapeError(fmt::format(
        "phase net: magnitude {} and phase {} are not [B,1,T,F] / [B,2,T,F]",
        nn::shape_string(magnitude.shape()), nn::shape_string(noisy_phase.shape())));
  const Tensor parts[] = {mag_proj_(magnitude), phase_proj_(noisy_phase)};
  Tensor h = nn::concat(parts, 1);
  // Padded frames are zeroed before every convolution that looks ahead in
  // time, so they never leak into valid frames.
  for (const auto& block : blocks_) {
    Tensor r = nn::elu(block.first(nn::mask_time(h, lengths)));
    r = block.second(nn::mask_time(r, lengths));
    h = nn::elu(h + r);
  }
  Tensor residual = residual_proj_(norm_(h, lengths));
  return nn::unit_normalize_pairs(noisy_phase + residual);
}

void PhaseNet::collect(const std::string& prefix, nn::ParamList& out) const {
  mag_proj_.collect(prefix + ".mag_proj", out);
  phase_proj_.collect(prefix + ".phase_proj", out);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    blocks_[i].first.collect(fmt::format("{}.block.{}.conv_a", prefix, i), out);
    blocks_[i].second.collect(fmt::format("{}.block.{}.conv_b", prefix, i), out);
  }
  norm_.collect(prefix + ".gln", out);
  residual_proj_.collect(prefix + ".residual_proj", out);
}

}  // namespace spatialkd::model
