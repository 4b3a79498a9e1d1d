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

#ifndef SPATIALKD_METRICS_COMPLEXITY_HPP_
#define SPATIALKD_METRICS_COMPLEXITY_HPP_

#include <cstdint>
#include <set>
#include <string>

#include "spatialkd/audio/stft.hpp"
#include "spatialkd/model/networks.hpp"
#include "spatialkd/nn/layers.hpp"

namespace spatialkd::metrics {

// Trainable element count, skipping tensors named in `frozen`.
std::size_t count_params(const nn::ParamList& params,
                         const std::set<std::string>& frozen = {});
std::size_t count_params(const model::Network& net,
                         const std::set<std::string>& frozen = {});

// Multiply-accumulates of one forward pass over `frames` frames (batch 1):
// conv Cin*Cout*Kh*Kw*Hout*Wout, deconv Cin*Cout*Kh*Kw*Hin*Win,
// lstm 4*(D+H)*H per step and layer, linear Din*Dout per row. Normalization,
// activations and element-wise ops are not counted. The teacher runs the
// magnitude network only.
std::uint64_t count_macs(const model::ModelConfig& cfg, model::ModelRole role,
                         std::size_t frames);

// count_macs for the frames produced by one second of audio.
std::uint64_t macs_per_second(const model::ModelConfig& cfg, model::ModelRole role,
                              const audio::StftConfig& stft, double sample_rate);

}  // namespace spatialkd::metrics

#endif  // SPATIALKD_METRICS_COMPLEXITY_HPP_
