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

#ifndef SPATIALKD_MODEL_PHASE_NET_HPP_
#define SPATIALKD_MODEL_PHASE_NET_HPP_

#include <string>
#include <vector>

#include "spatialkd/model/model_config.hpp"
#include "spatialkd/nn/layers.hpp"

namespace spatialkd::model {

// Phase refinement from (estimated magnitude, noisy phase).
//
// Both inputs are projected over channels (1x1 convolutions) to
// phase_channels/2 each and concatenated. Residual blocks then apply
// conv(5x3) -> ELU -> conv(25x1) with an identity skip. The block output is
// globally layer-normalized and projected to a 2-channel residual that is
// added to the noisy phase; each (cos, sin) pair is finally renormalized to
// unit length.
class PhaseNet {
 public:
  PhaseNet() = default;
  PhaseNet(const ModelConfig& cfg, nn::Initializer& init);

  // magnitude [B, 1, T, F], noisy_phase [B, 2, T, F] -> [B, 2, T, F].
  nn::Tensor forward(const nn::Tensor& magnitude, const nn::Tensor& noisy_phase,
                     nn::Lengths lengths = {}) const;

  void collect(const std::string& prefix, nn::ParamList& out) const;

  // Final 2-channel projection; zeroing it makes the module an identity on
  // the noisy phase.
  nn::Conv2dLayer& residual_projection() noexcept { return residual_proj_; }

 private:
  struct Block {
    nn::Conv2dLayer first;
    nn::Conv2dLayer second;
  };

  ModelConfig cfg_;
  nn::Conv2dLayer mag_proj_;
  nn::Conv2dLayer phase_proj_;
  std::vector<Block> blocks_;
  nn::GlobalLayerNormLayer norm_;
  nn::Conv2dLayer residual_proj_;
};

}  // namespace spatialkd::model

#endif  // SPATIALKD_MODEL_PHASE_NET_HPP_
