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

#ifndef SPATIALKD_MODEL_MAGNITUDE_NET_HPP_
#define SPATIALKD_MODEL_MAGNITUDE_NET_HPP_

#include <string>
#include <vector>

#include "spatialkd/model/model_config.hpp"
#include "spatialkd/nn/layers.hpp"

namespace spatialkd::model {

// Per-stage encoder outputs of the left and right encoders, [B, C_i, T, F_i].
struct EncoderTaps {
  std::vector<nn::Tensor> left;
  std::vector<nn::Tensor> right;
};

// Throws ShapeError naming the first stage whose shapes differ.
void check_tap_shapes(const EncoderTaps& a, const EncoderTaps& b);

struct MagnitudeOutput {
  nn::Tensor magnitude;  // [B, 1, T, F], non-negative
  EncoderTaps taps;
};

// Dual-encoder convolutional recurrent network:
//
//   left  -> 5 x (causal conv, BN, ELU) --+
//                                         +-> concat -> LSTM x N -> decoder
//   right -> 5 x (causal conv, BN, ELU) --+
//
// The decoder mirrors one encoder with transposed convolutions. Stage i of
// the decoder receives the previous decoder output concatenated with the sum
// of the left and right stage-i encoder outputs. The last stage has no
// normalization and ends in softplus.
class MagnitudeNet {
 public:
  MagnitudeNet() = default;
  MagnitudeNet(const ModelConfig& cfg, nn::Initializer& init);

  // left, right: [B, 1, T, F] magnitudes.
  MagnitudeOutput forward(const nn::Tensor& left, const nn::Tensor& right,
                          nn::NormMode mode, nn::Lengths lengths = {});

  void collect(const std::string& prefix, nn::ParamList& out) const;

 private:
  struct EncoderStage {
    nn::Conv2dLayer conv;
    nn::BatchNorm2dLayer norm;
  };
  struct DecoderStage {
    nn::Deconv2dLayer deconv;
    nn::BatchNorm2dLayer norm;  // unused on the output stage
  };

  nn::Tensor encode(std::vector<EncoderStage>& stages, nn::Tensor x,
                    nn::NormMode mode, nn::Lengths lengths,
                    std::vector<nn::Tensor>& taps);

  ModelConfig cfg_;
  std::vector<EncoderStage> left_;
  std::vector<EncoderStage> right_;
  std::vector<nn::LstmLayer> lstm_;
  std::vector<DecoderStage> decoder_;  // decoder_[i] undoes encoder stage i
};

}  // namespace spatialkd::model

#endif  // SPATIALKD_MODEL_MAGNITUDE_NET_HPP_
