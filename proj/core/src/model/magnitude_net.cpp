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

#include "spatialkd/model/magnitude_net.hpp"

#include <fmt/format.h>

#include "spatialkd/error.hpp"

namespace spatialkd::model {

using nn::Tensor;

void check_tap_shapes(const EncoderTaps& a, const EncoderTaps& b) {
  if (a.left.size() != b.left.size() || a.right.size() != b.right.size() ||
      a.left.size() != a.right.size())
    throw ShapeError(fmt::format("encoder taps: stage counts differ ({}/{} vs {}/{})",
                                 a.left.size(), a.right.size(), b.left.size(),
                                 b.right.size()));
  auto check = [](const Tensor& x, const Tensor& y, std::size_t stage) {
    if (x.shape() != y.shape())
      throw ShapeError(fmt::format("encoder taps: stage {} shape mismatch ({} vs {})",
                                   stage, nn::shape_string(x.shape()),
                                   nn::shape_string(y.shape())));
  };
  for (std::size_t i = 0; i < a.left.size(); ++i) {
    check(a.left[i], b.left[i], i + 1);
    check(a.right[i], b.right[i], i + 1);
    check(a.left[i], a.right[i], i + 1);
  }
}

MagnitudeNet::MagnitudeNet(const ModelConfig& cfg, nn::Initializer& init)
    : cfg_(cfg) {
  cfg_.validate();
  const auto& ch = cfg_.encoder_channels;
  const nn::Conv2dOptions enc_opts{{1, cfg_.stride_freq}, {0, 0}};
  for (auto* side : {&left_, &right_}) {
    std::size_t in = 1;
    for (std::size_t i = 0; i < kEncoderStages; ++i) {
      side->push_back({nn::Conv2dLayer(in, ch[i], cfg_.kernel_time,
                                       cfg_.kernel_freq, enc_opts, init),
                       nn::BatchNorm2dLayer(ch[i])});
      in = ch[i];
    }
  }
  const std::size_t hidden = cfg_.lstm_hidden();
  for (std::size_t l = 0; l < cfg_.lstm_layers; ++l)
    lstm_.emplace_back(hidden, hidden, init);

  // The bottleneck enters the decoder as 2*C5 channels (left and right
  // halves of the LSTM output) plus the C5-channel skip.
  decoder_.resize(kEncoderStages);
  for (std::size_t k = kEncoderStages; k-- > 0;) {
    const std::size_t prev = k == kEncoderStages - 1 ? 2 * ch[k] : ch[k];
    const std::size_t in = prev + ch[k];
    const std::size_t out = k == 0 ? 1 : ch[k - 1];
    decoder_[k] = {nn::Deconv2dLayer(in, out, cfg_.kernel_time, cfg_.kernel_freq,
                                     enc_opts, init),
                   nn::BatchNorm2dLayer(out)};
  }
}

Tensor MagnitudeNet::encode(std::vector<EncoderStage>& stages, Tensor x,
                            nn::NormMode mode, nn::Lengths lengths,
                            std::vector<Tensor>& taps) {
  const std::size_t frames = x.dim(2);
  for (auto& stage : stages) {
    // Causal in time: pad kernel_time-1 frames in front.
    x = nn::pad_crop(x, 2, static_cast<std::ptrdiff_t>(cfg_.kernel_time - 1),
                     frames + cfg_.kernel_time - 1);
    x = nn::elu(stage.norm(stage.conv(x), mode, lengths));
    taps.push_back(x);
  }
  return x;
}

MagnitudeOutput MagnitudeNet::forward(const Tensor& left, const Tensor& right,
                                      nn::NormMode mode, nn::Lengths lengths) {
  for (const Tensor* t : {&left, &right}) {
    if (t->rank() != 4 || t->dim(1) != 1 || t->dim(3) != cfg_.freq_bins)
      throw ShapeError(fmt::format(
          "magnitude net: expected [B, 1, T, {}] input, got {}", cfg_.freq_bins,
          nn::shape_string(t->shape())));
  }
  if (left.shape() != right.shape())
    throw ShapeError(fmt::format("magnitude net: left {} and right {} differ",
                                 nn::shape_string(left.shape()),
                                 nn::shape_string(right.shape())));
  const std::size_t frames = left.dim(2);
  MagnitudeOutput out;
  Tensor l = encode(left_, left, mode, lengths, out.taps.left);
  Tensor r = encode(right_, right, mode, lengths, out.taps.right);

  const std::size_t c5 = cfg_.encoder_channels.back();
  const std::size_t f5 = cfg_.stage_bins().back();
  const Tensor halves[] = {l, r};
  Tensor seq = nn::to_sequence(nn::concat(halves, 1));
  for (auto& layer : lstm_) seq = layer(seq);
  Tensor d = nn::from_sequence(seq, 2 * c5, f5);

  const auto bins = cfg_.stage_bins();
  for (std::size_t k = kEncoderStages; k-- > 0;) {
    const Tensor parts[] = {d, out.taps.left[k] + out.taps.right[k]};
    d = decoder_[k].deconv(nn::concat(parts, 1));
    // Drop the trailing kernel_time-1 frames (causal) and pad frequency up
    // to the matching encoder input size.
    d = nn::pad_crop(d, 2, 0, frames);
    const std::size_t target = k == 0 ? cfg_.freq_bins : bins[k - 1];
    d = nn::pad_crop(d, 3, 0, target);
    if (k > 0) {
      d = nn::elu(decoder_[k].norm(d, mode, lengths));
    } else {
      d = nn::softplus(d);
    }
  }
  out.magnitude = d;
  return out;
}

void MagnitudeNet::collect(const std::string& prefix, nn::ParamList& out) const {
  for (std::size_t i = 0; i < left_.size(); ++i) {
    left_[i].conv.collect(fmt::format("{}.enc_left.{}.conv", prefix, i), out);
    left_[i].norm.collect(fmt::format("{}.enc_left.{}.bn", prefix, i), out);
  }
  for (std::size_t i = 0; i < right_.size(); ++i) {
    right_[i].conv.collect(fmt::format("{}.enc_right.{}.conv", prefix, i), out);
    right_[i].norm.collect(fmt::format("{}.enc_right.{}.bn", prefix, i), out);
  }
  for (std::size_t l = 0; l < lstm_.size(); ++l)
    lstm_[l].collect(fmt::format("{}.lstm.{}", prefix, l), out);
  for (std::size_t k = 0; k < decoder_.size(); ++k) {
    decoder_[k].deconv.collect(fmt::format("{}.dec.{}.deconv", prefix, k), out);
    if (k > 0) decoder_[k].norm.collect(fmt::format("{}.dec.{}.bn", prefix, k), out);
  }
}

}  // namespace spatialkd::model
