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

#include "spatialkd/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <fmt/format.h>

#include "spatialkd/error.hpp"

namespace spatialkd::nn {

Tensor Initializer::uniform(Shape shape, std::size_t fan_in) {
  const double bound = std::sqrt(1.0 / static_cast<double>(std::max<std::size_t>(fan_in, 1)));
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> v(numel(shape));
  for (auto& x : v) x = dist(rng_);
  return Tensor(std::move(shape), std::move(v), true);
}

Conv2dLayer::Conv2dLayer(std::size_t in, std::size_t out, std::size_t kh,
                         std::size_t kw, Conv2dOptions o, Initializer& init)
    : opts(o) {
  weight = init.uniform({out, in, kh, kw}, in * kh * kw);
  bias = init.uniform({out}, in * kh * kw);
}

void Conv2dLayer::collect(const std::string& prefix, ParamList& out) const {
  out.push_back({prefix + ".weight", weight, true});
  out.push_back({prefix + ".bias", bias, true});
}

Deconv2dLayer::Deconv2dLayer(std::size_t in, std::size_t out, std::size_t kh,
                             std::size_t kw, Conv2dOptions o, Initializer& init)
    : opts(o) {
  weight = init.uniform({in, out, kh, kw}, out * kh * kw);
  bias = init.uniform({out}, out * kh * kw);
}

void Deconv2dLayer::collect(const std::string& prefix, ParamList& out) const {
  out.push_back({prefix + ".weight", weight, true});
  out.push_back({prefix + ".bias", bias, true});
}

BatchNorm2dLayer::BatchNorm2dLayer(std::size_t channels)
    : gamma(Tensor::full({channels}, 1.0, true)),
      beta(Tensor::zeros({channels}, true)),
      running_mean(Tensor::zeros({channels})),
      running_var(Tensor::full({channels}, 1.0)) {}

Tensor BatchNorm2dLayer::operator()(const Tensor& x, NormMode mode,
                                    Lengths lengths) {
  BatchNormOptions o;
  o.use_batch_stats = mode != NormMode::kEval;
  o.update_running = mode == NormMode::kTrain;
  o.momentum = momentum;
  o.eps = eps;
  return batch_norm(x, gamma, beta, running_mean, running_var, o, lengths);
}

void BatchNorm2dLayer::collect(const std::string& prefix, ParamList& out) const {
  out.push_back({prefix + ".gamma", gamma, true});
  out.push_back({prefix + ".beta", beta, true});
  out.push_back({prefix + ".running_mean", running_mean, false});
  out.push_back({prefix + ".running_var", running_var, false});
}

GlobalLayerNormLayer::GlobalLayerNormLayer(std::size_t channels)
    : gamma(Tensor::full({channels}, 1.0, true)),
      beta(Tensor::zeros({channels}, true)) {}

void GlobalLayerNormLayer::collect(const std::string& prefix,
                                   ParamList& out) const {
  out.push_back({prefix + ".gamma", gamma, true});
  out.push_back({prefix + ".beta", beta, true});
}

LinearLayer::LinearLayer(std::size_t in, std::size_t out, Initializer& init) {
  weight = init.uniform({out, in}, in);
  bias = init.uniform({out}, in);
}

void LinearLayer::collect(const std::string& prefix, ParamList& out) const {
  out.push_back({prefix + ".weight", weight, true});
  out.push_back({prefix + ".bias", bias, true});
}

LstmLayer::LstmLayer(std::size_t input, std::size_t hidden, Initializer& init) {
  w_ih = init.uniform({4 * hidden, input}, hidden);
  w_hh = init.uniform({4 * hidden, hidden}, hidden);
  bias = init.uniform({4 * hidden}, hidden);
  auto b = bias.mutable_data();
  std::fill(b.begin() + hidden, b.begin() + 2 * hidden, 1.0);
}

Tensor LstmLayer::operator()(const Tensor& x) const {
  const std::size_t hidden = w_hh.dim(1);
  const Tensor zero = Tensor::zeros({x.dim(0), hidden});
  return lstm(x, w_ih, w_hh, bias, zero, zero);
}

void LstmLayer::collect(const std::string& prefix, ParamList& out) const {
  out.push_back({prefix + ".w_ih", w_ih, true});
  out.push_back({prefix + ".w_hh", w_hh, true});
  out.push_back({prefix + ".bias", bias, true});
}

void load_state(const ParamList& target, const ParamList& source) {
  std::unordered_map<std::string, const Tensor*> by_name;
  for (const auto& s : source) by_name[s.name] = &s.tensor;
  for (const auto& t : target) {
    auto it = by_name.find(t.name);
    if (it == by_name.end())
      throw DataError(fmt::format("checkpoint is missing tensor '{}'", t.name));
    if (it->second->shape() != t.tensor.shape())
      throw ShapeError(fmt::format("tensor '{}': checkpoint shape {} != model shape {}",
                                   t.name, shape_string(it->second->shape()),
                                   shape_string(t.tensor.shape())));
    Tensor dst = t.tensor;
    std::copy(it->second->data().begin(), it->second->data().end(),
              dst.mutable_data().begin());
  }
}

std::size_t count_trainable(const ParamList& params) {
  std::size_t n = 0;
  for (const auto& p : params)
    if (p.trainable) n += p.tensor.numel();
  return n;
}

}  // namespace spatialkd::nn
