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

#ifndef SPATIALKD_NN_LAYERS_HPP_
#define SPATIALKD_NN_LAYERS_HPP_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "spatialkd/nn/ops.hpp"
#include "spatialkd/nn/tensor.hpp"

namespace spatialkd::nn {

// Parameters and buffers are exposed by name; buffers (batch-norm running
// statistics) are checkpointed but never trained or counted.
struct NamedTensor {
  std::string name;
  Tensor tensor;
  bool trainable = true;
};
using ParamList = std::vector<NamedTensor>;

enum class NormMode {
  kTrain,        // batch statistics, running buffers updated
  kEval,         // running statistics
  kFrozenBatch,  // batch statistics, running buffers left untouched
};

// Seeded uniform(-sqrt(1/fan_in), +sqrt(1/fan_in)) initializer.
class Initializer {
 public:
  explicit Initializer(std::uint64_t seed) : rng_(seed) {}
  Tensor uniform(Shape shape, std::size_t fan_in);
  std::mt19937_64& rng() noexcept { return rng_; }

 private:
  std::mt19937_64 rng_;
};

class Conv2dLayer {
 public:
  Conv2dLayer() = default;
  Conv2dLayer(std::size_t in, std::size_t out, std::size_t kh, std::size_t kw,
              Conv2dOptions opts, Initializer& init);
  Tensor operator()(const Tensor& x) const {
    return conv2d(x, weight, bias, opts);
  }
  void collect(const std::string& prefix, ParamList& out) const;

  Tensor weight, bias;
  Conv2dOptions opts;
};

class Deconv2dLayer {
 public:
  Deconv2dLayer() = default;
  Deconv2dLayer(std::size_t in, std::size_t out, std::size_t kh, std::size_t kw,
                Conv2dOptions opts, Initializer& init);
  Tensor operator()(const Tensor& x) const {
    return deconv2d(x, weight, bias, opts);
  }
  void collect(const std::string& prefix, ParamList& out) const;

  Tensor weight, bias;
  Conv2dOptions opts;
};

class BatchNorm2dLayer {
 public:
  BatchNorm2dLayer() = default;
  explicit BatchNorm2dLayer(std::size_t channels);
  Tensor operator()(const Tensor& x, NormMode mode, Lengths lengths = {});
  void collect(const std::string& prefix, ParamList& out) const;

  Tensor gamma, beta, running_mean, running_var;
  double momentum = 0.1;
  double eps = 1e-5;
};

class GlobalLayerNormLayer {
 public:
  GlobalLayerNormLayer() = default;
  explicit GlobalLayerNormLayer(std::size_t channels);
  Tensor operator()(const Tensor& x, Lengths lengths = {}) const {
    return global_layer_norm(x, gamma, beta, eps, lengths);
  }
  void collect(const std::string& prefix, ParamList& out) const;

  Tensor gamma, beta;
  double eps = 1e-8;
};

class LinearLayer {
 public:
  LinearLayer() = default;
  LinearLayer(std::size_t in, std::size_t out, Initializer& init);
  Tensor operator()(const Tensor& x) const { return linear(x, weight, bias); }
  void collect(const std::string& prefix, ParamList& out) const;

  Tensor weight, bias;
};

// Single-layer LSTM with zero initial state; forget-gate bias starts at 1.
class LstmLayer {
 public:
  LstmLayer() = default;
  LstmLayer(std::size_t input, std::size_t hidden, Initializer& init);
  Tensor operator()(const Tensor& x) const;
  void collect(const std::string& prefix, ParamList& out) const;

  Tensor w_ih, w_hh, bias;
};

// Copies values from `source` into `target` by name. Throws DataError on a
// missing name or shape mismatch, naming the tensor.
void load_state(const ParamList& target, const ParamList& source);

// Number of trainable scalars.
std::size_t count_trainable(const ParamList& params);

}  // namespace spatialkd::nn

#endif  // SPATIALKD_NN_LAYERS_HPP_
