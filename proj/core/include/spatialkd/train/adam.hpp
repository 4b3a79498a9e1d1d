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

#ifndef SPATIALKD_TRAIN_ADAM_HPP_
#define SPATIALKD_TRAIN_ADAM_HPP_

#include <cstdint>
#include <vector>

#include "spatialkd/nn/layers.hpp"

namespace spatialkd::train {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction over a fixed set of named parameters. Gradients
// are read from each tensor's grad buffer; a parameter without one counts as
// a zero gradient.
class Adam {
 public:
  Adam(nn::ParamList params, AdamOptions opts = {});

  // Checks every gradient first and throws NumericError naming the first
  // non-finite parameter, leaving parameters and state untouched.
  void step();
  void zero_grad();

  std::uint64_t steps() const noexcept { return step_; }
  const AdamOptions& options() const noexcept { return opts_; }
  const nn::ParamList& params() const noexcept { return params_; }
  const std::vector<double>& first_moment(std::size_t i) const { return m_.at(i); }
  const std::vector<double>& second_moment(std::size_t i) const { return v_.at(i); }

 private:
  nn::ParamList params_;
  AdamOptions opts_;
  std::vector<std::vector<double>> m_, v_;
  std::uint64_t step_ = 0;
};

}  // namespace spatialkd::train

#endif  // SPATIALKD_TRAIN_ADAM_HPP_
