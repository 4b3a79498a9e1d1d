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

#include "spatialkd/train/adam.hpp"

#include <cmath>

#include <fmt/format.h>

#include "spatialkd/error.hpp"

namespace spatialkd::train {

Adam::Adam(nn::ParamList params, AdamOptions opts)
    : params_(std::move(params)), opts_(opts) {
  if (!(opts_.learning_rate > 0.0) || !std::isfinite(opts_.learning_rate))
    throw UsageError(fmt::format("adam: learning rate must be > 0, got {}",
                                 opts_.learning_rate));
  if (!(opts_.beta1 >= 0.0 && opts_.beta1 < 1.0) ||
      !(opts_.beta2 >= 0.0 && opts_.beta2 < 1.0) || !(opts_.eps > 0.0))
    throw UsageError("adam: need 0 <= beta1, beta2 < 1 and eps > 0");
  for (const auto& p : params_) {
    m_.emplace_back(p.tensor.numel(), 0.0);
    v_.emplace_back(p.tensor.numel(), 0.0);
  }
}

void Adam::step() {
  for (const auto& p : params_) {
    if (!p.tensor.has_grad()) continue;
    const auto g = p.tensor.grad();
    for (std::size_t i = 0; i < g.size(); ++i)
      if (!std::isfinite(g[i]))
        throw NumericError(fmt::format(
            "adam: non-finite gradient {} in parameter '{}' at element {}", g[i],
            p.name, i));
  }
  ++step_;
  const double b1 = opts_.beta1, b2 = opts_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    nn::Tensor t = params_[k].tensor;
    const bool has = t.has_grad();
    const auto g = t.grad();
    auto w = t.mutable_data();
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = has ? g[i] : 0.0;
      m[i] = b1 * m[i] + (1.0 - b1) * gi;
      v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      w[i] -= opts_.learning_rate * mhat / (std::sqrt(vhat) + opts_.eps);
    }
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) {
    nn::Tensor t = p.tensor;
    t.zero_grad();
  }
}

}  // namespace spatialkd::train
