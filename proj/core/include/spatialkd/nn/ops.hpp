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

#ifndef SPATIALKD_NN_OPS_HPP_
#define SPATIALKD_NN_OPS_HPP_

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "spatialkd/nn/tensor.hpp"

namespace spatialkd::nn {

// Valid time steps per batch item. An empty span means every frame is valid.
using Lengths = std::span<const std::size_t>;

// ---------------------------------------------------------------------------
// Elementwise. Binary ops require identical shapes.

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);
Tensor abs(const Tensor& a);
Tensor sqrt(const Tensor& a);  // gradient defined as 0 where the value is 0
Tensor square(const Tensor& a);
Tensor clamp_min(const Tensor& a, double floor);
Tensor elu(const Tensor& a);
Tensor softplus(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return div(a, b); }
inline Tensor operator*(const Tensor& a, double s) { return scale(a, s); }
inline Tensor operator*(double s, const Tensor& a) { return scale(a, s); }

// ---------------------------------------------------------------------------
// Reductions

Tensor sum(const Tensor& a);   // -> scalar
Tensor mean(const Tensor& a);  // -> scalar
// [B, ...] -> [B]
Tensor sum_per_item(const Tensor& a);
// [B, C, ...] -> [B, 1, ...]
Tensor sum_channels(const Tensor& a);

// ---------------------------------------------------------------------------
// Layout

Tensor reshape(const Tensor& a, Shape shape);
Tensor concat(std::span<const Tensor> parts, std::size_t axis);
// Output has new_len entries along `axis`; out[j] = in[j - front] where that
// index is in range, zero elsewhere. Pads, crops or shifts in one op.
Tensor pad_crop(const Tensor& x, std::size_t axis, std::ptrdiff_t front,
                std::size_t new_len);
// [B, C, T, F] <-> [B, T, C*F]
Tensor to_sequence(const Tensor& x);
Tensor from_sequence(const Tensor& x, std::size_t channels, std::size_t bins);
// Zeroes frames t >= lengths[b] along axis 2 of a [B, C, T, F] tensor.
Tensor mask_time(const Tensor& x, Lengths lengths);
// Normalizes each (x[b,0,t,f], x[b,1,t,f]) pair to unit length. A zero pair
// maps to (1, 0) with zero gradient.
Tensor unit_normalize_pairs(const Tensor& x);

// ---------------------------------------------------------------------------
// Layers

struct Conv2dOptions {
  std::array<std::size_t, 2> stride{1, 1};
  std::array<std::size_t, 2> padding{0, 0};
};

// x [B, Cin, H, W], weight [Cout, Cin, Kh, Kw], bias [Cout] or empty tensor.
// Output side = floor((in + 2*pad - kernel) / stride) + 1.
Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias,
              const Conv2dOptions& opts = {});

// Transposed convolution, the adjoint of conv2d for the same weight tensor.
// x [B, Cin, H, W], weight [Cin, Cout, Kh, Kw], bias [Cout] or empty.
// Output side = (in - 1) * stride - 2*pad + kernel.
Tensor deconv2d(const Tensor& x, const Tensor& weight, const Tensor& bias,
                const Conv2dOptions& opts = {});

// Affine map over the last axis. x [..., Din], weight [Dout, Din], bias [Dout].
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

struct BatchNormOptions {
  bool use_batch_stats = true;   // false: normalize with running statistics
  bool update_running = true;    // only meaningful with batch statistics
  double momentum = 0.1;
  double eps = 1e-5;
};

// x [B, C, T, F]; gamma, beta [C]. Running buffers are [C] tensors updated
// in place (unbiased variance) when opts.update_running is set. Batch
// statistics only use frames inside `lengths`.
Tensor batch_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  Tensor& running_mean, Tensor& running_var,
                  const BatchNormOptions& opts, Lengths lengths = {});

// Global layer norm: per batch item, mean and variance over all of C, T, F
// (valid frames only), then per-channel affine. x [B, C, T, F].
Tensor global_layer_norm(const Tensor& x, const Tensor& gamma,
                         const Tensor& beta, double eps = 1e-8,
                         Lengths lengths = {});

// LSTM over x [B, T, D]. w_ih [4H, D], w_hh [4H, H], bias [4H], gate order
// (input, forget, cell, output). h0, c0 [B, H]. Returns all hidden states
// [B, T, H].
Tensor lstm(const Tensor& x, const Tensor& w_ih, const Tensor& w_hh,
            const Tensor& bias, const Tensor& h0, const Tensor& c0);

}  // namespace spatialkd::nn

#endif  // SPATIALKD_NN_OPS_HPP_
