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

#include <cmath>

#include <fmt/format.h>

#include "spatialkd/error.hpp"
#include "spatialkd/nn/ops.hpp"

namespace spatialkd::nn {
namespace {

using ImplPtr = std::shared_ptr<TensorImpl>;

struct Dims {
  std::size_t B, C, T, F;
  std::size_t index(std::size_t b, std::size_t c, std::size_t t,
                    std::size_t f) const {
    return ((b * C + c) * T + t) * F + f;
  }
};

Dims dims_of(const Tensor& x, const char* op) {
  if (x.rank() != 4)
    throw ShapeError(fmt::format("{}: expected [B, C, T, F], got {}", op,
                                 shape_string(x.shape())));
  return {x.dim(0), x.dim(1), x.dim(2), x.dim(3)};
}

std::vector<std::size_t> resolve_lengths(const Dims& d, Lengths lengths,
                                         const char* op) {
  if (lengths.empty()) return std::vector<std::size_t>(d.B, d.T);
  if (lengths.size() != d.B)
    throw ShapeError(fmt::format("{}: {} lengths for batch of {}", op,
                                 lengths.size(), d.B));
  for (auto len : lengths) {
    if (len > d.T)
      throw ShapeError(fmt::format("{}: length {} exceeds {} frames", op, len, d.T));
  }
  return {lengths.begin(), lengths.end()};
}

void check_affine(const Tensor& p, std::size_t c, const char* op,
                  const char* name) {
  if (p.rank() != 1 || p.dim(0) != c)
    throw ShapeError(fmt::format("{}: {} shape {} does not match {} channels", op,
                                 name, shape_string(p.shape()), c));
}

}  // namespace

Tensor batch_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  Tensor& running_mean, Tensor& running_var,
                  const BatchNormOptions& opts, Lengths lengths) {
  const Dims d = dims_of(x, "batch_norm");
  check_affine(gamma, d.C, "batch_norm", "gamma");
  check_affine(beta, d.C, "batch_norm", "beta");
  check_affine(running_mean, d.C, "batch_norm", "running_mean");
  check_affine(running_var, d.C, "batch_norm", "running_var");
  const auto lens = resolve_lengths(d, lengths, "batch_norm");
  std::size_t frames = 0;
  for (auto len : lens) frames += len;
  const std::size_t count = frames * d.F;
  if (opts.use_batch_stats && count == 0)
    throw ShapeError("batch_norm: zero-size batch");

  std::vector<double> mu(d.C), inv(d.C);
  if (opts.use_batch_stats) {
    for (std::size_t c = 0; c < d.C; ++c) {
      double s = 0.0;
      for (std::size_t b = 0; b < d.B; ++b)
        for (std::size_t t = 0; t < lens[b]; ++t)
          for (std::size_t f = 0; f < d.F; ++f) s += x[d.index(b, c, t, f)];
      const double m = s / static_cast<double>(count);
      double v = 0.0;
      for (std::size_t b = 0; b < d.B; ++b)
        for (std::size_t t = 0; t < lens[b]; ++t)
          for (std::size_t f = 0; f < d.F; ++f) {
            const double e = x[d.index(b, c, t, f)] - m;
            v += e * e;
          }
      v /= static_cast<double>(count);
      mu[c] = m;
      inv[c] = 1.0 / std::sqrt(v + opts.eps);
      if (opts.update_running) {
        auto rm = running_mean.mutable_data();
        auto rv = running_var.mutable_data();
        const double unbiased =
            count > 1 ? v * static_cast<double>(count) / static_cast<double>(count - 1)
                      : v;
        rm[c] = (1.0 - opts.momentum) * rm[c] + opts.momentum * m;
        rv[c] = (1.0 - opts.momentum) * rv[c] + opts.momentum * unbiased;
      }
    }
  } else {
    for (std::size_t c = 0; c < d.C; ++c) {
      mu[c] = running_mean[c];
      inv[c] = 1.0 / std::sqrt(running_var[c] + opts.eps);
    }
  }

  std::vector<double> xhat(x.numel()), out(x.numel());
  for (std::size_t b = 0; b < d.B; ++b)
    for (std::size_t c = 0; c < d.C; ++c)
      for (std::size_t t = 0; t < d.T; ++t)
        for (std::size_t f = 0; f < d.F; ++f) {
          const std::size_t i = d.index(b, c, t, f);
          xhat[i] = (x[i] - mu[c]) * inv[c];
          out[i] = gamma[c] * xhat[i] + beta[c];
        }

  ImplPtr px = x.impl(), pg = gamma.impl(), pb = beta.impl();
  const bool batch_stats = opts.use_batch_stats;
  return make_result(
      x.shape(), std::move(out), {px, pg, pb}, "batch_norm",
      [px, pg, pb, d, lens, count, inv, batch_stats,
       xhat = std::move(xhat)](TensorImpl& self) {
        const auto& gy = self.grad;
        if (pg->requires_grad) {
          auto& gg = pg->ensure_grad();
          for (std::size_t i = 0; i < gy.size(); ++i)
            gg[(i / (d.T * d.F)) % d.C] += gy[i] * xhat[i];
        }
        if (pb->requires_grad) {
          auto& gb = pb->ensure_grad();
          for (std::size_t i = 0; i < gy.size(); ++i)
            gb[(i / (d.T * d.F)) % d.C] += gy[i];
        }
        if (!px->requires_grad) return;
        auto& gx = px->ensure_grad();
        const auto& gamma_v = pg->data;
        for (std::size_t c = 0; c < d.C; ++c) {
          // Over every position: sum of g and g * xhat, with g = dy * gamma.
          double sum_g = 0.0, sum_gx = 0.0;
          for (std::size_t b = 0; b < d.B; ++b)
            for (std::size_t t = 0; t < d.T; ++t)
              for (std::size_t f = 0; f < d.F; ++f) {
                const std::size_t i = d.index(b, c, t, f);
                const double g = gy[i] * gamma_v[c];
                gx[i] += g * inv[c];
                sum_g += g;
                sum_gx += g * xhat[i];
              }
          if (!batch_stats) continue;
          const double n = static_cast<double>(count);
          const double k_mean = -inv[c] * sum_g / n;
          const double k_var = -inv[c] * sum_gx / n;
          for (std::size_t b = 0; b < d.B; ++b)
            for (std::size_t t = 0; t < lens[b]; ++t)
              for (std::size_t f = 0; f < d.F; ++f) {
                const std::size_t i = d.index(b, c, t, f);
                gx[i] += k_mean + k_var * xhat[i];
              }
        }
      });
}

Tensor global_layer_norm(const Tensor& x, const Tensor& gamma,
                         const Tensor& beta, double eps, Lengths lengths) {
  const Dims d = dims_of(x, "global_layer_norm");
  check_affine(gamma, d.C, "global_layer_norm", "gamma");
  check_affine(beta, d.C, "global_layer_norm", "beta");
  const auto lens = resolve_lengths(d, lengths, "global_layer_norm");

  std::vector<double> inv(d.B), xhat(x.numel()), out(x.numel());
  for (std::size_t b = 0; b < d.B; ++b) {
    const std::size_t count = d.C * lens[b] * d.F;
    if (count == 0)
      throw ShapeError(fmt::format("global_layer_norm: item {} has no frames", b));
    double s = 0.0;
    for (std::size_t c = 0; c < d.C; ++c)
      for (std::size_t t = 0; t < lens[b]; ++t)
        for (std::size_t f = 0; f < d.F; ++f) s += x[d.index(b, c, t, f)];
    const double m = s / static_cast<double>(count);
    double v = 0.0;
    for (std::size_t c = 0; c < d.C; ++c)
      for (std::size_t t = 0; t < lens[b]; ++t)
        for (std::size_t f = 0; f < d.F; ++f) {
          const double e = x[d.index(b, c, t, f)] - m;
          v += e * e;
        }
    v /= static_cast<double>(count);
    inv[b] = 1.0 / std::sqrt(v + eps);
    for (std::size_t c = 0; c < d.C; ++c)
      for (std::size_t t = 0; t < d.T; ++t)
        for (std::size_t f = 0; f < d.F; ++f) {
          const std::size_t i = d.index(b, c, t, f);
          xhat[i] = (x[i] - m) * inv[b];
          out[i] = gamma[c] * xhat[i] + beta[c];
        }
  }

  ImplPtr px = x.impl(), pg = gamma.impl(), pb = beta.impl();
  return make_result(
      x.shape(), std::move(out), {px, pg, pb}, "global_layer_norm",
      [px, pg, pb, d, lens, inv, xhat = std::move(xhat)](TensorImpl& self) {
        const auto& gy = self.grad;
        if (pg->requires_grad) {
          auto& gg = pg->ensure_grad();
          for (std::size_t i = 0; i < gy.size(); ++i)
            gg[(i / (d.T * d.F)) % d.C] += gy[i] * xhat[i];
        }
        if (pb->requires_grad) {
          auto& gb = pb->ensure_grad();
          for (std::size_t i = 0; i < gy.size(); ++i)
            gb[(i / (d.T * d.F)) % d.C] += gy[i];
        }
        if (!px->requires_grad) return;
        auto& gx = px->ensure_grad();
        const auto& gamma_v = pg->data;
        for (std::size_t b = 0; b < d.B; ++b) {
          double sum_g = 0.0, sum_gx = 0.0;
          for (std::size_t c = 0; c < d.C; ++c)
            for (std::size_t t = 0; t < d.T; ++t)
              for (std::size_t f = 0; f < d.F; ++f) {
                const std::size_t i = d.index(b, c, t, f);
                const double g = gy[i] * gamma_v[c];
                gx[i] += g * inv[b];
                sum_g += g;
                sum_gx += g * xhat[i];
              }
          const double n = static_cast<double>(d.C * lens[b] * d.F);
          const double k_mean = -inv[b] * sum_g / n;
          const double k_var = -inv[b] * sum_gx / n;
          for (std::size_t c = 0; c < d.C; ++c)
            for (std::size_t t = 0; t < lens[b]; ++t)
              for (std::size_t f = 0; f < d.F; ++f) {
                const std::size_t i = d.index(b, c, t, f);
                gx[i] += k_mean + k_var * xhat[i];
              }
        }
      });
}

}  // namespace spatialkd::nn
