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

double sigm(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// y[r] += sum_c m[r, c] * v[c]
void gemv_add(const double* m, const double* v, std::size_t rows,
              std::size_t cols, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* mr = m + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += mr[c] * v[c];
    y[r] += acc;
  }
}

// y[c] += sum_r m[r, c] * v[r]
void gemv_t_add(const double* m, const double* v, std::size_t rows,
                std::size_t cols, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* mr = m + r * cols;
    const double vr = v[r];
    for (std::size_t c = 0; c < cols; ++c) y[c] += mr[c] * vr;
  }
}

// m[r, c] += u[r] * v[c]
void ger_add(const double* u, const double* v, std::size_t rows,
             std::size_t cols, double* m) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* mr = m + r * cols;
    const double ur = u[r];
    for (std::size_t c = 0; c < cols; ++c) mr[c] += ur * v[c];
  }
}

}  // namespace

Tensor lstm(const Tensor& x, const Tensor& w_ih, const Tensor& w_hh,
            const Tensor& bias, const Tensor& h0, const Tensor& c0) {
  if (x.rank() != 3)
    throw ShapeError(fmt::format("lstm: input must be [B, T, D], got {}",
                                 shape_string(x.shape())));
  const std::size_t B = x.dim(0), T = x.dim(1), D = x.dim(2);
  if (w_hh.rank() != 2 || w_hh.dim(0) != 4 * w_hh.dim(1))
    throw ShapeError(fmt::format("lstm: w_hh must be [4H, H], got {}",
                                 shape_string(w_hh.shape())));
  const std::size_t H = w_hh.dim(1);
  if (w_ih.rank() != 2 || w_ih.dim(0) != 4 * H || w_ih.dim(1) != D)
    throw ShapeError(fmt::format("lstm: w_ih must be [{}, {}], got {}", 4 * H, D,
                                 shape_string(w_ih.shape())));
  if (bias.rank() != 1 || bias.dim(0) != 4 * H)
    throw ShapeError(fmt::format("lstm: bias must be [{}], got {}", 4 * H,
                                 shape_string(bias.shape())));
  const Shape state{B, H};
  if (h0.shape() != state || c0.shape() != state)
    throw ShapeError(fmt::format("lstm: h0/c0 must be [{}, {}], got {} / {}", B, H,
                                 shape_string(h0.shape()),
                                 shape_string(c0.shape())));

  const std::size_t G = 4 * H;
  // Activated gates [B, T, 4H], cell states and tanh(cell) [B, T, H].
  std::vector<double> gates(B * T * G), cells(B * T * H), tcells(B * T * H);
  std::vector<double> out(B * T * H);
  const double* wi = w_ih.data().data();
  const double* wh = w_hh.data().data();
  std::vector<double> z(G);
  for (std::size_t b = 0; b < B; ++b) {
    const double* h_prev = h0.data().data() + b * H;
    const double* c_prev = c0.data().data() + b * H;
    for (std::size_t t = 0; t < T; ++t) {
      const std::size_t bt = b * T + t;
      std::copy_n(bias.data().begin(), G, z.begin());
      gemv_add(wi, x.data().data() + bt * D, G, D, z.data());
      gemv_add(wh, h_prev, G, H, z.data());
      double* gt = gates.data() + bt * G;
      double* ct = cells.data() + bt * H;
      double* tc = tcells.data() + bt * H;
      double* ht = out.data() + bt * H;
      for (std::size_t k = 0; k < H; ++k) {
        const double i = sigm(z[k]);
        const double f = sigm(z[H + k]);
        const double g = std::tanh(z[2 * H + k]);
        const double o = sigm(z[3 * H + k]);
        gt[k] = i;
        gt[H + k] = f;
        gt[2 * H + k] = g;
        gt[3 * H + k] = o;
        ct[k] = f * c_prev[k] + i * g;
        tc[k] = std::tanh(ct[k]);
        ht[k] = o * tc[k];
      }
      h_prev = ht;
      c_prev = ct;
    }
  }
  MacCounter::add(B * T * G * (D + H));

  auto px = x.impl(), pwi = w_ih.impl(), pwh = w_hh.impl(), pb = bias.impl(),
       ph = h0.impl(), pc = c0.impl();
  return make_result(
      {B, T, H}, std::move(out), {px, pwi, pwh, pb, ph, pc}, "lstm",
      [=, gates = std::move(gates), cells = std::move(cells),
       tcells = std::move(tcells)](TensorImpl& self) {
        const auto& gy = self.grad;
        std::vector<double> dh(H), dc(H), dz(G);
        double* gx = px->requires_grad ? px->ensure_grad().data() : nullptr;
        double* gwi = pwi->requires_grad ? pwi->ensure_grad().data() : nullptr;
        double* gwh = pwh->requires_grad ? pwh->ensure_grad().data() : nullptr;
        double* gb = pb->requires_grad ? pb->ensure_grad().data() : nullptr;
        for (std::size_t b = 0; b < B; ++b) {
          std::fill(dh.begin(), dh.end(), 0.0);
          std::fill(dc.begin(), dc.end(), 0.0);
          for (std::size_t tt = T; tt-- > 0;) {
            const std::size_t bt = b * T + tt;
            const double* gt = gates.data() + bt * G;
            const double* tc = tcells.data() + bt * H;
            const double* c_prev = tt > 0 ? cells.data() + (bt - 1) * H
                                          : pc->data.data() + b * H;
            const double* h_prev = tt > 0 ? self.data.data() + (bt - 1) * H
                                          : ph->data.data() + b * H;
            for (std::size_t k = 0; k < H; ++k) {
              const double i = gt[k], f = gt[H + k], g = gt[2 * H + k],
                           o = gt[3 * H + k];
              const double dhk = dh[k] + gy[bt * H + k];
              const double dck = dc[k] + dhk * o * (1.0 - tc[k] * tc[k]);
              dz[k] = dck * g * i * (1.0 - i);
              dz[H + k] = dck * c_prev[k] * f * (1.0 - f);
              dz[2 * H + k] = dck * i * (1.0 - g * g);
              dz[3 * H + k] = dhk * tc[k] * o * (1.0 - o);
              dc[k] = dck * f;
            }
            if (gwi) ger_add(dz.data(), px->data.data() + bt * D, G, D, gwi);
            if (gwh) ger_add(dz.data(), h_prev, G, H, gwh);
            if (gb)
              for (std::size_t k = 0; k < G; ++k) gb[k] += dz[k];
            if (gx) gemv_t_add(pwi->data.data(), dz.data(), G, D, gx + bt * D);
            std::fill(dh.begin(), dh.end(), 0.0);
            gemv_t_add(pwh->data.data(), dz.data(), G, H, dh.data());
          }
          if (ph->requires_grad) {
            auto& g = ph->ensure_grad();
            for (std::size_t k = 0; k < H; ++k) g[b * H + k] += dh[k];
          }
          if (pc->requires_grad) {
            auto& g = pc->ensure_grad();
            for (std::size_t k = 0; k < H; ++k) g[b * H + k] += dc[k];
          }
        }
      });
}

}  // namespace spatialkd::nn
