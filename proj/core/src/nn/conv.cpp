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

#include <algorithm>

#include <fmt/format.h>

#include "spatialkd/error.hpp"
#include "spatialkd/nn/ops.hpp"

namespace spatialkd::nn {
namespace {

using ImplPtr = std::shared_ptr<TensorImpl>;

struct Geometry {
  std::size_t B, Cin, H, W, Cout, Kh, Kw, Ho, Wo, sh, sw, ph, pw;
};

void check_bias(const Tensor& bias, std::size_t cout, const char* op) {
  if (bias.numel() != 0 && (bias.rank() != 1 || bias.dim(0) != cout))
    throw ShapeError(fmt::format("{}: bias shape {} does not match {} outputs",
                                 op, shape_string(bias.shape()), cout));
}

// Range of output indices o with 0 <= o*stride + k - pad < in.
std::pair<std::size_t, std::size_t> valid_range(std::size_t out, std::size_t in,
                                                std::size_t stride,
                                                std::size_t k, std::size_t pad) {
  const auto off = static_cast<std::ptrdiff_t>(k) - static_cast<std::ptrdiff_t>(pad);
  const auto s = static_cast<std::ptrdiff_t>(stride);
  std::ptrdiff_t lo = 0;
  if (off < 0) lo = (-off + s - 1) / s;
  std::ptrdiff_t hi = static_cast<std::ptrdiff_t>(in) - off;  // o*s < hi
  hi = hi <= 0 ? 0 : (hi + s - 1) / s;
  hi = std::min<std::ptrdiff_t>(hi, static_cast<std::ptrdiff_t>(out));
  lo = std::min(lo, hi);
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

Geometry conv_geometry(const Tensor& x, const Tensor& w,
                       const Conv2dOptions& o) {
  static const char* kAxes[] = {"time (axis 2)", "frequency (axis 3)"};
  if (x.rank() != 4)
    throw ShapeError(fmt::format("conv2d: input must be [B, C, T, F], got {}",
                                 shape_string(x.shape())));
  if (w.rank() != 4)
    throw ShapeError(fmt::format("conv2d: weight must be [Cout, Cin, Kh, Kw], got {}",
                                 shape_string(w.shape())));
  if (x.dim(1) != w.dim(1))
    throw ShapeError(fmt::format(
        "conv2d: channel axis (axis 1) mismatch: input has {}, weight expects {}",
        x.dim(1), w.dim(1)));
  if (o.stride[0] == 0 || o.stride[1] == 0)
    throw ShapeError("conv2d: stride must be >= 1");
  Geometry g{};
  g.B = x.dim(0); g.Cin = x.dim(1); g.H = x.dim(2); g.W = x.dim(3);
  g.Cout = w.dim(0); g.Kh = w.dim(2); g.Kw = w.dim(3);
  g.sh = o.stride[0]; g.sw = o.stride[1]; g.ph = o.padding[0]; g.pw = o.padding[1];
  const std::size_t in[2] = {g.H, g.W}, k[2] = {g.Kh, g.Kw}, p[2] = {g.ph, g.pw};
  for (int a = 0; a < 2; ++a) {
    if (in[a] + 2 * p[a] < k[a])
      throw ShapeError(fmt::format(
          "conv2d: {} too short: padded size {} < kernel {}", kAxes[a],
          in[a] + 2 * p[a], k[a]));
  }
  g.Ho = (g.H + 2 * g.ph - g.Kh) / g.sh + 1;
  g.Wo = (g.W + 2 * g.pw - g.Kw) / g.sw + 1;
  return g;
}

// out[b, co, oh, ow] += w[co, ci, kh, kw] * in[b, ci, oh*sh+kh-ph, ow*sw+kw-pw]
// `in` is H x W, `out` is Ho x Wo. Shared by conv forward and deconv backward.
void correlate_accumulate(const Geometry& g, const double* in, const double* w,
                          double* out) {
  for (std::size_t b = 0; b < g.B; ++b) {
    for (std::size_t co = 0; co < g.Cout; ++co) {
      double* oplane = out + (b * g.Cout + co) * g.Ho * g.Wo;
      for (std::size_t ci = 0; ci < g.Cin; ++ci) {
        const double* iplane = in + (b * g.Cin + ci) * g.H * g.W;
        const double* wk = w + (co * g.Cin + ci) * g.Kh * g.Kw;
        for (std::size_t kh = 0; kh < g.Kh; ++kh) {
          const auto [oh0, oh1] = valid_range(g.Ho, g.H, g.sh, kh, g.ph);
          for (std::size_t kw = 0; kw < g.Kw; ++kw) {
            const double wv = wk[kh * g.Kw + kw];
            const auto [ow0, ow1] = valid_range(g.Wo, g.W, g.sw, kw, g.pw);
            const std::size_t n = ow1 - ow0;
            if (n == 0) continue;
            for (std::size_t oh = oh0; oh < oh1; ++oh) {
              const double* irow =
                  iplane + (oh * g.sh + kh - g.ph) * g.W + (ow0 * g.sw + kw - g.pw);
              double* orow = oplane + oh * g.Wo + ow0;
              if (g.sw == 1) {
                for (std::size_t j = 0; j < n; ++j) orow[j] += wv * irow[j];
              } else {
                for (std::size_t j = 0; j < n; ++j) orow[j] += wv * irow[j * g.sw];
              }
            }
          }
        }
      }
    }
  }
}

// Adjoint of correlate_accumulate with respect to `in`:
// in_grad[b, ci, ...] += w * out_grad[b, co, ...].
void correlate_adjoint_input(const Geometry& g, const double* out_grad,
                             const double* w, double* in_grad) {
  for (std::size_t b = 0; b < g.B; ++b) {
    for (std::size_t co = 0; co < g.Cout; ++co) {
      const double* oplane = out_grad + (b * g.Cout + co) * g.Ho * g.Wo;
      for (std::size_t ci = 0; ci < g.Cin; ++ci) {
        double* iplane = in_grad + (b * g.Cin + ci) * g.H * g.W;
        const double* wk = w + (co * g.Cin + ci) * g.Kh * g.Kw;
        for (std::size_t kh = 0; kh < g.Kh; ++kh) {
          const auto [oh0, oh1] = valid_range(g.Ho, g.H, g.sh, kh, g.ph);
          for (std::size_t kw = 0; kw < g.Kw; ++kw) {
            const double wv = wk[kh * g.Kw + kw];
            const auto [ow0, ow1] = valid_range(g.Wo, g.W, g.sw, kw, g.pw);
            const std::size_t n = ow1 - ow0;
            if (n == 0) continue;
            for (std::size_t oh = oh0; oh < oh1; ++oh) {
              double* irow =
                  iplane + (oh * g.sh + kh - g.ph) * g.W + (ow0 * g.sw + kw - g.pw);
              const double* orow = oplane + oh * g.Wo + ow0;
              for (std::size_t j = 0; j < n; ++j) irow[j * g.sw] += wv * orow[j];
            }
          }
        }
      }
    }
  }
}

// w_grad[co, ci, kh, kw] += sum in[b, ci, ...] * out_grad[b, co, ...].
void correlate_adjoint_weight(const Geometry& g, const double* in,
                              const double* out_grad, double* w_grad) {
  for (std::size_t b = 0; b < g.B; ++b) {
    for (std::size_t co = 0; co < g.Cout; ++co) {
      const double* oplane = out_grad + (b * g.Cout + co) * g.Ho * g.Wo;
      for (std::size_t ci = 0; ci < g.Cin; ++ci) {
        const double* iplane = in + (b * g.Cin + ci) * g.H * g.W;
        double* wk = w_grad + (co * g.Cin + ci) * g.Kh * g.Kw;
        for (std::size_t kh = 0; kh < g.Kh; ++kh) {
          const auto [oh0, oh1] = valid_range(g.Ho, g.H, g.sh, kh, g.ph);
          for (std::size_t kw = 0; kw < g.Kw; ++kw) {
            const auto [ow0, ow1] = valid_range(g.Wo, g.W, g.sw, kw, g.pw);
            const std::size_t n = ow1 - ow0;
            if (n == 0) continue;
            double acc = 0.0;
            for (std::size_t oh = oh0; oh < oh1; ++oh) {
              const double* irow =
                  iplane + (oh * g.sh + kh - g.ph) * g.W + (ow0 * g.sw + kw - g.pw);
              const double* orow = oplane + oh * g.Wo + ow0;
              for (std::size_t j = 0; j < n; ++j) acc += irow[j * g.sw] * orow[j];
            }
            wk[kh * g.Kw + kw] += acc;
          }
        }
      }
    }
  }
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias,
              const Conv2dOptions& opts) {
  const Geometry g = conv_geometry(x, weight, opts);
  check_bias(bias, g.Cout, "conv2d");
  std::vector<double> out(g.B * g.Cout * g.Ho * g.Wo, 0.0);
  if (bias.numel() != 0) {
    for (std::size_t b = 0; b < g.B; ++b)
      for (std::size_t co = 0; co < g.Cout; ++co)
        std::fill_n(out.begin() + (b * g.Cout + co) * g.Ho * g.Wo, g.Ho * g.Wo,
                    bias[co]);
  }
  correlate_accumulate(g, x.data().data(), weight.data().data(), out.data());
  MacCounter::add(g.B * g.Cin * g.Cout * g.Kh * g.Kw * g.Ho * g.Wo);

  ImplPtr px = x.impl(), pw = weight.impl(), pb = bias.impl();
  return make_result({g.B, g.Cout, g.Ho, g.Wo}, std::move(out), {px, pw, pb},
                     "conv2d", [px, pw, pb, g](TensorImpl& self) {
                       const double* go = self.grad.data();
                       if (px->requires_grad)
                         correlate_adjoint_input(g, go, pw->data.data(),
                                                 px->ensure_grad().data());
                       if (pw->requires_grad)
                         correlate_adjoint_weight(g, px->data.data(), go,
                                                  pw->ensure_grad().data());
                       if (pb->requires_grad && !pb->data.empty()) {
                         auto& gb = pb->ensure_grad();
                         const std::size_t plane = g.Ho * g.Wo;
                         for (std::size_t b = 0; b < g.B; ++b)
                           for (std::size_t co = 0; co < g.Cout; ++co)
                             for (std::size_t i = 0; i < plane; ++i)
                               gb[co] += go[(b * g.Cout + co) * plane + i];
                       }
                     });
}

Tensor deconv2d(const Tensor& x, const Tensor& weight, const Tensor& bias,
                const Conv2dOptions& opts) {
  static const char* kAxes[] = {"time (axis 2)", "frequency (axis 3)"};
  if (x.rank() != 4 || weight.rank() != 4)
    throw ShapeError(fmt::format("deconv2d: expected rank-4 input and weight, got {} and {}",
                                 shape_string(x.shape()),
                                 shape_string(weight.shape())));
  if (x.dim(1) != weight.dim(0))
    throw ShapeError(fmt::format(
        "deconv2d: channel axis (axis 1) mismatch: input has {}, weight expects {}",
        x.dim(1), weight.dim(0)));
  if (opts.stride[0] == 0 || opts.stride[1] == 0)
    throw ShapeError("deconv2d: stride must be >= 1");
  // Expressed as the conv geometry whose adjoint this is: the conv maps the
  // deconv output (Cout channels) to the deconv input (Cin channels).
  Geometry g{};
  g.B = x.dim(0);
  g.Cout = x.dim(1);
  g.Cin = weight.dim(1);
  g.Ho = x.dim(2); g.Wo = x.dim(3);
  g.Kh = weight.dim(2); g.Kw = weight.dim(3);
  g.sh = opts.stride[0]; g.sw = opts.stride[1];
  g.ph = opts.padding[0]; g.pw = opts.padding[1];
  const std::size_t in[2] = {g.Ho, g.Wo}, k[2] = {g.Kh, g.Kw},
                    s[2] = {g.sh, g.sw}, p[2] = {g.ph, g.pw};
  std::size_t outsz[2];
  for (int a = 0; a < 2; ++a) {
    const std::size_t full = (in[a] - 1) * s[a] + k[a];
    if (in[a] == 0 || full <= 2 * p[a])
      throw ShapeError(fmt::format("deconv2d: {} output would be empty", kAxes[a]));
    outsz[a] = full - 2 * p[a];
  }
  g.H = outsz[0];
  g.W = outsz[1];
  check_bias(bias, g.Cin, "deconv2d");

  std::vector<double> out(g.B * g.Cin * g.H * g.W, 0.0);
  correlate_adjoint_input(g, x.data().data(), weight.data().data(), out.data());
  if (bias.numel() != 0) {
    for (std::size_t b = 0; b < g.B; ++b)
      for (std::size_t c = 0; c < g.Cin; ++c)
        for (std::size_t i = 0; i < g.H * g.W; ++i)
          out[(b * g.Cin + c) * g.H * g.W + i] += bias[c];
  }
  MacCounter::add(g.B * g.Cin * g.Cout * g.Kh * g.Kw * g.Ho * g.Wo);

  ImplPtr px = x.impl(), pw = weight.impl(), pb = bias.impl();
  return make_result({g.B, g.Cin, g.H, g.W}, std::move(out), {px, pw, pb},
                     "deconv2d", [px, pw, pb, g](TensorImpl& self) {
                       const double* go = self.grad.data();
                       if (px->requires_grad) {
                         auto& gx = px->ensure_grad();
                         std::vector<double> tmp(gx.size(), 0.0);
                         correlate_accumulate(g, go, pw->data.data(), tmp.data());
                         for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += tmp[i];
                       }
                       if (pw->requires_grad)
                         correlate_adjoint_weight(g, go, px->data.data(),
                                                  pw->ensure_grad().data());
                       if (pb->requires_grad && !pb->data.empty()) {
                         auto& gb = pb->ensure_grad();
                         const std::size_t plane = g.H * g.W;
                         for (std::size_t b = 0; b < g.B; ++b)
                           for (std::size_t c = 0; c < g.Cin; ++c)
                             for (std::size_t i = 0; i < plane; ++i)
                               gb[c] += go[(b * g.Cin + c) * plane + i];
                       }
                     });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  if (x.rank() < 1 || weight.rank() != 2 || x.shape().back() != weight.dim(1))
    throw ShapeError(fmt::format("linear: input {} incompatible with weight {}",
                                 shape_string(x.shape()),
                                 shape_string(weight.shape())));
  const std::size_t din = weight.dim(1), dout = weight.dim(0);
  check_bias(bias, dout, "linear");
  const std::size_t rows = x.numel() / din;
  Shape shape = x.shape();
  shape.back() = dout;
  std::vector<double> out(rows * dout);
  const double* xd = x.data().data();
  const double* wd = weight.data().data();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t o = 0; o < dout; ++o) {
      double acc = bias.numel() ? bias[o] : 0.0;
      const double* wr = wd + o * din;
      const double* xr = xd + r * din;
      for (std::size_t i = 0; i < din; ++i) acc += wr[i] * xr[i];
      out[r * dout + o] = acc;
    }
  }
  MacCounter::add(rows * din * dout);

  ImplPtr px = x.impl(), pw = weight.impl(), pb = bias.impl();
  return make_result(std::move(shape), std::move(out), {px, pw, pb}, "linear",
                     [px, pw, pb, rows, din, dout](TensorImpl& self) {
                       const double* go = self.grad.data();
                       if (px->requires_grad) {
                         auto& gx = px->ensure_grad();
                         for (std::size_t r = 0; r < rows; ++r)
                           for (std::size_t o = 0; o < dout; ++o) {
                             const double gv = go[r * dout + o];
                             const double* wr = pw->data.data() + o * din;
                             for (std::size_t i = 0; i < din; ++i)
                               gx[r * din + i] += gv * wr[i];
                           }
                       }
                       if (pw->requires_grad) {
                         auto& gw = pw->ensure_grad();
                         for (std::size_t r = 0; r < rows; ++r)
                           for (std::size_t o = 0; o < dout; ++o) {
                             const double gv = go[r * dout + o];
                             const double* xr = px->data.data() + r * din;
                             for (std::size_t i = 0; i < din; ++i)
                               gw[o * din + i] += gv * xr[i];
                           }
                       }
                       if (pb->requires_grad && !pb->data.empty()) {
                         auto& gb = pb->ensure_grad();
                         for (std::size_t r = 0; r < rows; ++r)
                           for (std::size_t o = 0; o < dout; ++o)
                             gb[o] += go[r * dout + o];
                       }
                     });
}

}  // namespace spatialkd::nn
