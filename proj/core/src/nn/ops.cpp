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
#include <cmath>

#include <fmt/format.h>

#include "spatialkd/error.hpp"
#include "spatialkd/nn/ops.hpp"

namespace spatialkd::nn {
namespace {

using ImplPtr = std::shared_ptr<TensorImpl>;

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape())
    throw ShapeError(fmt::format("{}: shape mismatch {} vs {}", op,
                                 shape_string(a.shape()),
                                 shape_string(b.shape())));
}

// y = f(x); dy/dx = d(x, y).
template <typename F, typename D>
Tensor unary(const Tensor& a, const char* op, F f, D d) {
  std::vector<double> out(a.numel());
  const auto x = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(x[i]);
  ImplPtr pa = a.impl();
  return make_result(a.shape(), std::move(out), {pa}, op,
                     [pa, d](TensorImpl& self) {
                       auto& ga = pa->ensure_grad();
                       for (std::size_t i = 0; i < ga.size(); ++i)
                         ga[i] += self.grad[i] * d(pa->data[i], self.data[i]);
                     });
}

void check_rank4(const Tensor& x, const char* op) {
  if (x.rank() != 4)
    throw ShapeError(fmt::format("{}: expected [B, C, T, F], got {}", op,
                                 shape_string(x.shape())));
}

void check_lengths(const Tensor& x, Lengths lengths, const char* op) {
  if (lengths.empty()) return;
  if (lengths.size() != x.dim(0))
    throw ShapeError(fmt::format("{}: {} lengths for batch of {}", op,
                                 lengths.size(), x.dim(0)));
  for (auto len : lengths) {
    if (len > x.dim(2))
      throw ShapeError(fmt::format("{}: length {} exceeds {} frames", op, len,
                                   x.dim(2)));
  }
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  ImplPtr pa = a.impl(), pb = b.impl();
  return make_result(a.shape(), std::move(out), {pa, pb}, "add",
                     [pa, pb](TensorImpl& self) {
                       for (auto* p : {pa.get(), pb.get()}) {
                         if (!p->requires_grad) continue;
                         auto& g = p->ensure_grad();
                         for (std::size_t i = 0; i < g.size(); ++i)
                           g[i] += self.grad[i];
                       }
                     });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  ImplPtr pa = a.impl(), pb = b.impl();
  return make_result(a.shape(), std::move(out), {pa, pb}, "sub",
                     [pa, pb](TensorImpl& self) {
                       if (pa->requires_grad) {
                         auto& g = pa->ensure_grad();
                         for (std::size_t i = 0; i < g.size(); ++i)
                           g[i] += self.grad[i];
                       }
                       if (pb->requires_grad) {
                         auto& g = pb->ensure_grad();
                         for (std::size_t i = 0; i < g.size(); ++i)
                           g[i] -= self.grad[i];
                       }
                     });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  ImplPtr pa = a.impl(), pb = b.impl();
  return make_result(a.shape(), std::move(out), {pa, pb}, "mul",
                     [pa, pb](TensorImpl& self) {
                       if (pa->requires_grad) {
                         auto& g = pa->ensure_grad();
                         for (std::size_t i = 0; i < g.size(); ++i)
                           g[i] += self.grad[i] * pb->data[i];
                       }
                       if (pb->requires_grad) {
                         auto& g = pb->ensure_grad();
                         for (std::size_t i = 0; i < g.size(); ++i)
                           g[i] += self.grad[i] * pa->data[i];
                       }
                     });
}

Tensor div(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "div");
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] / b[i];
  ImplPtr pa = a.impl(), pb = b.impl();
  return make_result(a.shape(), std::move(out), {pa, pb}, "div",
                     [pa, pb](TensorImpl& self) {
                       if (pa->requires_grad) {
                         auto& g = pa->ensure_grad();
                         for (std::size_t i = 0; i < g.size(); ++i)
                           g[i] += self.grad[i] / pb->data[i];
                       }
                       if (pb->requires_grad) {
                         auto& g = pb->ensure_grad();
                         for (std::size_t i = 0; i < g.size(); ++i)
                           g[i] -= self.grad[i] * self.data[i] / pb->data[i];
                       }
                     });
}

Tensor scale(const Tensor& a, double s) {
  return unary(a, "scale", [s](double x) { return s * x; },
               [s](double, double) { return s; });
}

Tensor add_scalar(const Tensor& a, double s) {
  return unary(a, "add_scalar", [s](double x) { return x + s; },
               [](double, double) { return 1.0; });
}

Tensor abs(const Tensor& a) {
  return unary(a, "abs", [](double x) { return std::abs(x); },
               [](double x, double) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); });
}

Tensor sqrt(const Tensor& a) {
  return unary(a, "sqrt", [](double x) { return std::sqrt(x); },
               [](double, double y) { return y > 0 ? 0.5 / y : 0.0; });
}

Tensor square(const Tensor& a) {
  return unary(a, "square", [](double x) { return x * x; },
               [](double x, double) { return 2.0 * x; });
}

Tensor clamp_min(const Tensor& a, double floor) {
  return unary(a, "clamp_min", [floor](double x) { return x < floor ? floor : x; },
               [floor](double x, double) { return x < floor ? 0.0 : 1.0; });
}

Tensor elu(const Tensor& a) {
  return unary(a, "elu", [](double x) { return x > 0 ? x : std::expm1(x); },
               [](double x, double y) { return x > 0 ? 1.0 : y + 1.0; });
}

Tensor softplus(const Tensor& a) {
  return unary(
      a, "softplus",
      [](double x) { return x > 30 ? x : std::log1p(std::exp(x)); },
      [](double x, double) { return 1.0 / (1.0 + std::exp(-x)); });
}

Tensor sigmoid(const Tensor& a) {
  return unary(a, "sigmoid", [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
               [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& a) {
  return unary(a, "tanh", [](double x) { return std::tanh(x); },
               [](double, double y) { return 1.0 - y * y; });
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v;
  ImplPtr pa = a.impl();
  return make_result({}, {s}, {pa}, "sum", [pa](TensorImpl& self) {
    auto& g = pa->ensure_grad();
    for (auto& v : g) v += self.grad[0];
  });
}

Tensor mean(const Tensor& a) {
  if (a.numel() == 0) throw ShapeError("mean: empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.numel()));
}

Tensor sum_per_item(const Tensor& a) {
  if (a.rank() < 1) throw ShapeError("sum_per_item: rank-0 input");
  const std::size_t batch = a.dim(0);
  const std::size_t inner = batch ? a.numel() / batch : 0;
  std::vector<double> out(batch, 0.0);
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t i = 0; i < inner; ++i) out[b] += a[b * inner + i];
  ImplPtr pa = a.impl();
  return make_result({batch}, std::move(out), {pa}, "sum_per_item",
                     [pa, inner](TensorImpl& self) {
                       auto& g = pa->ensure_grad();
                       for (std::size_t i = 0; i < g.size(); ++i)
                         g[i] += self.grad[i / inner];
                     });
}

Tensor sum_channels(const Tensor& a) {
  if (a.rank() < 2) throw ShapeError("sum_channels: rank < 2");
  const std::size_t batch = a.dim(0), channels = a.dim(1);
  const std::size_t inner = a.numel() / (batch * channels);
  Shape shape = a.shape();
  shape[1] = 1;
  std::vector<double> out(batch * inner, 0.0);
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t c = 0; c < channels; ++c)
      for (std::size_t i = 0; i < inner; ++i)
        out[b * inner + i] += a[(b * channels + c) * inner + i];
  ImplPtr pa = a.impl();
  return make_result(std::move(shape), std::move(out), {pa}, "sum_channels",
                     [pa, batch, channels, inner](TensorImpl& self) {
                       auto& g = pa->ensure_grad();
                       for (std::size_t b = 0; b < batch; ++b)
                         for (std::size_t c = 0; c < channels; ++c)
                           for (std::size_t i = 0; i < inner; ++i)
                             g[(b * channels + c) * inner + i] +=
                                 self.grad[b * inner + i];
                     });
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (numel(shape) != a.numel())
    throw ShapeError(fmt::format("reshape: {} -> {} changes element count",
                                 shape_string(a.shape()), shape_string(shape)));
  std::vector<double> out(a.data().begin(), a.data().end());
  ImplPtr pa = a.impl();
  return make_result(std::move(shape), std::move(out), {pa}, "reshape",
                     [pa](TensorImpl& self) {
                       auto& g = pa->ensure_grad();
                       for (std::size_t i = 0; i < g.size(); ++i)
                         g[i] += self.grad[i];
                     });
}

Tensor concat(std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  const Shape& ref = parts[0].shape();
  if (axis >= ref.size()) throw ShapeError("concat: axis out of range");
  Shape shape = ref;
  shape[axis] = 0;
  for (const auto& p : parts) {
    if (p.rank() != ref.size())
      throw ShapeError("concat: rank mismatch");
    for (std::size_t d = 0; d < ref.size(); ++d) {
      if (d != axis && p.dim(d) != ref[d])
        throw ShapeError(fmt::format("concat: axis {} differs ({} vs {})", d,
                                     shape_string(p.shape()),
                                     shape_string(ref)));
    }
    shape[axis] += p.dim(axis);
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= ref[d];
  for (std::size_t d = axis + 1; d < ref.size(); ++d) inner *= ref[d];
  const std::size_t total = shape[axis];

  std::vector<double> out(numel(shape));
  std::vector<ImplPtr> parents;
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const std::size_t len = p.dim(axis);
    for (std::size_t o = 0; o < outer; ++o)
      std::copy_n(p.data().begin() + o * len * inner, len * inner,
                  out.begin() + (o * total + offset) * inner);
    parents.push_back(p.impl());
    offsets.push_back(offset);
    offset += len;
  }
  auto parents_copy = parents;
  return make_result(
      std::move(shape), std::move(out), std::move(parents_copy), "concat",
      [parents, offsets, outer, inner, total, axis](TensorImpl& self) {
        for (std::size_t k = 0; k < parents.size(); ++k) {
          auto& p = parents[k];
          if (!p->requires_grad) continue;
          auto& g = p->ensure_grad();
          const std::size_t len = p->shape[axis];
          for (std::size_t o = 0; o < outer; ++o)
            for (std::size_t i = 0; i < len * inner; ++i)
              g[o * len * inner + i] +=
                  self.grad[(o * total + offsets[k]) * inner + i];
        }
      });
}

Tensor pad_crop(const Tensor& x, std::size_t axis, std::ptrdiff_t front,
                std::size_t new_len) {
  if (axis >= x.rank()) throw ShapeError("pad_crop: axis out of range");
  std::size_t outer = 1, inner = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= x.dim(d);
  for (std::size_t d = axis + 1; d < x.rank(); ++d) inner *= x.dim(d);
  const auto len = static_cast<std::ptrdiff_t>(x.dim(axis));
  Shape shape = x.shape();
  shape[axis] = new_len;
  std::vector<double> out(numel(shape), 0.0);
  const auto in = x.data();
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t j = 0; j < new_len; ++j) {
      const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(j) - front;
      if (src < 0 || src >= len) continue;
      std::copy_n(in.begin() + (o * len + src) * inner, inner,
                  out.begin() + (o * new_len + j) * inner);
    }
  }
  ImplPtr px = x.impl();
  return make_result(std::move(shape), std::move(out), {px}, "pad_crop",
                     [px, outer, inner, len, new_len, front](TensorImpl& self) {
                       auto& g = px->ensure_grad();
                       for (std::size_t o = 0; o < outer; ++o) {
                         for (std::size_t j = 0; j < new_len; ++j) {
                           const std::ptrdiff_t src =
                               static_cast<std::ptrdiff_t>(j) - front;
                           if (src < 0 || src >= len) continue;
                           for (std::size_t i = 0; i < inner; ++i)
                             g[(o * len + src) * inner + i] +=
                                 self.grad[(o * new_len + j) * inner + i];
                         }
                       }
                     });
}

Tensor to_sequence(const Tensor& x) {
  check_rank4(x, "to_sequence");
  const std::size_t B = x.dim(0), C = x.dim(1), T = x.dim(2), F = x.dim(3);
  std::vector<double> out(x.numel());
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t t = 0; t < T; ++t)
        for (std::size_t f = 0; f < F; ++f)
          out[(b * T + t) * C * F + c * F + f] = x[((b * C + c) * T + t) * F + f];
  ImplPtr px = x.impl();
  return make_result({B, T, C * F}, std::move(out), {px}, "to_sequence",
                     [px, B, C, T, F](TensorImpl& self) {
                       auto& g = px->ensure_grad();
                       for (std::size_t b = 0; b < B; ++b)
                         for (std::size_t c = 0; c < C; ++c)
                           for (std::size_t t = 0; t < T; ++t)
                             for (std::size_t f = 0; f < F; ++f)
                               g[((b * C + c) * T + t) * F + f] +=
                                   self.grad[(b * T + t) * C * F + c * F + f];
                     });
}

Tensor from_sequence(const Tensor& x, std::size_t channels, std::size_t bins) {
  if (x.rank() != 3 || x.dim(2) != channels * bins)
    throw ShapeError(fmt::format("from_sequence: {} is not [B, T, {}*{}]",
                                 shape_string(x.shape()), channels, bins));
  const std::size_t B = x.dim(0), C = channels, T = x.dim(1), F = bins;
  std::vector<double> out(x.numel());
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t t = 0; t < T; ++t)
        for (std::size_t f = 0; f < F; ++f)
          out[((b * C + c) * T + t) * F + f] = x[(b * T + t) * C * F + c * F + f];
  ImplPtr px = x.impl();
  return make_result({B, C, T, F}, std::move(out), {px}, "from_sequence",
                     [px, B, C, T, F](TensorImpl& self) {
                       auto& g = px->ensure_grad();
                       for (std::size_t b = 0; b < B; ++b)
                         for (std::size_t c = 0; c < C; ++c)
                           for (std::size_t t = 0; t < T; ++t)
                             for (std::size_t f = 0; f < F; ++f)
                               g[(b * T + t) * C * F + c * F + f] +=
                                   self.grad[((b * C + c) * T + t) * F + f];
                     });
}

Tensor mask_time(const Tensor& x, Lengths lengths) {
  check_rank4(x, "mask_time");
  check_lengths(x, lengths, "mask_time");
  if (lengths.empty()) return x;
  const std::size_t B = x.dim(0), C = x.dim(1), T = x.dim(2), F = x.dim(3);
  std::vector<double> mask(x.numel(), 1.0);
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t t = lengths[b]; t < T; ++t)
        for (std::size_t f = 0; f < F; ++f) mask[((b * C + c) * T + t) * F + f] = 0.0;
  return mul(x, Tensor(x.shape(), std::move(mask)));
}

Tensor unit_normalize_pairs(const Tensor& x) {
  check_rank4(x, "unit_normalize_pairs");
  if (x.dim(1) != 2)
    throw ShapeError(fmt::format("unit_normalize_pairs: need 2 channels, got {}",
                                 x.dim(1)));
  const std::size_t B = x.dim(0), plane = x.dim(2) * x.dim(3);
  std::vector<double> out(x.numel());
  std::vector<double> norms(B * plane);
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t i = 0; i < plane; ++i) {
      const std::size_t ic = b * 2 * plane + i, is = ic + plane;
      const double n = std::hypot(x[ic], x[is]);
      norms[b * plane + i] = n;
      if (n < 1e-12) {
        out[ic] = 1.0;
        out[is] = 0.0;
      } else {
        out[ic] = x[ic] / n;
        out[is] = x[is] / n;
      }
    }
  }
  ImplPtr px = x.impl();
  return make_result(x.shape(), std::move(out), {px}, "unit_normalize_pairs",
                     [px, B, plane, norms = std::move(norms)](TensorImpl& self) {
                       auto& g = px->ensure_grad();
                       for (std::size_t b = 0; b < B; ++b) {
                         for (std::size_t i = 0; i < plane; ++i) {
                           const double n = norms[b * plane + i];
                           if (n < 1e-12) continue;
                           const std::size_t ic = b * 2 * plane + i, is = ic + plane;
                           const double yc = self.data[ic], ys = self.data[is];
                           const double gc = self.grad[ic], gs = self.grad[is];
                           const double dot = yc * gc + ys * gs;
                           g[ic] += (gc - yc * dot) / n;
                           g[is] += (gs - ys * dot) / n;
                         }
                       }
                     });
}

}  // namespace spatialkd::nn
