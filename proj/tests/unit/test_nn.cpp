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
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "spatialkd/error.hpp"
#include "spatialkd/nn/checkpoint.hpp"
#include "spatialkd/nn/layers.hpp"
#include "spatialkd/nn/ops.hpp"
#include "test_support.hpp"

namespace spatialkd::nn {
namespace {

using testing::check_gradients;
using testing::NamedInput;
using testing::random_tensor;

constexpr double kFdStep = 1e-5;
constexpr double kFdTol = 1e-4;
constexpr std::uint64_t kSeeds[] = {11, 23, 37};

// Weighted sum with random weights drawn on first use and then held fixed,
// so every output element matters and repeated evaluations agree.
class Probe {
 public:
  explicit Probe(std::uint64_t seed) : rng_(seed) {}
  Tensor operator()(const Tensor& out) {
    if (weights_.numel() == 0 || weights_.shape() != out.shape())
      weights_ = random_tensor(rng_, out.shape(), -1.0, 1.0, false);
    return sum(out * weights_);
  }

 private:
  std::mt19937_64 rng_;
  Tensor weights_;
};

double at4(const Tensor& t, std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
  const auto& s = t.shape();
  return t[((a * s[1] + b) * s[2] + c) * s[3] + d];
}

// Six nested loops (plus batch) straight from the definition.
std::vector<double> conv_oracle(const Tensor& x, const Tensor& w, const Tensor& b,
                                std::size_t sh, std::size_t sw, std::size_t ph,
                                std::size_t pw) {
  const std::size_t B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const std::size_t O = w.dim(0), KH = w.dim(2), KW = w.dim(3);
  const std::size_t HO = (H + 2 * ph - KH) / sh + 1, WO = (W + 2 * pw - KW) / sw + 1;
  std::vector<double> out(B * O * HO * WO, 0.0);
  for (std::size_t n = 0; n < B; ++n)
    for (std::size_t o = 0; o < O; ++o)
      for (std::size_t i = 0; i < HO; ++i)
        for (std::size_t j = 0; j < WO; ++j) {
          double acc = b.numel() ? b[o] : 0.0;
          for (std::size_t c = 0; c < C; ++c)
            for (std::size_t u = 0; u < KH; ++u)
              for (std::size_t v = 0; v < KW; ++v) {
                const long r = static_cast<long>(i * sh + u) - static_cast<long>(ph);
                const long q = static_cast<long>(j * sw + v) - static_cast<long>(pw);
                if (r < 0 || q < 0 || r >= static_cast<long>(H) || q >= static_cast<long>(W))
                  continue;
                acc += at4(x, n, c, r, q) * at4(w, o, c, u, v);
              }
          out[((n * O + o) * HO + i) * WO + j] = acc;
        }
  return out;
}

TEST(Conv2d, AllOnesGivesNine) {
  const Tensor x = Tensor::full({1, 1, 3, 3}, 1.0), w = Tensor::full({1, 1, 3, 3}, 1.0);
  const Tensor y = conv2d(x, w, Tensor());
  ASSERT_EQ(y.shape(), (Shape{1, 1, 1, 1}));
  EXPECT_EQ(y.item(), 9.0);
}

TEST(Conv2d, PointwiseIdentity) {
  std::mt19937_64 rng(1);
  const Tensor x = random_tensor(rng, {2, 1, 5, 4}, -1, 1, false);
  const Tensor y = conv2d(x, Tensor::full({1, 1, 1, 1}, 1.0), Tensor::zeros({1}));
  EXPECT_EQ(std::vector<double>(y.data().begin(), y.data().end()),
            std::vector<double>(x.data().begin(), x.data().end()));
}

TEST(Conv2d, MatchesLoopOracle) {
  std::mt19937_64 rng(2);
  const Tensor x = random_tensor(rng, {2, 3, 8, 9}, -1, 1, false);
  const Tensor w = random_tensor(rng, {4, 3, 2, 3}, -1, 1, false);
  const Tensor b = random_tensor(rng, {4}, -1, 1, false);
  for (auto [ph, pw] : {std::pair<std::size_t, std::size_t>{0, 0}, {1, 2}}) {
    const Tensor y = conv2d(x, w, b, {{1, 2}, {ph, pw}});
    const auto want = conv_oracle(x, w, b, 1, 2, ph, pw);
    ASSERT_EQ(y.numel(), want.size());
    for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(y[i], want[i], 1e-10);
  }
  EXPECT_EQ(conv2d(x, w, b, {{1, 2}, {0, 0}}).shape(), (Shape{2, 4, 7, 4}));
}

TEST(Conv2d, ShapeErrorsNameTheAxis) {
  const Tensor x = Tensor::zeros({1, 2, 4, 4});
  try {
    (void)conv2d(x, Tensor::zeros({1, 3, 1, 1}), Tensor());
    FAIL();
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("channel"), std::string::npos) << e.what();
  }
  EXPECT_THROW((void)conv2d(x, Tensor::zeros({1, 2, 5, 1}), Tensor()), ShapeError);
  EXPECT_THROW((void)deconv2d(x, Tensor::zeros({3, 1, 1, 1}), Tensor()), ShapeError);
}

double dot(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) s += a[i] * b[i];
  return s;
}

TEST(Deconv2d, IsAdjointOfConv) {
  std::mt19937_64 rng(3);
  for (auto stride : {std::array<std::size_t, 2>{1, 1}, {1, 2}, {2, 3}}) {
    const Tensor w = random_tensor(rng, {3, 2, 2, 3}, -1, 1, false);
    const Tensor x = random_tensor(rng, {2, 2, 7, 11}, -1, 1, false);
    const Tensor cx = conv2d(x, w, Tensor(), {stride, {0, 0}});
    const Tensor y = random_tensor(rng, cx.shape(), -1, 1, false);
    // Deconv with weight laid out [Cin_of_deconv = 3, Cout = 2, ...] is the same tensor.
    const Tensor dy = deconv2d(y, w, Tensor(), {stride, {0, 0}});
    const Tensor dy_crop = pad_crop(pad_crop(dy, 2, 0, x.dim(2)), 3, 0, x.dim(3));
    EXPECT_NEAR(dot(cx, y), dot(x, dy_crop), 1e-10);
  }
}

TEST(Deconv2d, PointwiseIsLinearMap) {
  std::mt19937_64 rng(4);
  const Tensor x = random_tensor(rng, {1, 2, 3, 3}, -1, 1, false);
  const Tensor w = random_tensor(rng, {2, 3, 1, 1}, -1, 1, false);
  const Tensor y = deconv2d(x, w, Tensor());
  ASSERT_EQ(y.shape(), (Shape{1, 3, 3, 3}));
  for (std::size_t o = 0; o < 3; ++o)
    for (std::size_t p = 0; p < 9; ++p)
      EXPECT_NEAR(y[o * 9 + p], x[p] * w[o] + x[9 + p] * w[3 + o], 1e-14);
}

TEST(Deconv2d, MatchesGradientOfConvInput) {
  std::mt19937_64 rng(5);
  const Conv2dOptions opts{{1, 2}, {0, 0}};
  const Tensor w = random_tensor(rng, {4, 3, 2, 3}, -1, 1, false);
  Tensor x = random_tensor(rng, {2, 3, 8, 9});
  const Tensor cx = conv2d(x, w, Tensor(), opts);
  const Tensor g = random_tensor(rng, cx.shape(), -1, 1, false);
  backward(sum(cx * g));
  const Tensor d = deconv2d(g, w, Tensor(), opts);
  // Output is (in-1)*stride + kernel wide, which may exceed the conv input.
  const Tensor dc = pad_crop(pad_crop(d, 2, 0, 8), 3, 0, 9);
  for (std::size_t i = 0; i < x.numel(); ++i) EXPECT_NEAR(dc[i], x.grad()[i], 1e-10);
}

TEST(Elu, ScalarValues) {
  const Tensor y = elu(Tensor({3}, {0.0, 1.0, -1.0}));
  EXPECT_EQ(y[0], 0.0);
  EXPECT_EQ(y[1], 1.0);
  EXPECT_NEAR(y[2], std::exp(-1.0) - 1.0, 1e-15);
  EXPECT_NEAR(y[2], -0.63212, 1e-5);
}

TEST(BatchNorm, TrainingNormalizesPerChannel) {
  std::mt19937_64 rng(6);
  // Wide spread so eps barely shrinks the normalized variance.
  const Tensor x = random_tensor(rng, {3, 2, 5, 4}, -20, 50, false);
  Tensor rm = Tensor::zeros({2}), rv = Tensor::full({2}, 1.0);
  const Tensor y = batch_norm(x, Tensor::full({2}, 1.0), Tensor::zeros({2}), rm, rv, {});
  for (std::size_t c = 0; c < 2; ++c) {
    double m = 0, v = 0;
    const std::size_t n = 3 * 20;
    for (std::size_t b = 0; b < 3; ++b)
      for (std::size_t i = 0; i < 20; ++i) m += y[(b * 2 + c) * 20 + i];
    m /= n;
    for (std::size_t b = 0; b < 3; ++b)
      for (std::size_t i = 0; i < 20; ++i) v += std::pow(y[(b * 2 + c) * 20 + i] - m, 2);
    v /= n;
    EXPECT_NEAR(m, 0.0, 1e-6);
    EXPECT_NEAR(v, 1.0, 1e-6);
  }
}

TEST(BatchNorm, ConstantChannelGivesZero) {
  Tensor rm = Tensor::zeros({1}), rv = Tensor::full({1}, 1.0);
  const Tensor y = batch_norm(Tensor::full({2, 1, 3, 3}, 4.2), Tensor::full({1}, 1.0),
                              Tensor::zeros({1}), rm, rv, {});
  for (double v : y.data()) EXPECT_NEAR(v, 0.0, 1e-9);
}

TEST(BatchNorm, RunningStatsAndEvalFormula) {
  std::mt19937_64 rng(7);
  const Tensor x = random_tensor(rng, {2, 1, 3, 2}, -1, 3, false);
  Tensor rm = Tensor::zeros({1}), rv = Tensor::full({1}, 1.0);
  (void)batch_norm(x, Tensor::full({1}, 1.0), Tensor::zeros({1}), rm, rv, {});
  double m = 0, v = 0;
  for (double a : x.data()) m += a;
  m /= 12;
  for (double a : x.data()) v += (a - m) * (a - m);
  v /= 11;  // unbiased
  EXPECT_NEAR(rm[0], 0.1 * m, 1e-14);
  EXPECT_NEAR(rv[0], 0.9 + 0.1 * v, 1e-14);

  const Tensor gamma({1}, {1.7}), beta({1}, {-0.3});
  BatchNormOptions eval;
  eval.use_batch_stats = false;
  const Tensor y = batch_norm(x, gamma, beta, rm, rv, eval);
  for (std::size_t i = 0; i < 12; ++i)
    EXPECT_NEAR(y[i], (x[i] - rm[0]) / std::sqrt(rv[0] + 1e-5) * 1.7 - 0.3, 1e-12);

  BatchNormOptions frozen;
  frozen.update_running = false;
  const double keep_m = rm[0], keep_v = rv[0];
  (void)batch_norm(x, gamma, beta, rm, rv, frozen);
  EXPECT_EQ(rm[0], keep_m);
  EXPECT_EQ(rv[0], keep_v);
}

TEST(BatchNorm, MaskedStatisticsIgnorePadding) {
  std::mt19937_64 rng(8);
  const Tensor a = random_tensor(rng, {1, 2, 4, 3}, -1, 1, false);
  const Tensor b = random_tensor(rng, {1, 2, 6, 3}, -1, 1, false);
  const Tensor parts[] = {pad_crop(a, 2, 0, 6), b};
  const Tensor batch = concat(parts, 0);
  const std::size_t lengths[] = {4, 6};
  // Same statistics as BN over just the valid frames of both items.
  Tensor rm = Tensor::zeros({2}), rv = Tensor::full({2}, 1.0);
  const Tensor g = Tensor::full({2}, 1.0), z = Tensor::zeros({2});
  const Tensor y = batch_norm(batch, g, z, rm, rv, {}, lengths);
  for (std::size_t c = 0; c < 2; ++c) {
    double m = 0, n = 0;
    for (std::size_t t = 0; t < 4; ++t)
      for (std::size_t f = 0; f < 3; ++f, ++n) m += at4(a, 0, c, t, f);
    for (std::size_t t = 0; t < 6; ++t)
      for (std::size_t f = 0; f < 3; ++f, ++n) m += at4(b, 0, c, t, f);
    m /= n;
    double v = 0;
    for (std::size_t t = 0; t < 4; ++t)
      for (std::size_t f = 0; f < 3; ++f) v += std::pow(at4(a, 0, c, t, f) - m, 2);
    for (std::size_t t = 0; t < 6; ++t)
      for (std::size_t f = 0; f < 3; ++f) v += std::pow(at4(b, 0, c, t, f) - m, 2);
    v /= n;
    EXPECT_NEAR(at4(y, 0, c, 1, 2), (at4(a, 0, c, 1, 2) - m) / std::sqrt(v + 1e-5), 1e-12);
    EXPECT_NEAR(at4(y, 1, c, 5, 0), (at4(b, 0, c, 5, 0) - m) / std::sqrt(v + 1e-5), 1e-12);
  }
}

TEST(GlobalLayerNorm, NormalizesEachItem) {
  std::mt19937_64 rng(9);
  const Tensor x = random_tensor(rng, {2, 3, 4, 5}, -3, 7, false);
  const Tensor y = global_layer_norm(x, Tensor::full({3}, 1.0), Tensor::zeros({3}));
  for (std::size_t b = 0; b < 2; ++b) {
    double m = 0, v = 0;
    for (std::size_t i = 0; i < 60; ++i) m += y[b * 60 + i];
    m /= 60;
    for (std::size_t i = 0; i < 60; ++i) v += std::pow(y[b * 60 + i] - m, 2);
    v /= 60;
    EXPECT_NEAR(m, 0.0, 1e-6);
    EXPECT_NEAR(v, 1.0, 1e-6);
  }
  const Tensor c = global_layer_norm(Tensor::full({1, 2, 2, 2}, 3.0), Tensor::full({2}, 1.0),
                                     Tensor::zeros({2}));
  for (double v : c.data()) EXPECT_EQ(v, 0.0);
}

TEST(GlobalLayerNorm, MatchesLoopOracle) {
  std::mt19937_64 rng(10);
  const Tensor x = random_tensor(rng, {2, 3, 4, 5}, -1, 1, false);
  const Tensor g = random_tensor(rng, {3}, 0.5, 2, false);
  const Tensor be = random_tensor(rng, {3}, -1, 1, false);
  const Tensor y = global_layer_norm(x, g, be);
  for (std::size_t b = 0; b < 2; ++b) {
    double m = 0;
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t t = 0; t < 4; ++t)
        for (std::size_t f = 0; f < 5; ++f) m += at4(x, b, c, t, f);
    m /= 60;
    double v = 0;
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t t = 0; t < 4; ++t)
        for (std::size_t f = 0; f < 5; ++f) v += std::pow(at4(x, b, c, t, f) - m, 2);
    v /= 60;
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t t = 0; t < 4; ++t)
        for (std::size_t f = 0; f < 5; ++f)
          EXPECT_NEAR(at4(y, b, c, t, f),
                      (at4(x, b, c, t, f) - m) / std::sqrt(v + 1e-8) * g[c] + be[c], 1e-10);
  }
}

TEST(Linear, IdentityZeroAndOracle) {
  std::mt19937_64 rng(11);
  const Tensor x = random_tensor(rng, {2, 3, 4}, -1, 1, false);
  std::vector<double> eye(16, 0.0);
  for (std::size_t i = 0; i < 4; ++i) eye[i * 5] = 1.0;
  const Tensor id = linear(x, Tensor({4, 4}, eye), Tensor::zeros({4}));
  for (std::size_t i = 0; i < x.numel(); ++i) EXPECT_EQ(id[i], x[i]);

  const Tensor b = random_tensor(rng, {2}, -1, 1, false);
  const Tensor z = linear(x, Tensor::zeros({2, 4}), b);
  for (std::size_t i = 0; i < z.numel(); ++i) EXPECT_EQ(z[i], b[i % 2]);

  const Tensor w = random_tensor(rng, {2, 4}, -1, 1, false);
  const Tensor y = linear(x, w, b);
  ASSERT_EQ(y.shape(), (Shape{2, 3, 2}));
  for (std::size_t r = 0; r < 6; ++r)
    for (std::size_t o = 0; o < 2; ++o) {
      double acc = b[o];
      for (std::size_t i = 0; i < 4; ++i) acc += w[o * 4 + i] * x[r * 4 + i];
      EXPECT_NEAR(y[r * 2 + o], acc, 1e-14);
    }
}

double sig(double v) { return 1.0 / (1.0 + std::exp(-v)); }

TEST(Lstm, ZeroWeightsGiveZeroOutput) {
  const Tensor x = Tensor::full({2, 4, 3}, 0.7);
  const Tensor y = lstm(x, Tensor::zeros({8, 3}), Tensor::zeros({8, 2}), Tensor::zeros({8}),
                        Tensor::zeros({2, 2}), Tensor::zeros({2, 2}));
  ASSERT_EQ(y.shape(), (Shape{2, 4, 2}));
  for (double v : y.data()) EXPECT_EQ(v, 0.0);
}

TEST(Lstm, SingleStepMatchesHandFormula) {
  std::mt19937_64 rng(12);
  const std::size_t D = 3, H = 2;
  const Tensor x = random_tensor(rng, {1, 1, D}, -1, 1, false);
  const Tensor wi = random_tensor(rng, {4 * H, D}, -1, 1, false);
  const Tensor wh = random_tensor(rng, {4 * H, H}, -1, 1, false);
  const Tensor b = random_tensor(rng, {4 * H}, -1, 1, false);
  const Tensor h0 = random_tensor(rng, {1, H}, -1, 1, false);
  const Tensor c0 = random_tensor(rng, {1, H}, -1, 1, false);
  const Tensor y = lstm(x, wi, wh, b, h0, c0);
  for (std::size_t j = 0; j < H; ++j) {
    double g[4];
    for (std::size_t k = 0; k < 4; ++k) {
      const std::size_t row = k * H + j;
      g[k] = b[row];
      for (std::size_t d = 0; d < D; ++d) g[k] += wi[row * D + d] * x[d];
      for (std::size_t h = 0; h < H; ++h) g[k] += wh[row * H + h] * h0[h];
    }
    const double c = sig(g[1]) * c0[j] + sig(g[0]) * std::tanh(g[2]);
    EXPECT_NEAR(y[j], sig(g[3]) * std::tanh(c), 1e-14);
  }
}

TEST(Lstm, BiasOnlyRecurrenceMatchesScalarOracle) {
  // Zero input weights and zero recurrent weights: every unit follows
  // c_t = f c_{t-1} + i g, h_t = o tanh(c_t) with constant gates.
  const std::size_t H = 1, T = 6;
  const Tensor b({4}, {0.3, 1.0, 0.5, -0.2});
  const Tensor y = lstm(Tensor::zeros({1, T, 2}), Tensor::zeros({4, 2}), Tensor::zeros({4, H}),
                        b, Tensor::zeros({1, H}), Tensor::zeros({1, H}));
  double c = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    c = sig(1.0) * c + sig(0.3) * std::tanh(0.5);
    EXPECT_NEAR(y[t], sig(-0.2) * std::tanh(c), 1e-14) << t;
  }
  // Converges to the fixed point c* = i g / (1 - f).
  const double c_star = sig(0.3) * std::tanh(0.5) / (1.0 - sig(1.0));
  EXPECT_LT(std::abs(c - c_star), std::abs(c_star));
}

TEST(Backward, ProductRuleAndAccumulation) {
  Tensor x = Tensor::scalar(3.0, true), y = Tensor::scalar(-2.0, true);
  backward(x * y);
  EXPECT_EQ(x.grad()[0], -2.0);
  EXPECT_EQ(y.grad()[0], 3.0);
  backward(x * y);
  EXPECT_EQ(x.grad()[0], -4.0);
  EXPECT_EQ(y.grad()[0], 6.0);
}

TEST(Backward, TwiceAccumulatesExactlyDouble) {
  std::mt19937_64 rng(13);
  Tensor x = random_tensor(rng, {2, 2, 6, 5});
  Tensor w = random_tensor(rng, {3, 2, 2, 3});
  const Tensor r = random_tensor(rng, {2, 3, 5, 2}, -1, 1, false);
  auto loss = [&] { return sum(elu(conv2d(x, w, Tensor(), {{1, 2}, {0, 0}})) * r); };
  backward(loss());
  const std::vector<double> once(w.grad().begin(), w.grad().end());
  backward(loss());
  for (std::size_t i = 0; i < once.size(); ++i) EXPECT_EQ(w.grad()[i], 2.0 * once[i]);
}

TEST(Backward, RejectsNonScalarAndDetached) {
  Tensor x = Tensor::zeros({2}, true);
  EXPECT_THROW(backward(x * 2.0), ShapeError);
  EXPECT_THROW(backward(sum(Tensor::zeros({2}))), UsageError);
}

TEST(NoGrad, RecordsNoGraph) {
  Tensor x = Tensor::scalar(1.0, true);
  NoGradGuard guard;
  const Tensor y = x * 2.0;
  EXPECT_TRUE(y.is_leaf());
  EXPECT_FALSE(grad_enabled());
}

TEST(Determinism, ForwardIsRepeatable) {
  std::mt19937_64 rng(14);
  const Tensor x = random_tensor(rng, {2, 3, 8, 9}, -1, 1, false);
  Initializer init(5);
  Conv2dLayer conv(3, 4, 2, 3, {{1, 2}, {1, 0}}, init);
  const Tensor a = conv(x), b = conv(x);
  EXPECT_EQ(std::vector<double>(a.data().begin(), a.data().end()),
            std::vector<double>(b.data().begin(), b.data().end()));
}

// ---------------------------------------------------------------------------
// Finite-difference checks, three seeds and shapes per op.

struct GradCase {
  const char* name;
  std::function<void(std::mt19937_64&, std::size_t)> run;
};

void expect_fd(const std::function<Tensor()>& loss, std::vector<NamedInput> inputs,
               std::mt19937_64& rng, const std::string& label, std::size_t samples = 0) {
  const auto r = check_gradients(loss, std::move(inputs), rng, samples, kFdStep);
  EXPECT_LE(r.worst_relative_error, kFdTol) << label << " worst input " << r.worst_name;
  EXPECT_GT(r.checked, 0u);
}

Tensor away_from_zero(std::mt19937_64& rng, Shape shape) {
  Tensor t = random_tensor(rng, std::move(shape), 0.2, 1.5);
  std::bernoulli_distribution coin(0.5);
  for (auto& v : t.mutable_data())
    if (coin(rng)) v = -v;
  return t;
}

TEST(GradCheck, Elementwise) {
  for (std::uint64_t seed : kSeeds) {
    std::mt19937_64 rng(seed);
    const std::size_t n = 3 + seed % 5;
    Tensor a = away_from_zero(rng, {2, n}), b = away_from_zero(rng, {2, n});
    Tensor p = random_tensor(rng, {2, n}, 0.3, 2.0);
    const Tensor r = random_tensor(rng, {2, n}, -1, 1, false);
    const auto tag = "seed " + std::to_string(seed);
    expect_fd([&] { return sum((a + b) * r); }, {{"a", a}, {"b", b}}, rng, "add " + tag);
    expect_fd([&] { return sum((a - b) * r); }, {{"a", a}, {"b", b}}, rng, "sub " + tag);
    expect_fd([&] { return sum(a * b * r); }, {{"a", a}, {"b", b}}, rng, "mul " + tag);
    expect_fd([&] { return sum(div(a, b) * r); }, {{"a", a}, {"b", b}}, rng, "div " + tag);
    expect_fd([&] { return sum(scale(add_scalar(a, 0.3), -1.7) * r); }, {{"a", a}}, rng,
              "scale " + tag);
    expect_fd([&] { return sum(abs(a) * r); }, {{"a", a}}, rng, "abs " + tag);
    expect_fd([&] { return sum(sqrt(p) * r); }, {{"p", p}}, rng, "sqrt " + tag);
    expect_fd([&] { return sum(square(a) * r); }, {{"a", a}}, rng, "square " + tag);
    expect_fd([&] { return sum(clamp_min(a, 0.0) * r); }, {{"a", a}}, rng, "clamp " + tag);
    expect_fd([&] { return sum(elu(a) * r); }, {{"a", a}}, rng, "elu " + tag);
    expect_fd([&] { return sum(softplus(a) * r); }, {{"a", a}}, rng, "softplus " + tag);
    expect_fd([&] { return sum(sigmoid(a) * r); }, {{"a", a}}, rng, "sigmoid " + tag);
    expect_fd([&] { return sum(tanh(a) * r); }, {{"a", a}}, rng, "tanh " + tag);
    expect_fd([&] { return mean(a * r); }, {{"a", a}}, rng, "mean " + tag);
  }
}

TEST(GradCheck, LayoutAndReductions) {
  for (std::uint64_t seed : kSeeds) {
    std::mt19937_64 rng(seed);
    const std::size_t t = 3 + seed % 4, f = 2 + seed % 3;
    Tensor x = random_tensor(rng, {2, 3, t, f});
    Tensor y = random_tensor(rng, {2, 2, t, f});
    const auto tag = "seed " + std::to_string(seed);
    expect_fd([&, p = Probe(seed)]() mutable { return p(sum_per_item(x)); }, {{"x", x}}, rng, "sum_per_item " + tag);
    expect_fd([&, p = Probe(seed)]() mutable { return p(sum_channels(x)); }, {{"x", x}}, rng, "sum_channels " + tag);
    expect_fd([&, p = Probe(seed)]() mutable { return p(reshape(x, {2, 3 * t * f})); }, {{"x", x}}, rng,
              "reshape " + tag);
    expect_fd(
        [&, p = Probe(seed)]() mutable {
          const Tensor parts[] = {x, y};
          return p(concat(parts, 1));
        },
        {{"x", x}, {"y", y}}, rng, "concat " + tag);
    expect_fd([&, p = Probe(seed)]() mutable { return p(pad_crop(x, 2, 1, t + 2)); }, {{"x", x}}, rng,
              "pad " + tag);
    expect_fd([&, p = Probe(seed)]() mutable { return p(pad_crop(x, 3, -1, f - 1)); }, {{"x", x}}, rng,
              "crop " + tag);
    expect_fd([&, p = Probe(seed)]() mutable { return p(from_sequence(to_sequence(x) * 1.5, 3, f)); },
              {{"x", x}}, rng, "sequence " + tag);
    const std::size_t lengths[] = {t, t - 1};
    expect_fd([&, p = Probe(seed)]() mutable { return p(mask_time(x, lengths)); }, {{"x", x}}, rng,
              "mask " + tag);
    expect_fd([&, p = Probe(seed)]() mutable { return p(unit_normalize_pairs(y)); }, {{"y", y}}, rng,
              "unit_pairs " + tag);
  }
}

TEST(GradCheck, ConvolutionAndLinear) {
  for (std::uint64_t seed : kSeeds) {
    std::mt19937_64 rng(seed);
    const std::size_t c = 1 + seed % 3, t = 4 + seed % 3, f = 5 + seed % 4;
    const Conv2dOptions opts{{1, 1 + seed % 2}, {seed % 2, 1}};
    Tensor x = random_tensor(rng, {2, c, t, f});
    Tensor w = random_tensor(rng, {3, c, 2, 3});
    Tensor b = random_tensor(rng, {3});
    const auto tag = "seed " + std::to_string(seed);
    expect_fd([&, p = Probe(seed)]() mutable { return p(conv2d(x, w, b, opts)); },
              {{"x", x}, {"w", w}, {"b", b}}, rng, "conv2d " + tag);
    Tensor wd = random_tensor(rng, {c, 3, 2, 3});
    expect_fd([&, p = Probe(seed)]() mutable { return p(deconv2d(x, wd, b, opts)); },
              {{"x", x}, {"w", wd}, {"b", b}}, rng, "deconv2d " + tag);
    Tensor wl = random_tensor(rng, {4, f});
    Tensor bl = random_tensor(rng, {4});
    expect_fd([&, p = Probe(seed)]() mutable { return p(linear(x, wl, bl)); },
              {{"x", x}, {"w", wl}, {"b", bl}}, rng, "linear " + tag);
  }
}

TEST(GradCheck, Normalization) {
  for (std::uint64_t seed : kSeeds) {
    std::mt19937_64 rng(seed);
    const std::size_t c = 2 + seed % 2, t = 4 + seed % 3, f = 3;
    Tensor x = random_tensor(rng, {2, c, t, f});
    Tensor g = random_tensor(rng, {c}, 0.5, 1.5);
    Tensor b = random_tensor(rng, {c});
    Tensor rm = Tensor::zeros({c}), rv = Tensor::full({c}, 1.0);
    BatchNormOptions frozen;
    frozen.update_running = false;
    BatchNormOptions eval;
    eval.use_batch_stats = false;
    const std::size_t lengths[] = {t, t - 2};
    const auto tag = "seed " + std::to_string(seed);
    expect_fd([&, p = Probe(seed)]() mutable { return p(batch_norm(x, g, b, rm, rv, frozen)); },
              {{"x", x}, {"gamma", g}, {"beta", b}}, rng, "bn " + tag);
    expect_fd([&, p = Probe(seed)]() mutable { return p(batch_norm(x, g, b, rm, rv, frozen, lengths)); },
              {{"x", x}, {"gamma", g}, {"beta", b}}, rng, "bn masked " + tag);
    expect_fd([&, p = Probe(seed)]() mutable { return p(batch_norm(x, g, b, rm, rv, eval)); },
              {{"x", x}, {"gamma", g}, {"beta", b}}, rng, "bn eval " + tag);
    expect_fd([&, p = Probe(seed)]() mutable { return p(global_layer_norm(x, g, b)); },
              {{"x", x}, {"gamma", g}, {"beta", b}}, rng, "gln " + tag);
    expect_fd([&, p = Probe(seed)]() mutable { return p(global_layer_norm(x, g, b, 1e-8, lengths)); },
              {{"x", x}, {"gamma", g}, {"beta", b}}, rng, "gln masked " + tag);
  }
}

TEST(GradCheck, Lstm) {
  for (std::uint64_t seed : kSeeds) {
    std::mt19937_64 rng(seed);
    const std::size_t d = 2 + seed % 3, h = 2 + seed % 2, t = 3 + seed % 4;
    Tensor x = random_tensor(rng, {2, t, d});
    Tensor wi = random_tensor(rng, {4 * h, d});
    Tensor wh = random_tensor(rng, {4 * h, h});
    Tensor b = random_tensor(rng, {4 * h});
    Tensor h0 = random_tensor(rng, {2, h});
    Tensor c0 = random_tensor(rng, {2, h});
    expect_fd([&, p = Probe(seed)]() mutable { return p(lstm(x, wi, wh, b, h0, c0)); },
              {{"x", x}, {"w_ih", wi}, {"w_hh", wh}, {"bias", b}, {"h0", h0}, {"c0", c0}},
              rng, "lstm seed " + std::to_string(seed));
  }
}

TEST(Initializer, SeededAndBounded) {
  Initializer a(3), b(3);
  const Tensor x = a.uniform({40, 10}, 10), y = b.uniform({40, 10}, 10);
  EXPECT_EQ(std::vector<double>(x.data().begin(), x.data().end()),
            std::vector<double>(y.data().begin(), y.data().end()));
  for (double v : x.data()) EXPECT_LE(std::abs(v), std::sqrt(0.1));
}

TEST(Layers, LstmForgetBiasStartsAtOne) {
  Initializer init(1);
  LstmLayer cell(3, 4, init);
  for (std::size_t i = 4; i < 8; ++i) EXPECT_EQ(cell.bias[i], 1.0);
}

TEST(Checkpoint, RoundTripIsExact) {
  Initializer init(2);
  Conv2dLayer conv(2, 3, 2, 3, {}, init);
  BatchNorm2dLayer bn(3);
  bn.running_mean.mutable_data()[1] = 0.25;
  ParamList params;
  conv.collect("conv", params);
  bn.collect("bn", params);
  Checkpoint ckpt{"student", "{\"x\":1}", params};
  const auto path = std::filesystem::temp_directory_path() / "spatialkd_test_nn.ckpt";
  save_checkpoint(path, ckpt);
  const Checkpoint back = load_checkpoint(path);
  std::filesystem::remove(path);
  EXPECT_EQ(back.identity, "student");
  EXPECT_EQ(back.architecture, "{\"x\":1}");
  ASSERT_EQ(back.tensors.size(), params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    EXPECT_EQ(back.tensors[i].name, params[i].name);
    EXPECT_EQ(back.tensors[i].trainable, params[i].trainable);
    EXPECT_EQ(back.tensors[i].tensor.shape(), params[i].tensor.shape());
    for (std::size_t j = 0; j < params[i].tensor.numel(); ++j)
      EXPECT_EQ(back.tensors[i].tensor[j], params[i].tensor[j]);
  }
  EXPECT_EQ(serialize_checkpoint(back), serialize_checkpoint(ckpt));
  EXPECT_EQ(count_trainable(params), 3u * 2 * 2 * 3 + 3 + 3 + 3);
}

TEST(Checkpoint, RejectsCorruptFiles) {
  Checkpoint ckpt{"teacher", "{}", {}};
  std::string bytes = serialize_checkpoint(ckpt);
  EXPECT_THROW((void)deserialize_checkpoint(bytes.substr(0, 10)), DataError);
  bytes[0] = 'X';
  EXPECT_THROW((void)deserialize_checkpoint(bytes), DataError);
}

TEST(LoadState, NamesTheMissingTensor) {
  Initializer init(1);
  LinearLayer a(3, 2, init);
  ParamList target, source;
  a.collect("fc", target);
  try {
    load_state(target, source);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("fc."), std::string::npos) << e.what();
  }
}

}  // namespace
}  // namespace spatialkd::nn
