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
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "spatialkd/error.hpp"
#include "spatialkd/losses/losses.hpp"
#include "test_support.hpp"

namespace spatialkd::losses {
namespace {

using model::EncoderTaps;
using nn::Shape;
using nn::Tensor;
using testing::random_tensor;

Tensor unit_phase(std::mt19937_64& rng, std::size_t b, std::size_t t, std::size_t f,
                  bool requires_grad = false) {
  std::uniform_real_distribution<double> u(-3.14159, 3.14159);
  std::vector<double> v(b * 2 * t * f);
  const std::size_t plane = t * f;
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t k = 0; k < plane; ++k) {
      const double a = u(rng);
      v[i * 2 * plane + k] = std::cos(a);
      v[i * 2 * plane + plane + k] = std::sin(a);
    }
  return Tensor({b, 2, t, f}, std::move(v), requires_grad);
}

// Scalar double loop over valid bins, one item at a time.
double reconstruction_oracle(const Tensor& me, const Tensor& m, const Tensor& pe,
                             const Tensor& p, double alpha, MagnitudeLoss kind,
                             const std::vector<std::size_t>& lengths) {
  const std::size_t B = m.dim(0), T = m.dim(2), F = m.dim(3);
  double total = 0.0;
  for (std::size_t b = 0; b < B; ++b) {
    const std::size_t len = lengths.empty() ? T : lengths[b];
    double sq = 0.0, cos_term = 0.0;
    for (std::size_t t = 0; t < len; ++t)
      for (std::size_t f = 0; f < F; ++f) {
        const std::size_t i = (b * T + t) * F + f;
        const std::size_t c = (b * 2 * T + t) * F + f, s = c + T * F;
        sq += (me[i] - m[i]) * (me[i] - m[i]);
        cos_term += m[i] * (pe[c] * p[c] + pe[s] * p[s]);
      }
    const double count = static_cast<double>(len * F);
    const double mag = kind == MagnitudeLoss::kL2Norm ? std::sqrt(sq) : sq / count;
    total += mag - alpha * cos_term / count;
  }
  return total / static_cast<double>(B);
}

TEST(Names, RoundTripAndValidation) {
  EXPECT_EQ(magnitude_loss_from_string(to_string(MagnitudeLoss::kMse)), MagnitudeLoss::kMse);
  EXPECT_EQ(magnitude_loss_from_string("l2_norm"), MagnitudeLoss::kL2Norm);
  EXPECT_EQ(kd_form_from_string(to_string(KdForm::kSeparate)), KdForm::kSeparate);
  EXPECT_THROW(kd_form_from_string("both"), UsageError);
  LossWeights w;
  EXPECT_NO_THROW(w.validate());
  w.kd_eps = 0.0;
  EXPECT_THROW(w.validate(), UsageError);
  w = {};
  w.beta = -1.0;
  EXPECT_THROW(w.validate(), UsageError);
  w = {};
  w.alpha = std::numeric_limits<double>::infinity();
  EXPECT_THROW(w.validate(), UsageError);
}

TEST(Reconstruction, PerfectEstimateGivesNegativeMeanMagnitude) {
  std::mt19937_64 rng(1);
  const Tensor m = random_tensor(rng, {2, 1, 5, 7}, 0, 2, false);
  const Tensor p = unit_phase(rng, 2, 5, 7);
  const double got = reconstruction_loss(m, m, p, p, 1.0).item();
  double mean_m = 0.0;
  for (double v : m.data()) mean_m += v;
  mean_m /= static_cast<double>(m.numel());
  EXPECT_NEAR(got, -mean_m, 1e-12);

  const Tensor anti = nn::scale(p, -1.0);
  EXPECT_NEAR(reconstruction_loss(m, m, anti, p, 1.0).item(), mean_m, 1e-12);
}

TEST(Reconstruction, MatchesScalarLoopOracle) {
  std::mt19937_64 rng(2);
  for (auto kind : {MagnitudeLoss::kL2Norm, MagnitudeLoss::kMse}) {
    const Tensor me = random_tensor(rng, {1, 1, 3, 4}, 0, 1, false);
    const Tensor m = random_tensor(rng, {1, 1, 3, 4}, 0, 1, false);
    const Tensor pe = unit_phase(rng, 1, 3, 4), p = unit_phase(rng, 1, 3, 4);
    EXPECT_NEAR(reconstruction_loss(me, m, pe, p, 0.7, kind).item(),
                reconstruction_oracle(me, m, pe, p, 0.7, kind, {}), 1e-12);

    const Tensor me2 = random_tensor(rng, {3, 1, 6, 4}, 0, 1, false);
    const Tensor m2 = random_tensor(rng, {3, 1, 6, 4}, 0, 1, false);
    const Tensor pe2 = unit_phase(rng, 3, 6, 4), p2 = unit_phase(rng, 3, 6, 4);
    const std::vector<std::size_t> lengths{6, 2, 4};
    EXPECT_NEAR(reconstruction_loss(me2, m2, pe2, p2, 1.3, kind, lengths).item(),
                reconstruction_oracle(me2, m2, pe2, p2, 1.3, kind, lengths), 1e-12);
    EXPECT_NEAR(magnitude_loss(me2, m2, kind, lengths).item(),
                reconstruction_oracle(me2, m2, pe2, p2, 0.0, kind, lengths), 1e-12);
  }
}

TEST(Reconstruction, AlignedPhaseIsTheMinimizer) {
  std::mt19937_64 rng(3);
  const Tensor me = random_tensor(rng, {1, 1, 4, 5}, 0, 1, false);
  const Tensor m = random_tensor(rng, {1, 1, 4, 5}, 0, 1, false);
  const Tensor p = unit_phase(rng, 1, 4, 5);
  const double best = reconstruction_loss(me, m, p, p, 1.0).item();
  for (int trial = 0; trial < 50; ++trial) {
    const Tensor other = unit_phase(rng, 1, 4, 5);
    EXPECT_GT(reconstruction_loss(me, m, other, p, 1.0).item(), best);
  }
}

TEST(Reconstruction, PaddedItemMatchesSolo) {
  std::mt19937_64 rng(4);
  const Tensor me = random_tensor(rng, {1, 1, 10, 3}, 0, 1, false);
  const Tensor m = random_tensor(rng, {1, 1, 10, 3}, 0, 1, false);
  const Tensor pe = unit_phase(rng, 1, 10, 3), p = unit_phase(rng, 1, 10, 3);
  const double solo = reconstruction_loss(me, m, pe, p, 1.0).item();
  // Garbage in the padded tail must not count.
  auto pad = [&](const Tensor& x) {
    Tensor y = nn::pad_crop(x, 2, 0, 25);
    for (std::size_t c = 0; c < y.dim(1); ++c)
      for (std::size_t t = 10; t < 25; ++t)
        for (std::size_t f = 0; f < 3; ++f) y.mutable_data()[(c * 25 + t) * 3 + f] = 0.5;
    return y;
  };
  const std::size_t lengths[] = {10};
  EXPECT_NEAR(reconstruction_loss(pad(me), pad(m), pad(pe), pad(p), 1.0,
                                  MagnitudeLoss::kL2Norm, lengths)
                  .item(),
              solo, 1e-13);
}

TEST(Reconstruction, RejectsBadInputs) {
  const Tensor m = Tensor::full({1, 1, 2, 2}, 1.0);
  const Tensor p = nn::unit_normalize_pairs(Tensor::full({1, 2, 2, 2}, 1.0));
  EXPECT_THROW(reconstruction_loss(m, Tensor::zeros({1, 1, 2, 3}), p, p, 1.0), ShapeError);
  EXPECT_THROW(reconstruction_loss(m, m, Tensor::zeros({1, 2, 3, 2}), p, 1.0), ShapeError);
  Tensor bad = m.clone();
  bad.mutable_data()[1] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(reconstruction_loss(bad, m, p, p, 1.0), NumericError);
}

EncoderTaps random_taps(std::mt19937_64& rng, std::size_t b, double lo = -1, double hi = 1,
                        bool requires_grad = false) {
  EncoderTaps taps;
  const std::size_t c[] = {2, 3, 3, 4, 4}, f[] = {9, 4, 3, 2, 1};
  for (std::size_t i = 0; i < 5; ++i) {
    taps.left.push_back(random_tensor(rng, {b, c[i], 3, f[i]}, lo, hi, requires_grad));
    taps.right.push_back(random_tensor(rng, {b, c[i], 3, f[i]}, lo, hi, requires_grad));
  }
  return taps;
}

double kd_oracle(const EncoderTaps& s, const EncoderTaps& o, KdForm form) {
  const std::size_t B = s.left[0].dim(0);
  double total = 0.0;
  for (std::size_t i = 0; i < 5; ++i) {
    const std::size_t n = s.left[i].numel();
    for (std::size_t k = 0; k < n; ++k) {
      const double dl = s.left[i][k] - o.left[i][k];
      const double dr = s.right[i][k] - o.right[i][k];
      total += form == KdForm::kLiteral ? std::abs(dl + dr) : std::abs(dl) + std::abs(dr);
    }
  }
  return total / static_cast<double>(B);
}

TEST(KdLoss, ZeroForIdenticalTaps) {
  std::mt19937_64 rng(5);
  const EncoderTaps t = random_taps(rng, 2);
  EXPECT_EQ(kd_loss(t, t).item(), 0.0);
  EXPECT_EQ(kd_loss(t, t, KdForm::kSeparate).item(), 0.0);
}

TEST(KdLoss, OppositeDifferencesCancelInLiteralForm) {
  std::mt19937_64 rng(6);
  const EncoderTaps o = random_taps(rng, 1);
  EncoderTaps s;
  for (std::size_t i = 0; i < 5; ++i) {
    s.left.push_back(nn::add_scalar(o.left[i], 0.25));
    s.right.push_back(nn::add_scalar(o.right[i], -0.25));
  }
  EXPECT_NEAR(kd_loss(s, o).item(), 0.0, 1e-12);
  EXPECT_GT(kd_loss(s, o, KdForm::kSeparate).item(), 1.0);
}

TEST(KdLoss, MatchesElementwiseOracle) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 3; ++trial) {
    const EncoderTaps s = random_taps(rng, 2), o = random_taps(rng, 2);
    for (auto form : {KdForm::kLiteral, KdForm::kSeparate}) {
      const double got = kd_loss(s, o, form).item();
      EXPECT_NEAR(got, kd_oracle(s, o, form), 1e-12);
      EXPECT_GE(got, 0.0);
    }
  }
}

TEST(KdLoss, HomogeneousInTheDifference) {
  std::mt19937_64 rng(8);
  const EncoderTaps d = random_taps(rng, 1);
  EncoderTaps zero, d2;
  for (std::size_t i = 0; i < 5; ++i) {
    zero.left.push_back(Tensor::zeros(d.left[i].shape()));
    zero.right.push_back(Tensor::zeros(d.right[i].shape()));
    d2.left.push_back(nn::scale(d.left[i], 2.0));
    d2.right.push_back(nn::scale(d.right[i], 2.0));
  }
  EXPECT_EQ(kd_loss(d2, zero).item(), 2.0 * kd_loss(d, zero).item());
}

TEST(KdLoss, MaskedFramesDoNotCount) {
  std::mt19937_64 rng(9);
  const EncoderTaps s = random_taps(rng, 2), o = random_taps(rng, 2);
  const std::size_t all[] = {3, 3};
  EXPECT_NEAR(kd_loss(s, o, KdForm::kLiteral, all).item(), kd_loss(s, o).item(), 1e-15);
  const std::size_t part[] = {3, 1};
  EXPECT_LT(kd_loss(s, o, KdForm::kLiteral, part).item(), kd_loss(s, o).item());
}

TEST(KdLoss, StageMismatchIsNamed) {
  std::mt19937_64 rng(10);
  const EncoderTaps s = random_taps(rng, 1);
  EncoderTaps o = random_taps(rng, 1);
  o.right[3] = Tensor::zeros({1, 4, 4, 2});
  try {
    (void)kd_loss(s, o);
    FAIL();
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("stage 4"), std::string::npos) << e.what();
  }
}

TEST(KdTotal, Arithmetic) {
  EXPECT_EQ(kd_total(Tensor::scalar(2.0), Tensor::scalar(4.0), 1e-8).item(), 0.5);
  EXPECT_EQ(kd_total(Tensor::scalar(0.0), Tensor::scalar(3.0), 1e-8).item(), 0.0);
  const double floored = kd_total(Tensor::scalar(2.0), Tensor::scalar(0.0), 1e-8).item();
  EXPECT_TRUE(std::isfinite(floored));
  EXPECT_EQ(floored, 2.0 / 1e-8);
  EXPECT_THROW(kd_total(Tensor::scalar(-1.0), Tensor::scalar(1.0), 1e-8), DataError);
  EXPECT_THROW(kd_total(Tensor::scalar(1.0), Tensor::scalar(-1.0), 1e-8), DataError);
  EXPECT_THROW(kd_total(Tensor::zeros({2}), Tensor::scalar(1.0), 1e-8), ShapeError);
}

TEST(TotalLoss, Arithmetic) {
  EXPECT_NEAR(total_loss(Tensor::scalar(1.0), Tensor::scalar(0.5), 0.1).item(), 1.05, 1e-15);
  EXPECT_EQ(total_loss(Tensor::scalar(1.25), Tensor::scalar(7.0), 0.0).item(), 1.25);
}

// ---------------------------------------------------------------------------
// Finite differences, inputs kept away from the L1/L2 kinks.

class LossGradient : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(LossGradient, Reconstruction) {
  std::mt19937_64 rng(GetParam());
  for (auto kind : {MagnitudeLoss::kL2Norm, MagnitudeLoss::kMse}) {
    Tensor me = random_tensor(rng, {2, 1, 4, 3}, 0.1, 1);
    const Tensor m = random_tensor(rng, {2, 1, 4, 3}, 1.2, 2, false);
    Tensor pe = unit_phase(rng, 2, 4, 3, true);
    const Tensor p = unit_phase(rng, 2, 4, 3);
    const std::size_t lengths[] = {4, 3};
    const auto r = testing::check_gradients(
        [&] { return reconstruction_loss(me, m, pe, p, 0.8, kind, lengths); },
        {{"mag_est", me}, {"phase_est", pe}}, rng, 0, 1e-5);
    EXPECT_LE(r.worst_relative_error, 1e-4) << r.worst_name;
  }
}

TEST_P(LossGradient, KdLossBothForms) {
  std::mt19937_64 rng(GetParam());
  const EncoderTaps o = random_taps(rng, 2);
  EncoderTaps s = random_taps(rng, 2, 0.0, 1.0, true);
  // Offset the student so every difference stays clear of zero.
  std::bernoulli_distribution coin(0.5);
  for (auto* side : {&s.left, &s.right})
    for (std::size_t i = 0; i < 5; ++i) {
      auto v = (*side)[i].mutable_data();
      const double sign = side == &s.left ? 1.0 : (coin(rng) ? 1.0 : -1.0);
      const auto& other = side == &s.left ? o.left[i] : o.right[i];
      for (std::size_t k = 0; k < v.size(); ++k) v[k] = other[k] + sign * (0.2 + v[k]);
    }
  std::vector<testing::NamedInput> inputs;
  for (std::size_t i = 0; i < 5; ++i) {
    inputs.push_back({"left" + std::to_string(i), s.left[i]});
    inputs.push_back({"right" + std::to_string(i), s.right[i]});
  }
  const auto r = testing::check_gradients([&] { return kd_loss(s, o, KdForm::kSeparate); },
                                          inputs, rng, 0, 1e-5);
  EXPECT_LE(r.worst_relative_error, 1e-4) << r.worst_name;
  // The literal form has a kink wherever dl + dr = 0; the offsets above keep
  // same-sign pairs away from it, so only test it when every pair agrees.
  for (std::size_t i = 0; i < 5; ++i) {
    auto v = s.right[i].mutable_data();
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = o.right[i][k] + std::abs(v[k] - o.right[i][k]);
  }
  const auto lit = testing::check_gradients([&] { return kd_loss(s, o); }, inputs, rng, 0,
                                            1e-5);
  EXPECT_LE(lit.worst_relative_error, 1e-4) << lit.worst_name;
}

TEST_P(LossGradient, KdTotalAndTotal) {
  std::mt19937_64 rng(GetParam());
  Tensor ts = random_tensor(rng, {}, 0.5, 2);
  Tensor bs = random_tensor(rng, {}, 0.5, 2);
  Tensor rl = random_tensor(rng, {}, -1, 1);
  const auto r = testing::check_gradients(
      [&] { return total_loss(rl, kd_total(ts, bs, 1e-8), 0.3); },
      {{"l_rl", rl}, {"l_ts", ts}, {"l_bs", bs}}, rng, 0, 1e-5);
  EXPECT_LE(r.worst_relative_error, 1e-4) << r.worst_name;
}

INSTANTIATE_TEST_SUITE_P(Seeds, LossGradient, ::testing::Values(101u, 202u, 303u));

}  // namespace
}  // namespace spatialkd::losses
