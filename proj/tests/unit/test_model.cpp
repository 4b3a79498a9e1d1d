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
#include <random>

#include <gtest/gtest.h>

#include "spatialkd/datasim/mixing.hpp"
#include "spatialkd/datasim/synth.hpp"
#include "spatialkd/error.hpp"
#include "spatialkd/losses/losses.hpp"
#include "spatialkd/metrics/complexity.hpp"
#include "spatialkd/metrics/si_sdr.hpp"
#include "spatialkd/model/networks.hpp"
#include "test_support.hpp"

namespace spatialkd::model {
namespace {

using nn::NormMode;
using nn::Shape;
using nn::Tensor;
using testing::random_tensor;

// 128-point toy STFT: 65 bins.
audio::StftConfig toy_stft() {
  return audio::StftConfig(audio::WindowKind::kSqrtHann, 128, 64, 128);
}

ModelConfig tiny() { return make_preset("tiny", 65); }

Tensor random_phase(std::mt19937_64& rng, std::size_t b, std::size_t t, std::size_t f) {
  return nn::unit_normalize_pairs(random_tensor(rng, {b, 2, t, f}, -1, 1, false));
}

std::vector<double> values(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

TEST(ModelConfig, StageBinsAndValidation) {
  EXPECT_EQ(tiny().stage_bins(), (std::vector<std::size_t>{32, 15, 7, 3, 1}));
  EXPECT_EQ(make_preset("paper-shape", 161).stage_bins(),
            (std::vector<std::size_t>{80, 39, 19, 9, 4}));
  EXPECT_EQ(tiny().lstm_hidden(), 2u * 16 * 1);
  EXPECT_EQ(make_preset("paper-shape", 161).lstm_hidden(), 2u * 80 * 4);
  EXPECT_EQ(tiny().min_frames(), 25u);
  EXPECT_THROW(make_preset("huge", 65), UsageError);
  ModelConfig bad = tiny();
  bad.encoder_channels = {4, 8};
  EXPECT_THROW(bad.validate(), UsageError);
  bad = tiny();
  bad.freq_bins = 9;  // collapses before the fifth stage
  EXPECT_THROW(bad.validate(), UsageError);
  bad = tiny();
  bad.phase_channels = 3;
  EXPECT_THROW(bad.validate(), UsageError);
  EXPECT_EQ(model_config_from_json(to_json(tiny())), tiny());
}

TEST(Network, ConstructionChecksBinCount) {
  EXPECT_THROW(Network(ModelRole::kStudent, tiny(), audio::StftConfig(), 1), UsageError);
}

TEST(Network, EnhanceShapesAndRanges) {
  std::mt19937_64 rng(1);
  Network net(ModelRole::kStudent, tiny(), toy_stft(), 3);
  const Tensor mag = random_tensor(rng, {2, 1, 30, 65}, 0, 2, false);
  const Tensor ph = random_phase(rng, 2, 30, 65);
  const EnhancerOutput out = net.enhance(mag, ph, NormMode::kTrain);
  EXPECT_EQ(out.magnitude.shape(), (Shape{2, 1, 30, 65}));
  EXPECT_EQ(out.phase.shape(), (Shape{2, 2, 30, 65}));
  for (double v : out.magnitude.data()) EXPECT_GE(v, 0.0);
  const std::size_t plane = 30 * 65;
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t i = 0; i < plane; ++i) {
      const double c = out.phase[b * 2 * plane + i], s = out.phase[b * 2 * plane + plane + i];
      EXPECT_NEAR(c * c + s * s, 1.0, 1e-6);
    }
}

// Stage i of the encoder maps [B, C_{i-1}, T, F_{i-1}] to [B, C_i, T, F_i]
// with F_i = floor((F_{i-1} - 3) / 2) + 1 and T kept by causal front padding.
TEST(Network, TapShapeTable) {
  struct Row {
    const char* preset;
    std::size_t bins;
    std::vector<Shape> shapes;
  };
  const std::size_t T = 26;
  const std::vector<Row> table = {
      {"tiny", 65, {{1, 4, T, 32}, {1, 8, T, 15}, {1, 8, T, 7}, {1, 16, T, 3}, {1, 16, T, 1}}},
      {"paper-shape",
       161,
       {{1, 16, T, 80}, {1, 32, T, 39}, {1, 48, T, 19}, {1, 64, T, 9}, {1, 80, T, 4}}},
  };
  for (const auto& row : table) {
    const ModelConfig cfg = make_preset(row.preset, row.bins);
    const audio::StftConfig stft = row.bins == 65 ? toy_stft() : audio::StftConfig();
    Network student(ModelRole::kStudent, cfg, stft, 1);
    Network teacher(ModelRole::kTeacher, cfg, stft, 2);
    const Tensor mag = Tensor::full({1, 1, T, row.bins}, 0.5);
    const Tensor ph = nn::unit_normalize_pairs(Tensor::full({1, 2, T, row.bins}, 1.0));
    nn::NoGradGuard no_grad;
    const auto s = student.enhance(mag, ph, NormMode::kEval).taps;
    const auto t = teacher.binaural(mag, mag, NormMode::kEval).taps;
    ASSERT_EQ(s.left.size(), 5u);
    ASSERT_EQ(s.right.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) {
      EXPECT_EQ(s.left[i].shape(), row.shapes[i]) << row.preset << " stage " << i + 1;
      EXPECT_EQ(s.right[i].shape(), row.shapes[i]);
      EXPECT_EQ(t.left[i].shape(), row.shapes[i]);
      EXPECT_EQ(t.right[i].shape(), row.shapes[i]);
    }
    EXPECT_NO_THROW(check_tap_shapes(s, t));
  }
}

TEST(Network, TapShapeMismatchNamesStage) {
  std::mt19937_64 rng(2);
  EncoderTaps a, b;
  for (std::size_t i = 0; i < 5; ++i) {
    a.left.push_back(Tensor::zeros({1, 2, 3, 4}));
    a.right.push_back(Tensor::zeros({1, 2, 3, 4}));
    b.left.push_back(Tensor::zeros({1, 2, 3, i == 2 ? 5u : 4u}));
    b.right.push_back(Tensor::zeros({1, 2, 3, 4}));
  }
  try {
    check_tap_shapes(a, b);
    FAIL();
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("stage 3"), std::string::npos) << e.what();
  }
}

TEST(Network, ZeroResidualKeepsNoisyPhase) {
  std::mt19937_64 rng(3);
  Network net(ModelRole::kStudent, tiny(), toy_stft(), 4);
  auto& proj = net.phase_net().residual_projection();
  for (auto& v : proj.weight.mutable_data()) v = 0.0;
  for (auto& v : proj.bias.mutable_data()) v = 0.0;
  const Tensor mag = random_tensor(rng, {1, 1, 25, 65}, 0, 1, false);
  const Tensor ph = random_phase(rng, 1, 25, 65);
  nn::NoGradGuard no_grad;
  const Tensor out = net.enhance(mag, ph, NormMode::kEval).phase;
  for (std::size_t i = 0; i < ph.numel(); ++i) EXPECT_NEAR(out[i], ph[i], 1e-15);
}

TEST(Network, TeacherEncodersHaveIndependentWeights) {
  std::mt19937_64 rng(4);
  Network teacher(ModelRole::kTeacher, tiny(), toy_stft(), 5);
  EXPECT_FALSE(teacher.has_phase_net());
  const Tensor mag = random_tensor(rng, {1, 1, 25, 65}, 0, 1, false);
  nn::NoGradGuard no_grad;
  const auto out = teacher.binaural(mag, mag, NormMode::kEval);
  EXPECT_EQ(out.magnitude.shape(), (Shape{1, 1, 25, 65}));
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NE(values(out.taps.left[i]), values(out.taps.right[i]));
  EXPECT_THROW(teacher.enhance(mag, Tensor::zeros({1, 2, 25, 65}), NormMode::kEval),
               UsageError);
  EXPECT_THROW(teacher.binaural(mag, Tensor::zeros({1, 1, 26, 65}), NormMode::kEval),
               ShapeError);
}

TEST(Network, ShortInputAsksForPadding) {
  Network net(ModelRole::kStudent, tiny(), toy_stft(), 1);
  try {
    (void)net.enhance(Tensor::zeros({1, 1, 24, 65}), Tensor::zeros({1, 2, 24, 65}),
                      NormMode::kEval);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("pad"), std::string::npos) << e.what();
  }
}

TEST(Network, SameSeedSameInitAcrossRoles) {
  Network a(ModelRole::kStudent, tiny(), toy_stft(), 9);
  Network b(ModelRole::kBadStudent, tiny(), toy_stft(), 9);
  Network c(ModelRole::kStudent, tiny(), toy_stft(), 10);
  const auto sa = a.state(), sb = b.state(), sc = c.state();
  ASSERT_EQ(sa.size(), sb.size());
  bool any_diff = false;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    EXPECT_EQ(sa[i].name, sb[i].name);
    EXPECT_EQ(values(sa[i].tensor), values(sb[i].tensor)) << sa[i].name;
    any_diff = any_diff || values(sa[i].tensor) != values(sc[i].tensor);
  }
  EXPECT_TRUE(any_diff);
}

// Eval mode (running statistics): zero-padding in time with the matching
// length mask leaves every valid frame unchanged.
TEST(Network, PaddingDoesNotChangeValidFrames) {
  std::mt19937_64 rng(5);
  Network net(ModelRole::kStudent, tiny(), toy_stft(), 6);
  const std::size_t T = 27;
  const Tensor mag = random_tensor(rng, {1, 1, T, 65}, 0, 1, false);
  const Tensor ph = random_phase(rng, 1, T, 65);
  nn::NoGradGuard no_grad;
  const EnhancerOutput solo = net.enhance(mag, ph, NormMode::kEval);
  const std::size_t lengths[] = {T};
  const EnhancerOutput padded =
      net.enhance(nn::pad_crop(mag, 2, 0, T + 9), nn::pad_crop(ph, 2, 0, T + 9),
                  NormMode::kEval, lengths);
  const Tensor pm = nn::pad_crop(padded.magnitude, 2, 0, T);
  const Tensor pp = nn::pad_crop(padded.phase, 2, 0, T);
  for (std::size_t i = 0; i < pm.numel(); ++i) EXPECT_NEAR(pm[i], solo.magnitude[i], 1e-12);
  for (std::size_t i = 0; i < pp.numel(); ++i) EXPECT_NEAR(pp[i], solo.phase[i], 1e-12);
}

TEST(Network, CheckpointRoundTripReproducesOutputs) {
  std::mt19937_64 rng(6);
  Network net(ModelRole::kBadStudent, tiny(), toy_stft(), 7);
  // Move the running statistics away from their defaults.
  (void)net.enhance(random_tensor(rng, {2, 1, 25, 65}, 0, 1, false),
                    random_phase(rng, 2, 25, 65), NormMode::kTrain);
  const std::string bytes = nn::serialize_checkpoint(net.to_checkpoint());
  Network back = Network::from_checkpoint(nn::deserialize_checkpoint(bytes));
  EXPECT_EQ(back.role(), ModelRole::kBadStudent);
  EXPECT_EQ(back.config(), net.config());
  EXPECT_EQ(back.stft(), net.stft());
  EXPECT_EQ(nn::serialize_checkpoint(back.to_checkpoint()), bytes);
  const Tensor mag = random_tensor(rng, {1, 1, 25, 65}, 0, 1, false);
  const Tensor ph = random_phase(rng, 1, 25, 65);
  nn::NoGradGuard no_grad;
  EXPECT_EQ(values(net.enhance(mag, ph, NormMode::kEval).magnitude),
            values(back.enhance(mag, ph, NormMode::kEval).magnitude));
}

// Layer-by-layer count for the tiny preset at 65 bins. Convolutions carry a
// bias; batch norm has gamma and beta per channel; the LSTM has one bias.
//
// Encoder (per side), kernel 2x3:
//   1->4: 24+4+8 = 36     4->8: 192+8+16 = 216    8->8: 384+8+16 = 408
//   8->16: 768+16+32 = 816     16->16: 1536+16+32 = 1584      sum 3060
// LSTM, H = 2*16*1 = 32, two layers: 2 * (2*128*32 + 128) = 16640
// Decoder (input = previous + skip):
//   48->16: 4608+16+32 = 4656    32->8: 1536+8+16 = 1560
//   16->8: 768+8+16 = 792        16->4: 384+4+8 = 396     8->1: 48+1 = 49
//   sum 7453
// Magnitude network: 2*3060 + 16640 + 7453 = 30213
// Phase network, 4 channels: projections 1->2 (4) and 2->2 (6);
//   3 blocks of 4->4 5x3 (244) and 4->4 25x1 (404) = 1944; gLN 8;
//   residual 4->2 (10). Sum 1972.
TEST(Network, TinyParameterCountMatchesHandCount) {
  Network teacher(ModelRole::kTeacher, tiny(), toy_stft(), 1);
  Network student(ModelRole::kStudent, tiny(), toy_stft(), 1);
  EXPECT_EQ(metrics::count_params(teacher), 30213u);
  EXPECT_EQ(metrics::count_params(student), 30213u + 1972u);
  EXPECT_EQ(nn::count_trainable(student.state()), 32185u);
}

TEST(Reconstruct, RoundTripAndSilence) {
  std::mt19937_64 rng(7);
  const audio::StftConfig cfg = toy_stft();
  audio::Waveform x;
  std::normal_distribution<double> g(0, 0.2);
  for (int i = 0; i < 4000; ++i) x.samples.push_back(g(rng));
  const auto s = audio::stft(x, cfg);
  const auto y = reconstruct(s.magnitude_plane(), s.phase_plane(), s.frames(), cfg, 16000.0);
  const auto r = audio::cola_interior(cfg, x.size());
  double num = 0, den = 0;
  for (std::size_t i = r.begin; i < r.end; ++i) {
    num += std::pow(y.samples[i] - x.samples[i], 2);
    den += x.samples[i] * x.samples[i];
  }
  EXPECT_LE(std::sqrt(num / den), 1e-6);
  const auto z = reconstruct(std::vector<double>(s.magnitude_plane().size(), 0.0),
                             s.phase_plane(), s.frames(), cfg, 16000.0);
  for (double v : z.samples) EXPECT_EQ(v, 0.0);
}

TEST(Reconstruct, CleanMagnitudeWithNoisyPhaseBeatsNoisyInput) {
  datasim::SynthConfig cfg;
  datasim::MixtureSpec spec{-25.0, 0.0, 77, ""};
  const auto rec = datasim::make_record(cfg, spec);
  const audio::StftConfig stft;
  const auto clean = audio::stft(rec.clean, stft), noisy = audio::stft(rec.mono, stft);
  auto y = reconstruct(clean.magnitude_plane(), noisy.phase_plane(), clean.frames(), stft,
                       16000.0);
  y.samples.resize(rec.clean.size(), 0.0);
  const double before = metrics::si_sdr(rec.clean.samples, rec.mono.samples);
  const double after = metrics::si_sdr(rec.clean.samples, y.samples);
  EXPECT_GT(after, before);
}

TEST(Helpers, EnhanceWaveformKeepsLengthAndIsDeterministic) {
  std::mt19937_64 rng(8);
  Network net(ModelRole::kStudent, tiny(), toy_stft(), 2);
  audio::Waveform w;
  std::normal_distribution<double> g(0, 0.1);
  for (int i = 0; i < 900; ++i) w.samples.push_back(g(rng));  // 13 frames, padded inside
  const auto a = enhance_waveform(net, w), b = enhance_waveform(net, w);
  EXPECT_EQ(a.size(), w.size());
  EXPECT_EQ(a.samples, b.samples);
  const auto est = enhance_spectrogram(net, audio::stft(w, net.stft()));
  EXPECT_EQ(est.frames, 13u);
  EXPECT_EQ(est.taps.left[0].dim(2), 13u);

  Network teacher(ModelRole::kTeacher, tiny(), toy_stft(), 2);
  EXPECT_EQ(teacher_waveform(teacher, w, w, w).size(), w.size());
}

// End-to-end finite differences on both sub-modules of the tiny preset.
//
// A bias feeding straight into batch-statistics normalization usually
// cancels out, so its true gradient is zero and a relative error is meaningless there.
// Those tensors are checked in absolute terms instead.
bool cancelled_by_norm(const std::string& name) {
  const bool enc = name.find(".enc_") != std::string::npos &&
                   name.ends_with(".conv.bias");
  const bool dec = name.find(".dec.") != std::string::npos &&
                   name.ends_with(".deconv.bias") &&
                   name.find(".dec.0.") == std::string::npos;
  return enc || dec;
}

std::vector<testing::NamedInput> model_inputs(const Network& net) {
  std::vector<testing::NamedInput> inputs;
  for (const auto& p : net.state())
    if (p.trainable) inputs.push_back({p.name, p.tensor, cancelled_by_norm(p.name)});
  return inputs;
}

void expect_gradients_match(const testing::GradCheckResult& r) {
  EXPECT_LE(r.worst_relative_error, 1e-4) << r.worst_name;
  std::size_t vanished = 0;
  for (const auto& t : r.per_tensor) {
    if (!cancelled_by_norm(t.name)) continue;
    // Zero-padding in frequency ahead of the norm can keep a bias alive; then
    // the ordinary relative check applies.
    if (t.relative_error <= 1e-4 && t.analytic_norm > 1e-6) continue;
    ++vanished;
    EXPECT_LE(t.analytic_norm, 1e-9) << t.name;
    EXPECT_LE(t.numeric_norm, 1e-6) << t.name;
  }
  EXPECT_GT(vanished, 0u);
}

class EndToEndGradient : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(EndToEndGradient, StudentLossMatchesFiniteDifferences) {
  const std::uint64_t seed = GetParam();
  std::mt19937_64 rng(seed);
  Network net(ModelRole::kStudent, tiny(), toy_stft(), seed);
  const Tensor mag = random_tensor(rng, {2, 1, 25, 65}, 0.1, 1, false);
  const Tensor ph = random_phase(rng, 2, 25, 65);
  const Tensor clean = random_tensor(rng, {2, 1, 25, 65}, 0.1, 1, false);
  const Tensor clean_ph = random_phase(rng, 2, 25, 65);
  const std::size_t lengths[] = {25, 22};
  auto loss = [&] {
    const auto out = net.enhance(mag, ph, NormMode::kFrozenBatch, lengths);
    return losses::reconstruction_loss(out.magnitude, clean, out.phase, clean_ph, 1.0,
                                       losses::MagnitudeLoss::kL2Norm, lengths);
  };
  const auto r = testing::check_gradients(loss, model_inputs(net), rng, 6, 1e-5);
  expect_gradients_match(r);
  EXPECT_GT(r.checked, 200u);
}

TEST_P(EndToEndGradient, TeacherLossMatchesFiniteDifferences) {
  const std::uint64_t seed = GetParam();
  std::mt19937_64 rng(seed);
  Network net(ModelRole::kTeacher, tiny(), toy_stft(), seed);
  const Tensor l = random_tensor(rng, {2, 1, 25, 65}, 0.1, 1, false);
  const Tensor r = random_tensor(rng, {2, 1, 25, 65}, 0.1, 1, false);
  const Tensor clean = random_tensor(rng, {2, 1, 25, 65}, 0.1, 1, false);
  auto loss = [&] {
    return losses::magnitude_loss(net.binaural(l, r, NormMode::kFrozenBatch).magnitude, clean);
  };
  expect_gradients_match(testing::check_gradients(loss, model_inputs(net), rng, 6, 1e-5));
}

INSTANTIATE_TEST_SUITE_P(Seeds, EndToEndGradient, ::testing::Values(1u, 2u, 3u));

}  // namespace
}  // namespace spatialkd::model
