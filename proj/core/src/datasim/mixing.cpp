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

#include "spatialkd/datasim/mixing.hpp"

#include <cmath>

#include <fmt/format.h>

#include "spatialkd/error.hpp"

namespace spatialkd::datasim {

double power(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc / static_cast<double>(x.size());
}

double rms(std::span<const double> x) { return std::sqrt(power(x)); }

double snr_db(std::span<const double> speech, std::span<const double> noise) {
  return 10.0 * std::log10(power(speech) / power(noise));
}

namespace {

void check_same_length(const audio::Waveform& a, const audio::Waveform& b,
                       const char* what) {
  if (a.size() != b.size())
    throw ShapeError(fmt::format("{}: speech has {} samples, noise has {}", what,
                                 a.size(), b.size()));
  if (a.sample_rate != b.sample_rate)
    throw DataError(fmt::format("{}: sample rates differ ({} vs {})", what,
                                a.sample_rate, b.sample_rate));
}

audio::Waveform scaled(const audio::Waveform& x, double gain) {
  audio::Waveform out{x.samples, x.sample_rate};
  for (double& v : out.samples) v *= gain;
  return out;
}

}  // namespace

audio::Waveform scale_clean(const audio::Waveform& x, double epsilon_db) {
  const double sigma = rms(x.samples);
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw DataError("scale_clean: clean signal is silent or non-finite");
  return scaled(x, std::pow(10.0, epsilon_db / 20.0) / sigma);
}

audio::Waveform scale_noise(const audio::Waveform& v, const audio::Waveform& x_hat,
                            double snr) {
  check_same_length(x_hat, v, "scale_noise");
  const double pv = power(v.samples);
  if (!(pv > 0.0) || !std::isfinite(pv))
    throw DataError("scale_noise: noise signal is silent or non-finite");
  const double px = power(x_hat.samples);
  return scaled(v, std::sqrt(px / (pv * std::pow(10.0, snr / 10.0))));
}

audio::Waveform mix_mono(const audio::Waveform& x_hat, const audio::Waveform& v_hat) {
  check_same_length(x_hat, v_hat, "mix_mono");
  audio::Waveform y{x_hat.samples, x_hat.sample_rate};
  for (std::size_t n = 0; n < y.samples.size(); ++n) y.samples[n] += v_hat.samples[n];
  return y;
}

std::vector<double> convolve_truncated(std::span<const double> x,
                                       std::span<const double> h) {
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t k = 0; k < h.size(); ++k) {
    const double hk = h[k];
    if (hk == 0.0) continue;
    for (std::size_t n = k; n < x.size(); ++n) y[n] += hk * x[n - k];
  }
  return y;
}

std::pair<audio::Waveform, audio::Waveform> mix_binaural(
    const audio::Waveform& x_hat, const audio::Waveform& v_hat,
    const BinauralImpulses& h) {
  check_same_length(x_hat, v_hat, "mix_binaural");
  const std::pair<const char*, const std::vector<double>*> irs[] = {
      {"speech_left", &h.speech_left},
      {"speech_right", &h.speech_right},
      {"noise_left", &h.noise_left},
      {"noise_right", &h.noise_right}};
  for (const auto& [name, ir] : irs) {
    if (ir->empty())
      throw DataError(fmt::format("mix_binaural: impulse response {} is empty", name));
    for (double v : *ir)
      if (!std::isfinite(v))
        throw DataError(
            fmt::format("mix_binaural: impulse response {} is not finite", name));
  }
  auto ear = [&](const std::vector<double>& hx, const std::vector<double>& hv) {
    audio::Waveform y{convolve_truncated(x_hat.samples, hx), x_hat.sample_rate};
    const auto noise = convolve_truncated(v_hat.samples, hv);
    for (std::size_t n = 0; n < y.samples.size(); ++n) y.samples[n] += noise[n];
    return y;
  };
  return {ear(h.speech_left, h.noise_left), ear(h.speech_right, h.noise_right)};
}

}  // namespace spatialkd::datasim
