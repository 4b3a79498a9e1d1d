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

#include "spatialkd/metrics/stoi.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

#include "spatialkd/audio/fft.hpp"
#include "spatialkd/error.hpp"

namespace spatialkd::metrics {

namespace {

constexpr double kRate = 10000.0;
constexpr std::size_t kFrame = 256;
constexpr std::size_t kHop = kFrame / 2;
constexpr std::size_t kFft = 512;
constexpr std::size_t kBands = 15;
constexpr double kMinFreq = 150.0;
constexpr std::size_t kSegment = 30;
constexpr double kBetaDb = -15.0;
constexpr double kDynRangeDb = 40.0;
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Symmetric Hann of length n without the zero end points.
std::vector<double> inner_hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i + 1) /
                                static_cast<double>(n + 1));
  return w;
}

// Drops frames of both signals whose clean energy is more than 40 dB below
// the loudest clean frame, then overlap-adds the rest.
void remove_silent_frames(std::vector<double>& x, std::vector<double>& y) {
  const auto w = inner_hann(kFrame);
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + kFrame <= x.size(); s += kHop)
    starts.push_back(s);
  std::vector<double> energy(starts.size());
  for (std::size_t k = 0; k < starts.size(); ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < kFrame; ++i) {
      const double v = w[i] * x[starts[k] + i];
      acc += v * v;
    }
    energy[k] = 20.0 * std::log10(std::sqrt(acc) + kEps);
  }
  const double top = energy.empty() ? 0.0 : *std::max_element(energy.begin(), energy.end());
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < starts.size(); ++k)
    if (energy[k] - top + kDynRangeDb > 0.0) keep.push_back(starts[k]);
  const std::size_t len = keep.empty() ? 0 : (keep.size() - 1) * kHop + kFrame;
  std::vector<double> xo(len, 0.0), yo(len, 0.0);
  for (std::size_t k = 0; k < keep.size(); ++k) {
    for (std::size_t i = 0; i < kFrame; ++i) {
      xo[k * kHop + i] += w[i] * x[keep[k] + i];
      yo[k * kHop + i] += w[i] * y[keep[k] + i];
    }
  }
  x = std::move(xo);
  y = std::move(yo);
}

// One-third octave band matrix as [first, last) bin ranges.
std::vector<std::pair<std::size_t, std::size_t>> third_octave_bands() {
  const std::size_t bins = kFft / 2 + 1;
  std::vector<double> f(bins);
  for (std::size_t i = 0; i < bins; ++i)
    f[i] = kRate * static_cast<double>(i) / static_cast<double>(kFft);
  auto nearest = [&](double target) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < bins; ++i)
      if ((f[i] - target) * (f[i] - target) < (f[best] - target) * (f[best] - target))
        best = i;
    return best;
  };
  std::vector<std::pair<std::size_t, std::size_t>> bands;
  for (std::size_t k = 0; k < kBands; ++k) {
    const double kk = static_cast<double>(k);
    const double lo = kMinFreq * std::pow(2.0, (2.0 * kk - 1.0) / 6.0);
    const double hi = kMinFreq * std::pow(2.0, (2.0 * kk + 1.0) / 6.0);
    bands.emplace_back(nearest(lo), nearest(hi));
  }
  return bands;
}

// Band envelopes, [kBands][frames].
std::vector<std::vector<double>> band_envelopes(const std::vector<double>& x) {
  static const auto bands = third_octave_bands();
  const auto w = inner_hann(kFrame);
  audio::RealFft fft(kFft);
  std::vector<double> buf(kFft);
  std::vector<std::complex<double>> spec(fft.bins());
  std::vector<std::vector<double>> env(kBands);
  for (std::size_t s = 0; s + kFrame < x.size(); s += kHop) {
    std::fill(buf.begin(), buf.end(), 0.0);
    for (std::size_t i = 0; i < kFrame; ++i) buf[i] = w[i] * x[s + i];
    fft.forward(buf, spec);
    for (std::size_t b = 0; b < kBands; ++b) {
      double acc = 0.0;
      for (std::size_t i = bands[b].first; i < bands[b].second; ++i) acc += std::norm(spec[i]);
      env[b].push_back(std::sqrt(acc));
    }
  }
  return env;
}

double bessel_i0(double x) { return std::cyl_bessel_i(0.0, x); }

}  // namespace

std::vector<double> resample(std::span<const double> x, std::size_t up, std::size_t down) {
  if (up == 0 || down == 0) throw UsageError("resample: factors must be >= 1");
  const std::size_t g = std::gcd(up, down);
  up /= g;
  down /= g;
  if (up == 1 && down == 1) return {x.begin(), x.end()};
  const std::size_t factor = std::max(up, down);
  const std::size_t half = 16 * factor;
  const std::size_t taps = 2 * half + 1;
  const double cutoff = 1.0 / static_cast<double>(factor);  // fraction of Nyquist
  const double beta = 8.0;
  std::vector<double> h(taps);
  for (std::size_t k = 0; k < taps; ++k) {
    const double m = static_cast<double>(k) - static_cast<double>(half);
    const double arg = std::numbers::pi * cutoff * m;
    const double sinc = m == 0.0 ? 1.0 : std::sin(arg) / arg;
    const double r = m / static_cast<double>(half);
    const double kaiser = bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - r * r))) /
                          bessel_i0(beta);
    h[k] = static_cast<double>(up) * cutoff * sinc * kaiser;
  }
  const std::size_t n_up = x.size() * up;
  const std::size_t n_out = (n_up + down - 1) / down;
  std::vector<double> y(n_out, 0.0);
  for (std::size_t m = 0; m < n_out; ++m) {
    // Upsampled-domain index aligned with the filter centre.
    const std::size_t j = m * down + half;
    double acc = 0.0;
    for (std::size_t k = j % up; k < taps && k <= j; k += up) {
      const std::size_t src = (j - k) / up;
      if (src < x.size()) acc += h[k] * x[src];
    }
    y[m] = acc;
  }
  return y;
}

double stoi(const audio::Waveform& clean, const audio::Waveform& processed) {
  if (clean.size() != processed.size())
    throw ShapeError(fmt::format("stoi: clean has {} samples, processed has {}",
                                 clean.size(), processed.size()));
  if (clean.sample_rate != processed.sample_rate)
    throw ShapeError("stoi: sample rates differ");
  const auto rate = static_cast<std::size_t>(std::lround(clean.sample_rate));
  if (rate == 0 || static_cast<double>(rate) != clean.sample_rate)
    throw DataError(fmt::format("stoi: unsupported sample rate {}", clean.sample_rate));
  std::vector<double> x = resample(clean.samples, 10000, rate);
  std::vector<double> y = resample(processed.samples, 10000, rate);
  remove_silent_frames(x, y);
  const auto xe = band_envelopes(x);
  const auto ye = band_envelopes(y);
  const std::size_t frames = xe[0].size();
  if (frames < kSegment)
    throw DataError(fmt::format(
        "stoi: only {} non-silent frames, need at least {} (about 0.4 s of audio)",
        frames, kSegment));

  const double clip = std::pow(10.0, -kBetaDb / 20.0);
  double total = 0.0;
  std::size_t count = 0;
  std::vector<double> xs(kSegment), ys(kSegment);
  for (std::size_t m = kSegment; m <= frames; ++m) {
    for (std::size_t b = 0; b < kBands; ++b) {
      double xn = 0.0, yn = 0.0;
      for (std::size_t i = 0; i < kSegment; ++i) {
        xs[i] = xe[b][m - kSegment + i];
        ys[i] = ye[b][m - kSegment + i];
        xn += xs[i] * xs[i];
        yn += ys[i] * ys[i];
      }
      const double gain = std::sqrt(xn) / (std::sqrt(yn) + kEps);
      for (std::size_t i = 0; i < kSegment; ++i)
        ys[i] = std::min(ys[i] * gain, xs[i] * (1.0 + clip));
      const double xm = std::accumulate(xs.begin(), xs.end(), 0.0) / kSegment;
      const double ym = std::accumulate(ys.begin(), ys.end(), 0.0) / kSegment;
      double xx = 0.0, yy = 0.0, xy = 0.0;
      for (std::size_t i = 0; i < kSegment; ++i) {
        const double a = xs[i] - xm, c = ys[i] - ym;
        xx += a * a;
        yy += c * c;
        xy += a * c;
      }
      total += xy / ((std::sqrt(xx) + kEps) * (std::sqrt(yy) + kEps));
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

}  // namespace spatialkd::metrics
