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

#include "spatialkd/audio/stft.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "spatialkd/audio/fft.hpp"
#include "spatialkd/error.hpp"

namespace spatialkd::audio {

void validate(const Waveform& w) {
  if (!(w.sample_rate > 0.0) || !std::isfinite(w.sample_rate))
    throw DataError(fmt::format("waveform: sample_rate must be > 0, got {}",
                                w.sample_rate));
  if (w.samples.empty()) throw DataError("waveform: empty signal");
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    if (!std::isfinite(w.samples[i]))
      throw DataError(fmt::format("waveform: non-finite sample at {}", i));
  }
}

std::string to_string(WindowKind kind) {
  switch (kind) {
    case WindowKind::kSqrtHann: return "sqrt_hann";
    case WindowKind::kHann: return "hann";
    case WindowKind::kRectangular: return "rectangular";
  }
  return "unknown";
}

WindowKind window_kind_from_string(const std::string& name) {
  if (name == "sqrt_hann") return WindowKind::kSqrtHann;
  if (name == "hann") return WindowKind::kHann;
  if (name == "rectangular") return WindowKind::kRectangular;
  throw UsageError(fmt::format(
      "unknown window '{}' (expected sqrt_hann, hann or rectangular)", name));
}

std::vector<double> make_window(WindowKind kind, std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (kind == WindowKind::kRectangular) return w;
  for (std::size_t i = 0; i < n; ++i) {
    const double hann =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                             static_cast<double>(n));
    w[i] = kind == WindowKind::kHann ? hann : std::sqrt(hann);
  }
  return w;
}

StftConfig::StftConfig() : StftConfig(WindowKind::kSqrtHann, 320, 160, 320) {}

StftConfig::StftConfig(WindowKind kind, std::size_t window_len, std::size_t hop,
                       std::size_t fft_len)
    : kind_(kind), window_(make_window(kind, window_len)), hop_(hop),
      fft_len_(fft_len) {
  check();
}

StftConfig::StftConfig(std::vector<double> window, std::size_t hop,
                       std::size_t fft_len)
    : kind_(WindowKind::kRectangular), window_(std::move(window)), hop_(hop),
      fft_len_(fft_len) {
  // Custom windows are tagged by whichever built-in they reproduce.
  for (WindowKind k :
       {WindowKind::kSqrtHann, WindowKind::kHann, WindowKind::kRectangular}) {
    if (make_window(k, window_.size()) == window_) {
      kind_ = k;
      break;
    }
  }
  check();
}

void StftConfig::check() const {
  if (hop_ == 0 || window_.empty() || fft_len_ == 0)
    throw UsageError("stft config: sizes must be >= 1");
  if (!(hop_ <= window_.size() && window_.size() <= fft_len_))
    throw UsageError(fmt::format(
        "stft config: need hop <= window_len <= fft_len, got {} / {} / {}",
        hop_, window_.size(), fft_len_));
  const double dev = cola_deviation();
  if (!(dev <= 1e-10))
    throw UsageError(fmt::format(
        "stft config: squared window is not constant-overlap-add at hop {} "
        "(relative deviation {:.3g})",
        hop_, dev));
}

std::size_t StftConfig::frames_for(std::size_t n) const noexcept {
  if (n < window_len()) return 0;
  return 1 + (n - window_len()) / hop_;
}

std::size_t StftConfig::samples_for(std::size_t frames) const noexcept {
  if (frames == 0) return 0;
  return (frames - 1) * hop_ + window_len();
}

double StftConfig::cola_deviation() const {
  std::vector<double> sum(hop_, 0.0);
  for (std::size_t i = 0; i < window_.size(); ++i)
    sum[i % hop_] += window_[i] * window_[i];
  double mean = 0.0;
  for (double s : sum) mean += s;
  mean /= static_cast<double>(hop_);
  if (!(mean > 0.0)) return std::numeric_limits<double>::infinity();
  double dev = 0.0;
  for (double s : sum) dev = std::max(dev, std::abs(s - mean));
  return dev / mean;
}

Spectrogram::Spectrogram(std::size_t frames, const StftConfig& config,
                         double sample_rate)
    : frames_(frames), config_(config), sample_rate_(sample_rate),
      magnitude_(frames * config.bins(), 0.0),
      phase_(2 * frames * config.bins(), 0.0) {
  for (std::size_t i = 0; i < phase_.size(); i += 2) phase_[i] = 1.0;
}

Spectrogram::Spectrogram(std::vector<double> magnitude, std::vector<double> phase,
                         std::size_t frames, const StftConfig& config,
                         double sample_rate)
    : frames_(frames), config_(config), sample_rate_(sample_rate),
      magnitude_(std::move(magnitude)), phase_(std::move(phase)) {
  if (magnitude_.size() != frames * config.bins() ||
      phase_.size() != 2 * frames * config.bins())
    throw ShapeError(fmt::format(
        "spectrogram: planes do not match {} frames x {} bins", frames,
        config.bins()));
  validate();
}

void Spectrogram::validate() const {
  for (std::size_t i = 0; i < magnitude_.size(); ++i) {
    if (!(magnitude_[i] >= 0.0) || !std::isfinite(magnitude_[i]))
      throw DataError(fmt::format("spectrogram: invalid magnitude {} at bin {}",
                                  magnitude_[i], i));
    const double c = phase_[2 * i], s = phase_[2 * i + 1];
    if (!(std::abs(c * c + s * s - 1.0) <= 1e-6))
      throw DataError(fmt::format("spectrogram: phase at bin {} is not unit", i));
  }
}

Spectrogram stft(const Waveform& w, const StftConfig& config) {
  validate(w);
  if (w.size() < config.window_len())
    throw DataError(fmt::format(
        "stft: waveform has {} samples, need at least {} (one window)",
        w.size(), config.window_len()));
  const std::size_t frames = config.frames_for(w.size());
  const std::size_t bins = config.bins();
  Spectrogram out(frames, config, w.sample_rate);
  auto& mag = out.magnitude_plane();
  auto& phase = out.phase_plane();

  RealFft fft(config.fft_len());
  std::vector<double> frame(config.fft_len(), 0.0);
  std::vector<std::complex<double>> spec(bins);
  const auto& win = config.window();
  for (std::size_t t = 0; t < frames; ++t) {
    const std::size_t start = t * config.hop();
    for (std::size_t i = 0; i < win.size(); ++i)
      frame[i] = w.samples[start + i] * win[i];
    fft.forward(frame, spec);
    for (std::size_t f = 0; f < bins; ++f) {
      const double m = std::abs(spec[f]);
      const std::size_t idx = t * bins + f;
      mag[idx] = m;
      if (m > 0.0) {
        phase[2 * idx] = spec[f].real() / m;
        phase[2 * idx + 1] = spec[f].imag() / m;
      } else {
        phase[2 * idx] = 1.0;
        phase[2 * idx + 1] = 0.0;
      }
    }
  }
  return out;
}

Waveform istft(const Spectrogram& s) {
  const StftConfig& config = s.config();
  const std::size_t bins = config.bins();
  const std::size_t n_out = config.samples_for(s.frames());
  Waveform out;
  out.sample_rate = s.sample_rate();
  out.samples.assign(n_out, 0.0);
  if (s.frames() == 0) return out;

  std::vector<double> norm(n_out, 0.0);
  RealFft fft(config.fft_len());
  std::vector<std::complex<double>> spec(bins);
  std::vector<double> frame(config.fft_len());
  const auto& win = config.window();
  const double scale = 1.0 / static_cast<double>(config.fft_len());
  for (std::size_t t = 0; t < s.frames(); ++t) {
    for (std::size_t f = 0; f < bins; ++f) {
      const double m = s.magnitude(t, f);
      spec[f] = {m * s.cos_phase(t, f), m * s.sin_phase(t, f)};
    }
    fft.inverse(spec, frame);
    const std::size_t start = t * config.hop();
    for (std::size_t i = 0; i < win.size(); ++i) {
      out.samples[start + i] += frame[i] * scale * win[i];
      norm[start + i] += win[i] * win[i];
    }
  }
  for (std::size_t i = 0; i < n_out; ++i)
    out.samples[i] = norm[i] > 1e-12 ? out.samples[i] / norm[i] : 0.0;
  return out;
}

SampleRange cola_interior(const StftConfig& config, std::size_t n_samples) {
  const std::size_t frames = config.frames_for(n_samples);
  SampleRange r;
  r.begin = config.window_len() - config.hop();
  r.end = frames * config.hop();
  if (r.end < r.begin) r.end = r.begin;
  return r;
}

}  // namespace spatialkd::audio
