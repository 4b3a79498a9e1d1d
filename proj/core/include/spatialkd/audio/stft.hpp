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

#ifndef SPATIALKD_AUDIO_STFT_HPP_
#define SPATIALKD_AUDIO_STFT_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "spatialkd/audio/waveform.hpp"

namespace spatialkd::audio {

enum class WindowKind { kSqrtHann, kHann, kRectangular };

std::string to_string(WindowKind kind);
WindowKind window_kind_from_string(const std::string& name);

// Periodic window of length n.
std::vector<double> make_window(WindowKind kind, std::size_t n);

// Analysis/synthesis framing. Construction validates hop <= window_len <=
// fft_len and the constant-overlap-add property of the squared window, so
// every StftConfig that exists can be inverted exactly.
class StftConfig {
 public:
  // 16 kHz defaults: 20 ms square-root Hann, 10 ms hop, 161 bins.
  StftConfig();
  StftConfig(WindowKind kind, std::size_t window_len, std::size_t hop,
             std::size_t fft_len);
  StftConfig(std::vector<double> window, std::size_t hop, std::size_t fft_len);

  std::size_t window_len() const noexcept { return window_.size(); }
  std::size_t hop() const noexcept { return hop_; }
  std::size_t fft_len() const noexcept { return fft_len_; }
  std::size_t bins() const noexcept { return fft_len_ / 2 + 1; }
  const std::vector<double>& window() const noexcept { return window_; }
  WindowKind kind() const noexcept { return kind_; }

  // Frames produced for a signal of n samples (0 if n < window_len).
  std::size_t frames_for(std::size_t n) const noexcept;
  // Samples produced by istft for the given frame count.
  std::size_t samples_for(std::size_t frames) const noexcept;

  // max |sum_k w^2(n - k*hop) - c| over one hop period, c the period mean.
  double cola_deviation() const;

  friend bool operator==(const StftConfig&, const StftConfig&) = default;

 private:
  void check() const;

  WindowKind kind_ = WindowKind::kSqrtHann;
  std::vector<double> window_;
  std::size_t hop_ = 0;
  std::size_t fft_len_ = 0;
};

// T x F magnitude grid and T x F x 2 unit phase grid (cos, sin interleaved),
// both row-major with frequency fastest.
class Spectrogram {
 public:
  Spectrogram() = default;
  Spectrogram(std::size_t frames, const StftConfig& config, double sample_rate);
  // Takes ownership of planes; throws ShapeError on size mismatch and
  // DataError on negative magnitude or non-unit phase.
  Spectrogram(std::vector<double> magnitude, std::vector<double> phase,
              std::size_t frames, const StftConfig& config, double sample_rate);

  std::size_t frames() const noexcept { return frames_; }
  std::size_t bins() const noexcept { return config_.bins(); }
  const StftConfig& config() const noexcept { return config_; }
  double sample_rate() const noexcept { return sample_rate_; }

  double magnitude(std::size_t t, std::size_t f) const {
    return magnitude_[t * bins() + f];
  }
  double cos_phase(std::size_t t, std::size_t f) const {
    return phase_[2 * (t * bins() + f)];
  }
  double sin_phase(std::size_t t, std::size_t f) const {
    return phase_[2 * (t * bins() + f) + 1];
  }
  const std::vector<double>& magnitude_plane() const noexcept { return magnitude_; }
  const std::vector<double>& phase_plane() const noexcept { return phase_; }
  std::vector<double>& magnitude_plane() noexcept { return magnitude_; }
  std::vector<double>& phase_plane() noexcept { return phase_; }

  // Throws DataError when an invariant is violated (tolerance 1e-6 on phase).
  void validate() const;

 private:
  std::size_t frames_ = 0;
  StftConfig config_;
  double sample_rate_ = kDefaultSampleRate;
  std::vector<double> magnitude_;
  std::vector<double> phase_;
};

// Frames start at sample 0 with no centre padding. Bins with zero magnitude
// carry phase (1, 0).
Spectrogram stft(const Waveform& w, const StftConfig& config);

// Weighted overlap-add with per-sample normalization by the overlapped
// squared window. Output length is (T-1)*hop + window_len.
Waveform istft(const Spectrogram& s);

// First and one-past-last sample where the overlapped squared window reaches
// its steady-state value, for a signal of n_samples.
struct SampleRange {
  std::size_t begin = 0;
  std::size_t end = 0;
};
SampleRange cola_interior(const StftConfig& config, std::size_t n_samples);

}  // namespace spatialkd::audio

#endif  // SPATIALKD_AUDIO_STFT_HPP_
