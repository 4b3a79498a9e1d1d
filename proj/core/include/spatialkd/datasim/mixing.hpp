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

#ifndef SPATIALKD_DATASIM_MIXING_HPP_
#define SPATIALKD_DATASIM_MIXING_HPP_

#include <span>
#include <utility>
#include <vector>

#include "spatialkd/audio/waveform.hpp"

namespace spatialkd::datasim {

// Mean power and root-mean-square level.
double power(std::span<const double> x);
double rms(std::span<const double> x);

// 10 log10(power(speech) / power(noise)).
double snr_db(std::span<const double> speech, std::span<const double> noise);

// nu * x with nu = 10^(epsilon/20) / rms(x), so the output RMS is
// 10^(epsilon/20). Throws DataError on a silent input.
audio::Waveform scale_clean(const audio::Waveform& x, double epsilon_db);

// theta * v with theta = sqrt(P(x_hat) / (P(v) 10^(snr/10))). Throws
// DataError on silent noise and ShapeError on a length mismatch.
audio::Waveform scale_noise(const audio::Waveform& v, const audio::Waveform& x_hat,
                            double snr_db);

// Elementwise sum of equal-length waveforms.
audio::Waveform mix_mono(const audio::Waveform& x_hat, const audio::Waveform& v_hat);

// Full linear convolution truncated to x.size() samples.
std::vector<double> convolve_truncated(std::span<const double> x,
                                       std::span<const double> h);

struct BinauralImpulses {
  std::vector<double> speech_left, speech_right;
  std::vector<double> noise_left, noise_right;
};

// y_L = x*h_xL + v*h_vL, y_R = x*h_xR + v*h_vR, each truncated to the input
// length. Throws DataError on an empty or non-finite impulse response.
std::pair<audio::Waveform, audio::Waveform> mix_binaural(
    const audio::Waveform& x_hat, const audio::Waveform& v_hat,
    const BinauralImpulses& h);

}  // namespace spatialkd::datasim

#endif  // SPATIALKD_DATASIM_MIXING_HPP_
