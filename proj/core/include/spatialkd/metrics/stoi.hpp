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

#ifndef SPATIALKD_METRICS_STOI_HPP_
#define SPATIALKD_METRICS_STOI_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "spatialkd/audio/waveform.hpp"

namespace spatialkd::metrics {

// Rational-rate resampler: upsample by `up`, low-pass with a Kaiser-windowed
// sinc, downsample by `down`. Output length is ceil(n * up / down) and the
// filter delay is compensated.
std::vector<double> resample(std::span<const double> x, std::size_t up, std::size_t down);

// Short-time objective intelligibility of `processed` against `clean`:
// 10 kHz internal rate, 256-sample frames, 15 one-third octave bands from
// 150 Hz, 30-frame segments, -15 dB clipping, 40 dB silent-frame removal.
// Throws ShapeError on a length or rate mismatch and DataError when fewer
// than 30 non-silent frames remain.
double stoi(const audio::Waveform& clean, const audio::Waveform& processed);

}  // namespace spatialkd::metrics

#endif  // SPATIALKD_METRICS_STOI_HPP_
