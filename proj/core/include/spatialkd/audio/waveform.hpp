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

#ifndef SPATIALKD_AUDIO_WAVEFORM_HPP_
#define SPATIALKD_AUDIO_WAVEFORM_HPP_

#include <cstddef>
#include <vector>

namespace spatialkd::audio {

inline constexpr double kDefaultSampleRate = 16000.0;

// Time-domain signal. Samples are nominally in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  double sample_rate = kDefaultSampleRate;

  std::size_t size() const noexcept { return samples.size(); }
  double duration_seconds() const noexcept {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

// Throws DataError if the rate is not positive, the signal is empty, or any
// sample is non-finite.
void validate(const Waveform& w);

}  // namespace spatialkd::audio

#endif  // SPATIALKD_AUDIO_WAVEFORM_HPP_
