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

#ifndef SPATIALKD_METRICS_RTF_HPP_
#define SPATIALKD_METRICS_RTF_HPP_

#include <functional>
#include <vector>

#include "spatialkd/audio/waveform.hpp"
#include "spatialkd/model/networks.hpp"

namespace spatialkd::metrics {

// Seconds from an arbitrary origin.
using Clock = std::function<double()>;
double steady_seconds();

// Median; averages the two middle values for an even count. Throws
// UsageError when empty.
double median(std::vector<double> values);

// Median over `repeats` runs of (elapsed / audio_seconds).
double measure_rtf(const std::function<void()>& run, double audio_seconds,
                   std::size_t repeats, const Clock& clock = steady_seconds);

// Times enhance_waveform (or the teacher path with the input duplicated to
// both ears) on `input`.
double measure_rtf(model::Network& net, const audio::Waveform& input,
                   std::size_t repeats, const Clock& clock = steady_seconds);

}  // namespace spatialkd::metrics

#endif  // SPATIALKD_METRICS_RTF_HPP_
