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

#include "spatialkd/metrics/rtf.hpp"

#include <algorithm>
#include <chrono>

#include <fmt/format.h>

#include "spatialkd/error.hpp"

namespace spatialkd::metrics {

double steady_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

double median(std::vector<double> values) {
  if (values.empty()) throw UsageError("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double measure_rtf(const std::function<void()>& run, double audio_seconds,
                   std::size_t repeats, const Clock& clock) {
  if (repeats == 0) throw UsageError("rtf: repeats must be >= 1");
  if (!(audio_seconds > 0.0))
    throw UsageError(fmt::format("rtf: audio duration must be > 0, got {}", audio_seconds));
  std::vector<double> ratios;
  ratios.reserve(repeats);
  for (std::size_t i = 0; i < repeats; ++i) {
    const double start = clock();
    run();
    ratios.push_back((clock() - start) / audio_seconds);
  }
  return median(std::move(ratios));
}

double measure_rtf(model::Network& net, const audio::Waveform& input, std::size_t repeats,
                   const Clock& clock) {
  std::function<void()> run;
  if (net.role() == model::ModelRole::kTeacher) {
    run = [&] { (void)model::teacher_waveform(net, input, input, input); };
  } else {
    run = [&] { (void)model::enhance_waveform(net, input); };
  }
  return measure_rtf(run, input.duration_seconds(), repeats, clock);
}

}  // namespace spatialkd::metrics
