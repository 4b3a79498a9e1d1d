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

#ifndef SPATIALKD_METRICS_SI_SDR_HPP_
#define SPATIALKD_METRICS_SI_SDR_HPP_

#include <span>

namespace spatialkd::metrics {

inline constexpr double kSiSdrCapDb = 60.0;

// Scale-invariant SDR in dB, clamped to [-60, 60]. The processed signal is
// projected onto the reference; no mean removal. Throws ShapeError on a
// length mismatch and DataError on a silent reference.
double si_sdr(std::span<const double> reference, std::span<const double> processed);

}  // namespace spatialkd::metrics

#endif  // SPATIALKD_METRICS_SI_SDR_HPP_
