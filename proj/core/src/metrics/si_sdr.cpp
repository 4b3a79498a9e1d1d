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

#include "spatialkd/metrics/si_sdr.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "spatialkd/error.hpp"

namespace spatialkd::metrics {

double si_sdr(std::span<const double> reference, std::span<const double> processed) {
  if (reference.size() != processed.size())
    throw ShapeError(fmt::format("si_sdr: reference has {} samples, processed has {}",
                                 reference.size(), processed.size()));
  double rr = 0.0, rp = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    rr += reference[i] * reference[i];
    rp += reference[i] * processed[i];
  }
  if (!(rr > 0.0)) throw DataError("si_sdr: reference signal is silent");
  const double a = rp / rr;
  double target = 0.0, residual = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double t = a * reference[i];
    const double e = processed[i] - t;
    target += t * t;
    residual += e * e;
  }
  if (!std::isfinite(target) || !std::isfinite(residual))
    throw NumericError("si_sdr: non-finite input");
  if (residual == 0.0) return kSiSdrCapDb;
  if (target == 0.0) return -kSiSdrCapDb;
  return std::clamp(10.0 * std::log10(target / residual), -kSiSdrCapDb, kSiSdrCapDb);
}

}  // namespace spatialkd::metrics
