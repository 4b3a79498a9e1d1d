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

#ifndef SPATIALKD_AUDIO_FFT_HPP_
#define SPATIALKD_AUDIO_FFT_HPP_

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace spatialkd::audio {

// Real-input DFT of a fixed length n (any n >= 1), backed by FFTW.
// forward() produces n/2+1 bins; inverse() expects n/2+1 bins and returns the
// unnormalized inverse (callers divide by n). Instances are not shareable
// across threads, but distinct instances can run concurrently.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  RealFft(RealFft&&) noexcept;
  RealFft& operator=(RealFft&&) noexcept;

  std::size_t size() const noexcept { return n_; }
  std::size_t bins() const noexcept { return n_ / 2 + 1; }

  void forward(std::span<const double> in, std::span<std::complex<double>> out);
  void inverse(std::span<const std::complex<double>> in, std::span<double> out);

 private:
  struct Plans;
  std::size_t n_;
  std::unique_ptr<Plans> plans_;
};

}  // namespace spatialkd::audio

#endif  // SPATIALKD_AUDIO_FFT_HPP_
