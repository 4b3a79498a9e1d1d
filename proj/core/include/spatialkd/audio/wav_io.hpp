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

#ifndef SPATIALKD_AUDIO_WAV_IO_HPP_
#define SPATIALKD_AUDIO_WAV_IO_HPP_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "spatialkd/audio/waveform.hpp"
#include "spatialkd/error.hpp"

namespace spatialkd::audio {

enum class WavErrorCode {
  kIo,
  kMalformedHeader,
  kUnsupportedCodec,
  kTruncatedData,
};

class WavError : public DataError {
 public:
  WavError(WavErrorCode code, const std::string& what)
      : DataError(what), code_(code) {}
  WavErrorCode code() const noexcept { return code_; }

 private:
  WavErrorCode code_;
};

enum class SampleFormat { kPcm16, kFloat32 };

// Reads a RIFF/WAVE file with PCM-16 or IEEE float-32 samples. Returns one
// Waveform per channel (mono or stereo). PCM-16 values are scaled by 1/32768.
std::vector<Waveform> read_wav(const std::filesystem::path& path);

// Writes channels of equal length and rate. Float-32 is lossless for values
// representable in float; PCM-16 rounds to nearest and saturates.
void write_wav(const std::filesystem::path& path,
               std::span<const Waveform> channels,
               SampleFormat format = SampleFormat::kFloat32);
void write_wav(const std::filesystem::path& path, const Waveform& mono,
               SampleFormat format = SampleFormat::kFloat32);

}  // namespace spatialkd::audio

#endif  // SPATIALKD_AUDIO_WAV_IO_HPP_
