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

#include "spatialkd/audio/wav_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include <fmt/format.h>

namespace spatialkd::audio {
namespace {

static_assert(std::endian::native == std::endian::little,
              "WAV I/O assumes a little-endian host");

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T load(const std::vector<char>& buf, std::size_t pos) {
  T v;
  std::memcpy(&v, buf.data() + pos, sizeof(T));
  return v;
}

template <typename T>
void put(std::string& out, T v) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  out.append(bytes, sizeof(T));
}

}  // namespace

std::vector<Waveform> read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw WavError(WavErrorCode::kIo,
                   fmt::format("cannot open '{}' for reading", path.string()));
  std::vector<char> buf((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
  const std::string name = path.string();
  if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 ||
      std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
    throw WavError(WavErrorCode::kMalformedHeader,
                   fmt::format("'{}': not a RIFF/WAVE file", name));

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= buf.size()) {
    const std::string id(buf.data() + pos, 4);
    const std::uint32_t size = load<std::uint32_t>(buf, pos + 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      if (size < 16 || body + 16 > buf.size())
        throw WavError(WavErrorCode::kMalformedHeader,
                       fmt::format("'{}': short fmt chunk", name));
      format = load<std::uint16_t>(buf, body);
      channels = load<std::uint16_t>(buf, body + 2);
      rate = load<std::uint32_t>(buf, body + 4);
      bits = load<std::uint16_t>(buf, body + 14);
      if (format == kFormatExtensible && size >= 40 && body + 26 <= buf.size())
        format = load<std::uint16_t>(buf, body + 24);
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt)
        throw WavError(WavErrorCode::kMalformedHeader,
                       fmt::format("'{}': data chunk before fmt chunk", name));
      const bool pcm16 = format == kFormatPcm && bits == 16;
      const bool float32 = format == kFormatFloat && bits == 32;
      if (!pcm16 && !float32)
        throw WavError(WavErrorCode::kUnsupportedCodec,
                       fmt::format("'{}': unsupported codec (format {}, {} bits)",
                                   name, format, bits));
      if (channels < 1 || channels > 2)
        throw WavError(WavErrorCode::kUnsupportedCodec,
                       fmt::format("'{}': {} channels, expected 1 or 2", name,
                                   channels));
      if (rate == 0)
        throw WavError(WavErrorCode::kMalformedHeader,
                       fmt::format("'{}': zero sample rate", name));
      const std::size_t frame_bytes = channels * (bits / 8);
      if (body + size > buf.size() || size % frame_bytes != 0)
        throw WavError(WavErrorCode::kTruncatedData,
                       fmt::format("'{}': data chunk truncated ({} bytes declared, "
                                   "{} available)",
                                   name, size, buf.size() - body));
      const std::size_t n = size / frame_bytes;
      std::vector<Waveform> out(channels);
      for (auto& w : out) {
        w.sample_rate = static_cast<double>(rate);
        w.samples.resize(n);
      }
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < channels; ++c) {
          const std::size_t at = body + i * frame_bytes + c * (bits / 8);
          out[c].samples[i] =
              pcm16 ? load<std::int16_t>(buf, at) / 32768.0
                    : static_cast<double>(load<float>(buf, at));
        }
      }
      return out;
    }
    pos = body + size + (size & 1u);
  }
  throw WavError(have_fmt ? WavErrorCode::kTruncatedData
                          : WavErrorCode::kMalformedHeader,
                 fmt::format("'{}': missing {} chunk", name,
                             have_fmt ? "data" : "fmt"));
}

void write_wav(const std::filesystem::path& path,
               std::span<const Waveform> channels, SampleFormat format) {
  if (channels.empty() || channels.size() > 2)
    throw UsageError("write_wav: expected 1 or 2 channels");
  const std::size_t n = channels[0].size();
  for (const auto& c : channels) {
    validate(c);
    if (c.size() != n || c.sample_rate != channels[0].sample_rate)
      throw ShapeError("write_wav: channels differ in length or rate");
  }
  const std::uint16_t nch = static_cast<std::uint16_t>(channels.size());
  const std::uint16_t bits = format == SampleFormat::kPcm16 ? 16 : 32;
  const std::uint32_t rate =
      static_cast<std::uint32_t>(std::lround(channels[0].sample_rate));
  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(n * nch * (bits / 8));

  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put<std::uint32_t>(out, 36 + data_bytes);
  out += "WAVEfmt ";
  put<std::uint32_t>(out, 16);
  put<std::uint16_t>(out, format == SampleFormat::kPcm16 ? kFormatPcm : kFormatFloat);
  put<std::uint16_t>(out, nch);
  put<std::uint32_t>(out, rate);
  put<std::uint32_t>(out, rate * nch * (bits / 8));
  put<std::uint16_t>(out, static_cast<std::uint16_t>(nch * (bits / 8)));
  put<std::uint16_t>(out, bits);
  out += "data";
  put<std::uint32_t>(out, data_bytes);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& c : channels) {
      const double v = c.samples[i];
      if (format == SampleFormat::kPcm16) {
        const double q = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0);
        put<std::int16_t>(out, static_cast<std::int16_t>(q));
      } else {
        put<float>(out, static_cast<float>(v));
      }
    }
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f)
    throw WavError(WavErrorCode::kIo,
                   fmt::format("cannot open '{}' for writing", path.string()));
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f)
    throw WavError(WavErrorCode::kIo,
                   fmt::format("write to '{}' failed", path.string()));
}

void write_wav(const std::filesystem::path& path, const Waveform& mono,
               SampleFormat format) {
  write_wav(path, std::span<const Waveform>(&mono, 1), format);
}

}  // namespace spatialkd::audio
