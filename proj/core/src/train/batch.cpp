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

#include "spatialkd/train/batch.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "spatialkd/audio/wav_io.hpp"
#include "spatialkd/error.hpp"

namespace spatialkd::train {

namespace {

audio::Spectrogram load_spectrogram(const std::string& path,
                                    const audio::StftConfig& stft) {
  const auto channels = audio::read_wav(path);
  return audio::stft(channels.at(0), stft);
}

}  // namespace

std::vector<Utterance> load_utterances(const std::vector<datasim::ManifestEntry>& entries,
                                       const audio::StftConfig& stft, bool need_binaural) {
  std::vector<Utterance> out;
  out.reserve(entries.size());
  for (const auto& e : entries) {
    if (need_binaural && !e.has_binaural())
      throw DataError(fmt::format("record '{}' has no binaural mixture", e.id));
    Utterance u;
    u.id = e.id;
    u.snr_db = e.snr_db;
    u.clean = load_spectrogram(e.clean, stft);
    u.mono = load_spectrogram(e.mono, stft);
    if (u.mono.frames() != u.clean.frames())
      throw ShapeError(fmt::format("record '{}': clean and mixture lengths differ", e.id));
    if (need_binaural) {
      u.left = load_spectrogram(e.left, stft);
      u.right = load_spectrogram(e.right, stft);
      if (u.left.frames() != u.clean.frames() || u.right.frames() != u.clean.frames())
        throw ShapeError(
            fmt::format("record '{}': binaural and monaural lengths differ", e.id));
    }
    out.push_back(std::move(u));
  }
  return out;
}

PaddedPlanes pad_batch(std::span<const audio::Spectrogram* const> specs,
                       std::size_t min_frames) {
  if (specs.empty()) throw DataError("pad_batch: empty batch");
  const std::size_t bins = specs[0]->bins();
  std::size_t frames = min_frames;
  for (const auto* s : specs) {
    if (s->bins() != bins)
      throw ShapeError(fmt::format("pad_batch: bin counts differ ({} vs {})", s->bins(),
                                   bins));
    if (s->frames() == 0) throw DataError("pad_batch: spectrogram with no frames");
    frames = std::max(frames, s->frames());
  }
  const std::size_t batch = specs.size();
  const std::size_t plane = frames * bins;
  std::vector<double> mag(batch * plane, 0.0);
  std::vector<double> phase(batch * 2 * plane, 0.0);
  PaddedPlanes out;
  for (std::size_t b = 0; b < batch; ++b) {
    const auto& s = *specs[b];
    const std::size_t n = s.frames() * bins;
    const auto& m = s.magnitude_plane();
    const auto& p = s.phase_plane();
    std::copy(m.begin(), m.end(), mag.begin() + static_cast<std::ptrdiff_t>(b * plane));
    double* cos_plane = phase.data() + b * 2 * plane;
    double* sin_plane = cos_plane + plane;
    for (std::size_t i = 0; i < n; ++i) {
      cos_plane[i] = p[2 * i];
      sin_plane[i] = p[2 * i + 1];
    }
    out.lengths.push_back(s.frames());
  }
  out.magnitude = nn::Tensor({batch, 1, frames, bins}, std::move(mag));
  out.phase = nn::Tensor({batch, 2, frames, bins}, std::move(phase));
  return out;
}

Batch make_batch(std::span<const Utterance* const> items, std::size_t min_frames,
                 bool binaural) {
  if (items.empty()) throw DataError("make_batch: empty batch");
  std::vector<const audio::Spectrogram*> clean, mono, left, right;
  for (const auto* u : items) {
    clean.push_back(&u->clean);
    mono.push_back(&u->mono);
    if (binaural) {
      if (!u->has_binaural())
        throw DataError(fmt::format("record '{}' has no binaural mixture", u->id));
      left.push_back(&u->left);
      right.push_back(&u->right);
    }
  }
  Batch b;
  PaddedPlanes c = pad_batch(clean, min_frames);
  PaddedPlanes m = pad_batch(mono, min_frames);
  b.clean_mag = c.magnitude;
  b.clean_phase = c.phase;
  b.mono_mag = m.magnitude;
  b.mono_phase = m.phase;
  b.lengths = std::move(c.lengths);
  if (binaural) {
    b.left_mag = pad_batch(left, min_frames).magnitude;
    b.right_mag = pad_batch(right, min_frames).magnitude;
  }
  return b;
}

}  // namespace spatialkd::train
