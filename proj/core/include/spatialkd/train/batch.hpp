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

#ifndef SPATIALKD_TRAIN_BATCH_HPP_
#define SPATIALKD_TRAIN_BATCH_HPP_

#include <span>
#include <string>
#include <vector>

#include "spatialkd/audio/stft.hpp"
#include "spatialkd/datasim/manifest.hpp"
#include "spatialkd/nn/tensor.hpp"

namespace spatialkd::train {

// Spectrograms of one corpus record. left/right stay empty (0 frames) when
// the record was loaded without binaural channels.
struct Utterance {
  std::string id;
  double snr_db = 0.0;
  audio::Spectrogram clean;
  audio::Spectrogram mono;
  audio::Spectrogram left;
  audio::Spectrogram right;

  std::size_t frames() const noexcept { return clean.frames(); }
  bool has_binaural() const noexcept { return left.frames() > 0; }
};

// Reads the WAVs referenced by `entries` and computes their spectrograms.
// Throws DataError when a binaural channel is required but missing.
std::vector<Utterance> load_utterances(const std::vector<datasim::ManifestEntry>& entries,
                                       const audio::StftConfig& stft, bool need_binaural);

struct PaddedPlanes {
  nn::Tensor magnitude;  // [B, 1, T, F]
  nn::Tensor phase;      // [B, 2, T, F]
  std::vector<std::size_t> lengths;
};

// Zero-pads every spectrogram in time to max(longest, min_frames). Lengths
// hold the valid frame counts. Throws DataError on an empty batch and
// ShapeError when bin counts differ.
PaddedPlanes pad_batch(std::span<const audio::Spectrogram* const> specs,
                       std::size_t min_frames = 0);

struct Batch {
  nn::Tensor clean_mag, clean_phase;
  nn::Tensor mono_mag, mono_phase;
  nn::Tensor left_mag, right_mag;  // empty unless binaural
  std::vector<std::size_t> lengths;
};

Batch make_batch(std::span<const Utterance* const> items, std::size_t min_frames,
                 bool binaural);

}  // namespace spatialkd::train

#endif  // SPATIALKD_TRAIN_BATCH_HPP_
