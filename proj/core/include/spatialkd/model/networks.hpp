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

#ifndef SPATIALKD_MODEL_NETWORKS_HPP_
#define SPATIALKD_MODEL_NETWORKS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spatialkd/audio/stft.hpp"
#include "spatialkd/audio/waveform.hpp"
#include "spatialkd/model/magnitude_net.hpp"
#include "spatialkd/model/model_config.hpp"
#include "spatialkd/model/phase_net.hpp"
#include "spatialkd/nn/checkpoint.hpp"

namespace spatialkd::model {

// The teacher is binaural and has no phase sub-network. The student and the
// bad student share the monaural architecture (magnitude + phase).
enum class ModelRole { kTeacher, kStudent, kBadStudent };

std::string to_string(ModelRole role);
ModelRole role_from_string(const std::string& name);

struct EnhancerOutput {
  nn::Tensor magnitude;  // [B, 1, T, F]
  nn::Tensor phase;      // [B, 2, T, F], unit pairs
  EncoderTaps taps;
};

class Network {
 public:
  // Parameters drawn from a generator seeded with `seed`; two networks with
  // the same config and seed start bitwise identical regardless of role.
  Network(ModelRole role, const ModelConfig& cfg, const audio::StftConfig& stft,
          std::uint64_t seed);
  // Copies would alias parameter storage.
  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;
  Network(Network&&) = default;
  Network& operator=(Network&&) = default;

  ModelRole role() const noexcept { return role_; }
  const ModelConfig& config() const noexcept { return cfg_; }
  const audio::StftConfig& stft() const noexcept { return stft_; }
  bool has_phase_net() const noexcept { return phase_.has_value(); }

  // Monaural path: the single magnitude feeds both encoders.
  // mag [B, 1, T, F], phase [B, 2, T, F]. Student / bad student only.
  EnhancerOutput enhance(const nn::Tensor& mag, const nn::Tensor& phase,
                         nn::NormMode mode, nn::Lengths lengths = {});

  // Binaural path through the magnitude network. Valid for any role; the
  // teacher uses it for training and distillation.
  MagnitudeOutput binaural(const nn::Tensor& left, const nn::Tensor& right,
                           nn::NormMode mode, nn::Lengths lengths = {});

  // All tensors (trainable parameters and batch-norm buffers) by name.
  nn::ParamList state() const;
  std::vector<nn::Tensor> trainable_parameters() const;
  // Toggles requires_grad on every trainable parameter.
  void set_frozen(bool frozen);

  PhaseNet& phase_net();

  nn::Checkpoint to_checkpoint() const;
  static Network from_checkpoint(const nn::Checkpoint& ckpt);

 private:
  void check_frames(std::size_t frames) const;

  ModelRole role_;
  ModelConfig cfg_;
  audio::StftConfig stft_;
  MagnitudeNet magnitude_;
  std::optional<PhaseNet> phase_;
};

// Single-utterance helpers in evaluation mode (running statistics, no graph).

struct SpectralEstimate {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::vector<double> magnitude;  // T x F
  std::vector<double> phase;      // T x F x 2, (cos, sin) interleaved
  EncoderTaps taps;
};

// Inputs shorter than ModelConfig::min_frames() are zero-padded in time
// internally (masked) and the outputs cropped back.
SpectralEstimate enhance_spectrogram(Network& net, const audio::Spectrogram& noisy);
SpectralEstimate teacher_spectrogram(Network& net, const audio::Spectrogram& left,
                                     const audio::Spectrogram& right);

// Combines a magnitude grid and unit phase grid and inverts the STFT.
audio::Waveform reconstruct(const std::vector<double>& magnitude,
                            const std::vector<double>& phase, std::size_t frames,
                            const audio::StftConfig& cfg, double sample_rate);

// stft -> enhance -> istft, zero-padded at the end to the input length.
// Student or bad student only.
audio::Waveform enhance_waveform(Network& net, const audio::Waveform& noisy);
// Teacher path: magnitude from the binaural pair, phase taken from `mono`.
audio::Waveform teacher_waveform(Network& net, const audio::Waveform& left,
                                 const audio::Waveform& right,
                                 const audio::Waveform& mono);

// Helpers converting spectrogram planes to [1, C, T, F] tensors.
nn::Tensor magnitude_tensor(const audio::Spectrogram& s);
nn::Tensor phase_tensor(const audio::Spectrogram& s);

}  // namespace spatialkd::model

#endif  // SPATIALKD_MODEL_NETWORKS_HPP_
