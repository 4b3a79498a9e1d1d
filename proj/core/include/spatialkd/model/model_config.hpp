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

#ifndef SPATIALKD_MODEL_MODEL_CONFIG_HPP_
#define SPATIALKD_MODEL_MODEL_CONFIG_HPP_

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace spatialkd::model {

inline constexpr std::size_t kEncoderStages = 5;

// Architecture of the magnitude and phase sub-networks. Kernel pairs are
// (time, frequency).
struct ModelConfig {
  std::string preset = "paper-shape";
  std::size_t freq_bins = 161;
  std::vector<std::size_t> encoder_channels{16, 32, 48, 64, 80};
  std::size_t kernel_time = 2;
  std::size_t kernel_freq = 3;
  std::size_t stride_freq = 2;
  std::size_t lstm_layers = 2;
  std::size_t phase_channels = 8;
  std::size_t phase_blocks = 3;
  std::array<std::size_t, 2> phase_kernel_a{5, 3};
  std::array<std::size_t, 2> phase_kernel_b{25, 1};

  // Throws UsageError describing the first violated constraint.
  void validate() const;

  // Frequency bins after each encoder stage.
  std::vector<std::size_t> stage_bins() const;
  // Flattened size of the concatenated left+right bottleneck; also the LSTM
  // width.
  std::size_t lstm_hidden() const;
  // Shortest input (in frames) the phase convolutions accept.
  std::size_t min_frames() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

std::vector<std::string> preset_names();
// "tiny", "small" or "paper-shape" for the given number of frequency bins.
ModelConfig make_preset(const std::string& name, std::size_t freq_bins);

std::string to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const std::string& text);

}  // namespace spatialkd::model

#endif  // SPATIALKD_MODEL_MODEL_CONFIG_HPP_
