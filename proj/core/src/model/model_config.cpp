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

#include "spatialkd/model/model_config.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <json.hpp>

#include "spatialkd/error.hpp"

namespace spatialkd::model {

void ModelConfig::validate() const {
  if (encoder_channels.size() != kEncoderStages)
    throw UsageError(fmt::format("model: need exactly {} encoder stages, got {}",
                                 kEncoderStages, encoder_channels.size()));
  for (auto c : encoder_channels)
    if (c == 0) throw UsageError("model: encoder channels must be >= 1");
  if (freq_bins == 0 || kernel_time == 0 || kernel_freq == 0 || stride_freq == 0 ||
      lstm_layers == 0 || phase_channels < 2 || phase_blocks == 0)
    throw UsageError("model: all sizes must be >= 1 (phase_channels >= 2)");
  if (phase_channels % 2 != 0)
    throw UsageError("model: phase_channels must be even (split between "
                     "magnitude and phase projections)");
  for (auto k : {phase_kernel_a, phase_kernel_b})
    if (k[0] == 0 || k[1] == 0 || k[0] % 2 == 0 || k[1] % 2 == 0)
      throw UsageError("model: phase kernels must be odd-sized for same padding");
  std::size_t f = freq_bins;
  for (std::size_t i = 0; i < kEncoderStages; ++i) {
    if (f < kernel_freq)
      throw UsageError(fmt::format(
          "model: {} frequency bins cannot pass encoder stage {} (kernel {}, "
          "stride {})",
          freq_bins, i + 1, kernel_freq, stride_freq));
    f = (f - kernel_freq) / stride_freq + 1;
  }
}

std::vector<std::size_t> ModelConfig::stage_bins() const {
  std::vector<std::size_t> bins;
  std::size_t f = freq_bins;
  for (std::size_t i = 0; i < kEncoderStages; ++i) {
    f = (f - kernel_freq) / stride_freq + 1;
    bins.push_back(f);
  }
  return bins;
}

std::size_t ModelConfig::lstm_hidden() const {
  return 2 * encoder_channels.back() * stage_bins().back();
}

std::size_t ModelConfig::min_frames() const {
  return std::max({kernel_time, phase_kernel_a[0], phase_kernel_b[0]});
}

std::vector<std::string> preset_names() { return {"tiny", "small", "paper-shape"}; }

ModelConfig make_preset(const std::string& name, std::size_t freq_bins) {
  ModelConfig cfg;
  cfg.preset = name;
  cfg.freq_bins = freq_bins;
  if (name == "tiny") {
    cfg.encoder_channels = {4, 8, 8, 16, 16};
    cfg.phase_channels = 4;
  } else if (name == "small") {
    cfg.encoder_channels = {8, 16, 16, 32, 32};
    cfg.phase_channels = 8;
  } else if (name != "paper-shape") {
    throw UsageError(fmt::format("unknown model preset '{}' (expected one of {})",
                                 name, fmt::join(preset_names(), ", ")));
  }
  cfg.validate();
  return cfg;
}

std::string to_json(const ModelConfig& cfg) {
  nlohmann::json j;
  j["preset"] = cfg.preset;
  j["freq_bins"] = cfg.freq_bins;
  j["encoder_channels"] = cfg.encoder_channels;
  j["kernel_time"] = cfg.kernel_time;
  j["kernel_freq"] = cfg.kernel_freq;
  j["stride_freq"] = cfg.stride_freq;
  j["lstm_layers"] = cfg.lstm_layers;
  j["phase_channels"] = cfg.phase_channels;
  j["phase_blocks"] = cfg.phase_blocks;
  j["phase_kernel_a"] = cfg.phase_kernel_a;
  j["phase_kernel_b"] = cfg.phase_kernel_b;
  return j.dump();
}

ModelConfig model_config_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    ModelConfig cfg;
    cfg.preset = j.at("preset").get<std::string>();
    cfg.freq_bins = j.at("freq_bins").get<std::size_t>();
    cfg.encoder_channels = j.at("encoder_channels").get<std::vector<std::size_t>>();
    cfg.kernel_time = j.at("kernel_time").get<std::size_t>();
    cfg.kernel_freq = j.at("kernel_freq").get<std::size_t>();
    cfg.stride_freq = j.at("stride_freq").get<std::size_t>();
    cfg.lstm_layers = j.at("lstm_layers").get<std::size_t>();
    cfg.phase_channels = j.at("phase_channels").get<std::size_t>();
    cfg.phase_blocks = j.at("phase_blocks").get<std::size_t>();
    cfg.phase_kernel_a = j.at("phase_kernel_a").get<std::array<std::size_t, 2>>();
    cfg.phase_kernel_b = j.at("phase_kernel_b").get<std::array<std::size_t, 2>>();
    cfg.validate();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(fmt::format("invalid model architecture JSON: {}", e.what()));
  }
}

}  // namespace spatialkd::model
