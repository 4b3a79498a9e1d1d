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

#ifndef SPATIALKD_APP_RUN_CONFIG_HPP_
#define SPATIALKD_APP_RUN_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>

#include "spatialkd/audio/stft.hpp"
#include "spatialkd/datasim/synth.hpp"
#include "spatialkd/model/model_config.hpp"
#include "spatialkd/train/trainer.hpp"

namespace spatialkd::app {

struct Paths {
  std::filesystem::path corpus = "corpus";
  std::filesystem::path checkpoints = "checkpoints";
  std::filesystem::path reports = "reports";
};

// Everything a pipeline run needs. All randomness derives from `seed`.
struct RunConfig {
  std::uint64_t seed = 0;
  audio::StftConfig stft;
  model::ModelConfig model;  // preset resolved against stft.bins()
  datasim::SynthConfig synth;
  std::size_t n_train = 64;
  std::size_t n_test = 16;
  train::TrainConfig train;
  Paths paths;  // absolute after loading
};

// Parses YAML text. Relative paths resolve against `base_dir`. Every error
// is a UsageError of the form "<source>:<line>: <key>: <problem>".
RunConfig parse_run_config(const std::string& text,
                           const std::filesystem::path& base_dir,
                           const std::string& source = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);

// Default configuration rendered as YAML (the documented grammar).
std::string default_config_yaml();

}  // namespace spatialkd::app

#endif  // SPATIALKD_APP_RUN_CONFIG_HPP_
