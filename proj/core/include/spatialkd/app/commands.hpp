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

#ifndef SPATIALKD_APP_COMMANDS_HPP_
#define SPATIALKD_APP_COMMANDS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "spatialkd/metrics/evaluate.hpp"

namespace spatialkd::app {

namespace fs = std::filesystem;

// Each command throws spatialkd::Error subclasses; see exit_code().

struct SimulateOptions {
  fs::path config;
  std::optional<fs::path> out;  // defaults to paths.corpus
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_train;
  std::optional<std::size_t> n_test;
  bool force = false;
};
// Writes <out>/train.jsonl, <out>/test.jsonl and the WAVs they reference.
// Refuses a non-empty output directory unless force is set, in which case
// only the previously generated splits are replaced.
void cmd_simulate(const SimulateOptions& opts);

struct TrainOptions {
  std::string phase;  // teacher | bad_student | student
  fs::path config;
  std::optional<fs::path> ckpt_out;     // default <checkpoints>/<phase>.ckpt
  std::optional<fs::path> teacher;      // default <checkpoints>/teacher.ckpt
  std::optional<fs::path> bad_student;  // default <checkpoints>/bad_student.ckpt
  std::optional<fs::path> manifest;     // default <corpus>/train.jsonl
  std::optional<fs::path> log_csv;      // default <ckpt_out stem>_log.csv
  std::optional<double> beta;
  std::optional<bool> warm_start;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> max_steps;
};
void cmd_train(const TrainOptions& opts);

struct EnhanceOptions {
  fs::path ckpt;
  fs::path in;
  fs::path out;
};
void cmd_enhance(const EnhanceOptions& opts);

struct EvaluateOptions {
  fs::path ckpt;
  std::optional<fs::path> manifest;  // default <corpus>/test.jsonl from config
  std::optional<fs::path> config;
  std::string format = "table";  // table | csv
  std::optional<fs::path> out;
  std::vector<double> snr_conditions = metrics::kDefaultSnrConditions;
};
// Prints the report in `format` to `os` and, if set, writes it to `out`.
metrics::EvalReport cmd_evaluate(const EvaluateOptions& opts, std::ostream& os);

struct BenchOptions {
  std::optional<fs::path> ckpt;
  std::optional<fs::path> config;  // STFT used for presets; defaults otherwise
  std::vector<std::string> presets;  // all presets when empty and no ckpt
  std::string role = "student";
  double seconds = 1.0;
  std::size_t repeats = 5;
  double sample_rate = 16000.0;
};
// One line per model: params (M), FLOPs (G MACs per second of audio), RTF.
void cmd_bench(const BenchOptions& opts, std::ostream& os);

}  // namespace spatialkd::app

#endif  // SPATIALKD_APP_COMMANDS_HPP_
