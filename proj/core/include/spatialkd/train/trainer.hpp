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

#ifndef SPATIALKD_TRAIN_TRAINER_HPP_
#define SPATIALKD_TRAIN_TRAINER_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "spatialkd/losses/losses.hpp"
#include "spatialkd/model/networks.hpp"
#include "spatialkd/train/batch.hpp"

namespace spatialkd::train {

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 4;
  std::size_t epochs = 10;
  // Stop after this many optimizer steps; 0 means no limit.
  std::size_t max_steps = 0;
  std::uint64_t seed = 0;
  bool shuffle = true;
  // Student only: start from the bad student's parameters.
  bool warm_start = false;
  losses::LossWeights loss;

  // Throws UsageError naming the offending field.
  void validate() const;
};

// Loss components of one batch. Components a phase does not use are zero.
struct StepLosses {
  nn::Tensor l_rl, l_ts, l_bs, l_kd_total, l_total;
};

struct LossValues {
  double l_rl = 0.0, l_ts = 0.0, l_bs = 0.0, l_kd_total = 0.0, l_total = 0.0;
};

LossValues values(const StepLosses& s);

struct EpochLog {
  std::size_t epoch = 0;
  LossValues mean;
  double wall_seconds = 0.0;
};

struct TrainResult {
  std::vector<EpochLog> epochs;
  std::vector<LossValues> steps;
};

// Frozen references for the student phase.
struct References {
  model::Network* teacher = nullptr;
  model::Network* bad_student = nullptr;
};

// Builds the phase objective for `model` on one batch:
//   teacher:      magnitude term only, on the binaural mixture
//   bad student:  reconstruction loss on the monaural mixture
//   student:      reconstruction + beta * L_TS / max(L_BS, eps), with the
//                 references run in kFrozenBatch mode without a graph
// `mode` applies to `model` itself.
StepLosses compute_losses(model::Network& model, const Batch& batch,
                          const losses::LossWeights& weights, const References& refs,
                          nn::NormMode mode = nn::NormMode::kTrain);

// Optimizes `model` according to its role. Throws UsageError when the
// student's references are missing or have the wrong role, ShapeError when
// their taps disagree with the student's, and NumericError on a non-finite
// loss or gradient.
TrainResult train(model::Network& model, const std::vector<Utterance>& data,
                  const TrainConfig& cfg, const References& refs = {},
                  const std::function<void(std::size_t step, const LossValues&)>&
                      on_step = nullptr);

// Initial network for a phase. Same seed gives the same parameters for the
// student and bad student; warm_start copies the bad student's state.
model::Network make_initial(model::ModelRole role, const model::ModelConfig& cfg,
                            const audio::StftConfig& stft, const TrainConfig& train_cfg,
                            const model::Network* bad_student = nullptr);

// One row per epoch: epoch,l_rl,l_ts,l_bs,l_kd_total,l_total,wall_seconds
void write_log_csv(const std::filesystem::path& path, const std::vector<EpochLog>& log);

}  // namespace spatialkd::train

#endif  // SPATIALKD_TRAIN_TRAINER_HPP_
