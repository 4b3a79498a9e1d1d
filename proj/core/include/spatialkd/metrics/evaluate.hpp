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

#ifndef SPATIALKD_METRICS_EVALUATE_HPP_
#define SPATIALKD_METRICS_EVALUATE_HPP_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "spatialkd/audio/waveform.hpp"
#include "spatialkd/datasim/manifest.hpp"
#include "spatialkd/model/networks.hpp"

namespace spatialkd::metrics {

struct ConditionRow {
  double snr_db = 0.0;
  double stoi_percent = 0.0;  // clipped to [0, 100]
  double si_sdr_db = 0.0;
  std::size_t n_utterances = 0;
};

// FLOPs are multiply-accumulates per second of audio. rtf is optional so
// that reports stay reproducible; it is filled by the benchmark path.
struct ModelStats {
  double params_m = 0.0;
  double flops_g = 0.0;
  std::optional<double> rtf;
};

struct EvalReport {
  std::string model;
  std::vector<ConditionRow> unprocessed;
  std::vector<ConditionRow> processed;
  std::optional<ModelStats> stats;

  std::string to_table() const;
  std::string to_csv() const;
};

// Waveforms of one test record as read from disk.
struct EvalItem {
  const datasim::ManifestEntry* entry = nullptr;
  audio::Waveform clean;
  audio::Waveform mono;
  audio::Waveform left;   // empty when the record has no binaural mixture
  audio::Waveform right;
};

// Produces an estimate of item.clean from the item's mixtures. Must return
// exactly item.mono.size() samples.
using Enhancer = std::function<audio::Waveform(const EvalItem&)>;

inline const std::vector<double> kDefaultSnrConditions{-5.0, 0.0, 5.0, 10.0};

// Mean STOI and SI-SDR per SNR condition, for the unprocessed mixture and for
// the enhancer output. Records are matched to conditions by their target
// SNR; records at other SNRs are ignored. Throws DataError when a condition
// has no records.
EvalReport evaluate(const std::vector<datasim::ManifestEntry>& entries,
                    const Enhancer& enhancer, const std::string& model_name,
                    const std::vector<double>& snr_conditions = kDefaultSnrConditions);

// Enhancer backed by a network: enhance_waveform for students, the binaural
// path with the monaural phase for the teacher.
Enhancer network_enhancer(model::Network& net);

// Identity: returns the monaural mixture.
audio::Waveform passthrough(const EvalItem& item);

}  // namespace spatialkd::metrics

#endif  // SPATIALKD_METRICS_EVALUATE_HPP_
