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

#include "spatialkd/metrics/evaluate.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "spatialkd/audio/wav_io.hpp"
#include "spatialkd/error.hpp"
#include "spatialkd/metrics/si_sdr.hpp"
#include "spatialkd/metrics/stoi.hpp"

namespace spatialkd::metrics {

namespace {

audio::Waveform load_mono(const std::string& path) {
  return audio::read_wav(path).at(0);
}

struct Accumulator {
  double stoi = 0.0;
  double si_sdr = 0.0;
  std::size_t n = 0;

  void add(const audio::Waveform& clean, const audio::Waveform& est) {
    stoi += std::clamp(100.0 * metrics::stoi(clean, est), 0.0, 100.0);
    si_sdr += metrics::si_sdr(clean.samples, est.samples);
    ++n;
  }
  ConditionRow row(double snr) const {
    const double d = static_cast<double>(n);
    return {snr, stoi / d, si_sdr / d, n};
  }
};

}  // namespace

EvalReport evaluate(const std::vector<datasim::ManifestEntry>& entries,
                    const Enhancer& enhancer, const std::string& model_name,
                    const std::vector<double>& snr_conditions) {
  if (snr_conditions.empty()) throw UsageError("evaluate: no SNR conditions");
  std::vector<Accumulator> before(snr_conditions.size()), after(snr_conditions.size());
  for (const auto& e : entries) {
    const auto it = std::find_if(snr_conditions.begin(), snr_conditions.end(),
                                 [&](double s) { return std::abs(s - e.snr_db) < 1e-9; });
    if (it == snr_conditions.end()) continue;
    const auto c = static_cast<std::size_t>(it - snr_conditions.begin());
    EvalItem item;
    item.entry = &e;
    item.clean = load_mono(e.clean);
    item.mono = load_mono(e.mono);
    if (e.has_binaural()) {
      item.left = load_mono(e.left);
      item.right = load_mono(e.right);
    }
    if (item.clean.size() != item.mono.size())
      throw ShapeError(fmt::format("record '{}': clean and mixture lengths differ", e.id));
    const audio::Waveform est = enhancer(item);
    if (est.size() != item.mono.size())
      throw ShapeError(fmt::format("record '{}': enhancer returned {} samples, expected {}",
                                   e.id, est.size(), item.mono.size()));
    before[c].add(item.clean, item.mono);
    after[c].add(item.clean, est);
  }
  EvalReport report;
  report.model = model_name;
  for (std::size_t c = 0; c < snr_conditions.size(); ++c) {
    if (before[c].n == 0)
      throw DataError(fmt::format("evaluate: no test records at {} dB SNR",
                                  snr_conditions[c]));
    report.unprocessed.push_back(before[c].row(snr_conditions[c]));
    report.processed.push_back(after[c].row(snr_conditions[c]));
  }
  return report;
}

Enhancer network_enhancer(model::Network& net) {
  if (net.role() == model::ModelRole::kTeacher) {
    return [&net](const EvalItem& item) {
      if (item.left.samples.empty())
        throw DataError(fmt::format("record '{}' has no binaural mixture for the teacher",
                                    item.entry ? item.entry->id : ""));
      return model::teacher_waveform(net, item.left, item.right, item.mono);
    };
  }
  return [&net](const EvalItem& item) { return model::enhance_waveform(net, item.mono); };
}

audio::Waveform passthrough(const EvalItem& item) { return item.mono; }

std::string EvalReport::to_table() const {
  std::string out = fmt::format("model: {}\n", model);
  out += fmt::format("{:<10} {:<12}", "metric", "model");
  for (const auto& r : processed) out += fmt::format(" {:>9}", fmt::format("{:g} dB", r.snr_db));
  out += "\n";
  auto line = [&](const char* metric, const std::string& name,
                  const std::vector<ConditionRow>& rows, bool stoi_col) {
    out += fmt::format("{:<10} {:<12}", metric, name);
    for (const auto& r : rows)
      out += fmt::format(" {:>9.2f}", stoi_col ? r.stoi_percent : r.si_sdr_db);
    out += "\n";
  };
  line("STOI(%)", "unprocessed", unprocessed, true);
  line("STOI(%)", model, processed, true);
  line("SI-SDR(dB)", "unprocessed", unprocessed, false);
  line("SI-SDR(dB)", model, processed, false);
  out += fmt::format("{:<10} {:<12}", "records", "");
  for (const auto& r : processed) out += fmt::format(" {:>9}", r.n_utterances);
  out += "\n";
  if (stats) {
    out += "\nparams(M)  FLOPs(G/s, MAC=1)  RTF\n";
    out += fmt::format("{:<10.4f} {:<18.4f} {}\n", stats->params_m, stats->flops_g,
                       stats->rtf ? fmt::format("{:.4f}", *stats->rtf) : "-");
  }
  return out;
}

std::string EvalReport::to_csv() const {
  std::string out = "model,snr_db,stoi_percent,si_sdr_db,n_utterances\n";
  auto rows = [&](const std::string& name, const std::vector<ConditionRow>& rs) {
    for (const auto& r : rs)
      out += fmt::format("{},{:g},{:.6f},{:.6f},{}\n", name, r.snr_db, r.stoi_percent,
                         r.si_sdr_db, r.n_utterances);
  };
  rows("unprocessed", unprocessed);
  rows(model, processed);
  if (stats) {
    out += "\nparams_m,flops_g,rtf\n";
    out += fmt::format("{:.6f},{:.6f},{}\n", stats->params_m, stats->flops_g,
                       stats->rtf ? fmt::format("{:.6f}", *stats->rtf) : "");
  }
  return out;
}

}  // namespace spatialkd::metrics
