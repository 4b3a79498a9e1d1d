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

#include "spatialkd/app/commands.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "spatialkd/app/run_config.hpp"
#include "spatialkd/audio/wav_io.hpp"
#include "spatialkd/datasim/synth.hpp"
#include "spatialkd/error.hpp"
#include "spatialkd/metrics/complexity.hpp"
#include "spatialkd/metrics/rtf.hpp"
#include "spatialkd/nn/checkpoint.hpp"
#include "spatialkd/train/trainer.hpp"

namespace spatialkd::app {

using model::ModelRole;
using model::Network;

namespace {

Network load_network(const fs::path& path) {
  if (!fs::exists(path))
    throw UsageError(fmt::format("checkpoint {} does not exist", path.string()));
  return Network::from_checkpoint(nn::load_checkpoint(path));
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void write_text(const fs::path& path, const std::string& text) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out.flush())
    throw DataError(fmt::format("cannot write {}", path.string()));
}

}  // namespace

void cmd_simulate(const SimulateOptions& opts) {
  const RunConfig cfg = load_run_config(opts.config);
  const fs::path out = opts.out.value_or(cfg.paths.corpus);
  const std::uint64_t seed = opts.seed.value_or(cfg.seed);
  const std::size_t n_train = opts.n_train.value_or(cfg.n_train);
  const std::size_t n_test = opts.n_test.value_or(cfg.n_test);
  if (n_train == 0 || n_test == 0) throw UsageError("--n-train and --n-test must be >= 1");

  if (fs::exists(out) && !fs::is_empty(out)) {
    if (!opts.force)
      throw UsageError(fmt::format(
          "output directory {} is not empty; pass --force to regenerate", out.string()));
    for (const char* split : {"train", "test"}) {
      fs::remove_all(out / split);
      fs::remove(out / fmt::format("{}.jsonl", split));
    }
  }
  fs::create_directories(out);
  spdlog::info("simulating {} train and {} test records into {} (seed {})", n_train,
               n_test, out.string(), seed);
  datasim::synth_corpus(cfg.synth, datasim::Split::kTrain, n_train, seed, out);
  datasim::synth_corpus(cfg.synth, datasim::Split::kTest, n_test, seed, out);
}

void cmd_train(const TrainOptions& opts) {
  const ModelRole role = model::role_from_string(opts.phase);
  RunConfig cfg = load_run_config(opts.config);
  if (opts.beta) cfg.train.loss.beta = *opts.beta;
  if (opts.warm_start) cfg.train.warm_start = *opts.warm_start;
  if (opts.epochs) cfg.train.epochs = *opts.epochs;
  if (opts.max_steps) cfg.train.max_steps = *opts.max_steps;
  cfg.train.validate();
  if (cfg.train.warm_start && role != ModelRole::kStudent)
    throw UsageError("warm_start only applies to the student phase");

  const fs::path ckpt_out =
      opts.ckpt_out.value_or(cfg.paths.checkpoints / fmt::format("{}.ckpt", opts.phase));
  const fs::path log_csv = opts.log_csv.value_or(
      ckpt_out.parent_path() / fmt::format("{}_log.csv", ckpt_out.stem().string()));
  const fs::path manifest = opts.manifest.value_or(cfg.paths.corpus / "train.jsonl");

  std::optional<Network> teacher, bad;
  if (role == ModelRole::kStudent) {
    const fs::path tp = opts.teacher.value_or(cfg.paths.checkpoints / "teacher.ckpt");
    const fs::path bp = opts.bad_student.value_or(cfg.paths.checkpoints / "bad_student.ckpt");
    std::string missing;
    if (!fs::exists(tp)) missing += fmt::format(" teacher ({})", tp.string());
    if (!fs::exists(bp)) missing += fmt::format(" bad student ({})", bp.string());
    if (!missing.empty())
      throw UsageError("student phase needs frozen checkpoints; missing:" + missing);
    teacher.emplace(load_network(tp));
    bad.emplace(load_network(bp));
  }

  const auto entries = datasim::read_manifest(manifest);
  const auto data =
      train::load_utterances(entries, cfg.stft, role != ModelRole::kBadStudent);
  Network net = train::make_initial(role, cfg.model, cfg.stft, cfg.train,
                                    bad ? &*bad : nullptr);
  train::References refs;
  if (teacher) refs = {&*teacher, &*bad};
  spdlog::info("training {} on {} records ({} parameters)", opts.phase, data.size(),
               nn::count_trainable(net.state()));
  const auto result = train::train(net, data, cfg.train, refs);

  ensure_parent(ckpt_out);
  nn::save_checkpoint(ckpt_out, net.to_checkpoint());
  ensure_parent(log_csv);
  train::write_log_csv(log_csv, result.epochs);
  spdlog::info("wrote {} and {}", ckpt_out.string(), log_csv.string());
}

void cmd_enhance(const EnhanceOptions& opts) {
  Network net = load_network(opts.ckpt);
  const auto channels = audio::read_wav(opts.in);
  audio::Waveform mono = channels.at(0);
  if (channels.size() > 1) {
    for (std::size_t i = 0; i < mono.size(); ++i)
      mono.samples[i] = 0.5 * (channels[0].samples[i] + channels[1].samples[i]);
  }
  audio::Waveform out;
  if (net.role() == ModelRole::kTeacher) {
    if (channels.size() < 2)
      throw DataError("the teacher needs a two-channel (binaural) input");
    out = model::teacher_waveform(net, channels[0], channels[1], mono);
  } else {
    if (channels.size() > 1) spdlog::warn("averaging {} channels to mono", channels.size());
    out = model::enhance_waveform(net, mono);
  }
  ensure_parent(opts.out);
  audio::write_wav(opts.out, out);
}

metrics::EvalReport cmd_evaluate(const EvaluateOptions& opts, std::ostream& os) {
  if (opts.format != "table" && opts.format != "csv")
    throw UsageError(fmt::format("unknown --format '{}' (expected table or csv)", opts.format));
  fs::path manifest;
  if (opts.manifest) {
    manifest = *opts.manifest;
  } else if (opts.config) {
    manifest = load_run_config(*opts.config).paths.corpus / "test.jsonl";
  } else {
    throw UsageError("evaluate needs --manifest or --config");
  }
  Network net = load_network(opts.ckpt);
  const auto entries = datasim::read_manifest(manifest);
  metrics::EvalReport report = metrics::evaluate(entries, metrics::network_enhancer(net),
                                                 model::to_string(net.role()),
                                                 opts.snr_conditions);
  const double rate = audio::read_wav(entries.front().mono).at(0).sample_rate;
  metrics::ModelStats stats;
  stats.params_m = static_cast<double>(metrics::count_params(net)) / 1e6;
  stats.flops_g =
      static_cast<double>(metrics::macs_per_second(net.config(), net.role(), net.stft(), rate)) /
      1e9;
  report.stats = stats;
  const std::string text = opts.format == "csv" ? report.to_csv() : report.to_table();
  os << text;
  if (opts.out) write_text(*opts.out, text);
  return report;
}

void cmd_bench(const BenchOptions& opts, std::ostream& os) {
  if (!(opts.seconds > 0.0)) throw UsageError("--seconds must be > 0");
  if (opts.repeats == 0) throw UsageError("--repeats must be >= 1");
  std::vector<Network> nets;
  std::vector<std::string> names;
  if (opts.ckpt) {
    nets.push_back(load_network(*opts.ckpt));
    names.push_back(nets.back().config().preset);
  } else {
    const RunConfig cfg = opts.config ? load_run_config(*opts.config) : RunConfig{};
    const ModelRole role = model::role_from_string(opts.role);
    const auto presets = opts.presets.empty() ? model::preset_names() : opts.presets;
    for (const auto& p : presets) {
      nets.emplace_back(role, model::make_preset(p, cfg.stft.bins()), cfg.stft, cfg.seed);
      names.push_back(p);
    }
  }
  const auto n = static_cast<std::size_t>(std::lround(opts.seconds * opts.sample_rate));
  audio::Waveform input;
  input.sample_rate = opts.sample_rate;
  input.samples.resize(n);
  std::mt19937_64 rng(0);
  std::normal_distribution<double> g(0.0, 0.05);
  for (auto& v : input.samples) v = g(rng);

  for (std::size_t i = 0; i < nets.size(); ++i) {
    Network& net = nets[i];
    const double params_m = static_cast<double>(metrics::count_params(net)) / 1e6;
    const double flops_g = static_cast<double>(metrics::macs_per_second(
                               net.config(), net.role(), net.stft(), opts.sample_rate)) /
                           1e9;
    const double rtf = metrics::measure_rtf(net, input, opts.repeats);
    os << fmt::format("model={} role={} params_m={:.6f} flops_g={:.6f} rtf={:.6f}\n",
                      names[i], model::to_string(net.role()), params_m, flops_g, rtf);
  }
}

}  // namespace spatialkd::app
