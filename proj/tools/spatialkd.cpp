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

// spatialkd: simulate, train, enhance, evaluate and benchmark.
//
// Exit codes: 0 success, 1 usage error, 2 data or shape error, 3 numeric
// failure. Log verbosity comes from SPATIALKD_LOG_LEVEL (trace, debug, info,
// warn, error, off; default info). Logs go to stderr.

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "spatialkd/app/commands.hpp"
#include "spatialkd/app/run_config.hpp"
#include "spatialkd/error.hpp"

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("spatialkd");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S] [%^%l%$] %v");
  const char* level = std::getenv("SPATIALKD_LOG_LEVEL");
  spdlog::set_level(level ? spdlog::level::from_str(level) : spdlog::level::info);
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  namespace app = spatialkd::app;
  CLI::App cli{"Binaural-to-monaural distillation for speech enhancement"};
  cli.require_subcommand(1);

  app::SimulateOptions sim;
  std::uint64_t sim_seed = 0;
  std::size_t sim_train = 0, sim_test = 0;
  std::string sim_out;
  auto* simulate = cli.add_subcommand("simulate", "Generate a synthetic train/test corpus");
  simulate->add_option("config", sim.config, "Run configuration (YAML)")
      ->required()->check(CLI::ExistingFile);
  auto* sim_out_opt = simulate->add_option("--out", sim_out, "Output directory");
  auto* sim_seed_opt = simulate->add_option("--seed", sim_seed, "Corpus seed");
  auto* sim_train_opt = simulate->add_option("--n-train", sim_train, "Training records");
  auto* sim_test_opt = simulate->add_option("--n-test", sim_test, "Test records");
  simulate->add_flag("--force", sim.force, "Replace an existing corpus");

  app::TrainOptions tr;
  std::string tr_ckpt, tr_teacher, tr_bad, tr_manifest, tr_log;
  double tr_beta = 0.0;
  std::size_t tr_epochs = 0, tr_steps = 0;
  bool tr_warm = false;
  auto* train = cli.add_subcommand("train", "Train one phase: teacher, bad_student, student");
  train->add_option("phase", tr.phase, "Training phase")
      ->required()->check(CLI::IsMember({"teacher", "bad_student", "student"}));
  train->add_option("config", tr.config, "Run configuration (YAML)")
      ->required()->check(CLI::ExistingFile);
  auto* tr_ckpt_opt = train->add_option("--ckpt-out", tr_ckpt, "Output checkpoint");
  auto* tr_teacher_opt = train->add_option("--teacher", tr_teacher, "Frozen teacher checkpoint");
  auto* tr_bad_opt = train->add_option("--bad-student", tr_bad, "Frozen bad-student checkpoint");
  auto* tr_manifest_opt = train->add_option("--manifest", tr_manifest, "Training manifest");
  auto* tr_log_opt = train->add_option("--log", tr_log, "Per-epoch CSV log");
  auto* tr_beta_opt = train->add_option("--beta", tr_beta, "Distillation weight override");
  auto* tr_epochs_opt = train->add_option("--epochs", tr_epochs, "Epoch count override");
  auto* tr_steps_opt = train->add_option("--max-steps", tr_steps, "Optimizer step limit");
  auto* tr_warm_opt = train->add_flag("--warm-start", tr_warm,
                                      "Initialize the student from the bad student");

  app::EnhanceOptions en;
  auto* enhance = cli.add_subcommand("enhance", "Enhance one WAV file");
  enhance->add_option("ckpt", en.ckpt, "Model checkpoint")->required()->check(CLI::ExistingFile);
  enhance->add_option("in", en.in, "Input WAV")->required()->check(CLI::ExistingFile);
  enhance->add_option("out", en.out, "Output WAV")->required();

  app::EvaluateOptions ev;
  std::string ev_manifest, ev_config, ev_out;
  auto* evaluate = cli.add_subcommand("evaluate", "STOI / SI-SDR per SNR condition");
  evaluate->add_option("ckpt", ev.ckpt, "Model checkpoint")->required()->check(CLI::ExistingFile);
  auto* ev_manifest_opt = evaluate->add_option("--manifest", ev_manifest, "Test manifest");
  auto* ev_config_opt = evaluate->add_option("--config", ev_config, "Run configuration");
  evaluate->add_option("--format", ev.format, "table or csv")
      ->check(CLI::IsMember({"table", "csv"}));
  auto* ev_out_opt = evaluate->add_option("--out", ev_out, "Also write the report here");
  evaluate->add_option("--snr", ev.snr_conditions, "SNR conditions in dB");

  app::BenchOptions be;
  std::string be_ckpt, be_config;
  auto* bench = cli.add_subcommand("bench", "Parameters, FLOPs and real-time factor");
  auto* be_ckpt_opt = bench->add_option("--ckpt", be_ckpt, "Model checkpoint");
  auto* be_config_opt = bench->add_option("--config", be_config, "Run configuration");
  bench->add_option("--preset", be.presets, "Preset(s) when no checkpoint is given");
  bench->add_option("--role", be.role, "Role for preset models")
      ->check(CLI::IsMember({"teacher", "bad_student", "student"}));
  bench->add_option("--seconds", be.seconds, "Audio duration per run");
  bench->add_option("--repeats", be.repeats, "Timed runs (median reported)");

  cli.add_subcommand("default-config", "Print the default configuration");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = cli.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (simulate->parsed()) {
      if (*sim_out_opt) sim.out = sim_out;
      if (*sim_seed_opt) sim.seed = sim_seed;
      if (*sim_train_opt) sim.n_train = sim_train;
      if (*sim_test_opt) sim.n_test = sim_test;
      app::cmd_simulate(sim);
    } else if (train->parsed()) {
      if (*tr_ckpt_opt) tr.ckpt_out = tr_ckpt;
      if (*tr_teacher_opt) tr.teacher = tr_teacher;
      if (*tr_bad_opt) tr.bad_student = tr_bad;
      if (*tr_manifest_opt) tr.manifest = tr_manifest;
      if (*tr_log_opt) tr.log_csv = tr_log;
      if (*tr_beta_opt) tr.beta = tr_beta;
      if (*tr_epochs_opt) tr.epochs = tr_epochs;
      if (*tr_steps_opt) tr.max_steps = tr_steps;
      if (*tr_warm_opt) tr.warm_start = tr_warm;
      app::cmd_train(tr);
    } else if (enhance->parsed()) {
      app::cmd_enhance(en);
    } else if (evaluate->parsed()) {
      if (*ev_manifest_opt) ev.manifest = ev_manifest;
      if (*ev_config_opt) ev.config = ev_config;
      if (*ev_out_opt) ev.out = ev_out;
      app::cmd_evaluate(ev, std::cout);
    } else if (bench->parsed()) {
      if (*be_ckpt_opt) be.ckpt = be_ckpt;
      if (*be_config_opt) be.config = be_config;
      app::cmd_bench(be, std::cout);
    } else {
      std::cout << app::default_config_yaml();
    }
  } catch (const spatialkd::Error& e) {
    spdlog::error("{}", e.what());
    return spatialkd::exit_code(e);
  } catch (const std::filesystem::filesystem_error& e) {
    spdlog::error("{}", e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("unexpected error: {}", e.what());
    return 2;
  }
  return 0;
}
