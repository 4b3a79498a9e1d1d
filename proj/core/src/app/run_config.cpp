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

#include "spatialkd/app/run_config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "spatialkd/error.hpp"

namespace spatialkd::app {

namespace fs = std::filesystem;

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& at, const std::string& key,
                         const std::string& problem) const {
    const int line = at.Mark().line;
    throw UsageError(fmt::format("{}:{}: {}: {}", source_, line >= 0 ? line + 1 : 0, key,
                                 problem));
  }

  void require_map(const YAML::Node& node, const std::string& key) const {
    if (!node.IsMap()) fail(node, key, "expected a mapping");
  }

  void allow_keys(const YAML::Node& node, const std::string& prefix,
                  const std::set<std::string>& allowed) const {
    for (const auto& kv : node) {
      const auto name = kv.first.as<std::string>();
      if (!allowed.contains(name)) {
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
        fail(kv.first, join(prefix, name), fmt::format("unknown key (expected one of {})", list));
      }
    }
  }

  static std::string join(const std::string& prefix, const std::string& key) {
    return prefix.empty() ? key : prefix + "." + key;
  }

  long long integer(const YAML::Node& node, const std::string& key, long long lo,
                    long long hi) const {
    long long v = 0;
    if (!node.IsScalar() || !YAML::convert<long long>::decode(node, v))
      fail(node, key, "expected an integer");
    if (v < lo || v > hi) fail(node, key, fmt::format("must be in [{}, {}], got {}", lo, hi, v));
    return v;
  }

  std::size_t count(const YAML::Node& node, const std::string& key, long long lo = 0) const {
    return static_cast<std::size_t>(integer(node, key, lo, 1LL << 40));
  }

  double real(const YAML::Node& node, const std::string& key) const {
    double v = 0.0;
    if (!node.IsScalar() || !YAML::convert<double>::decode(node, v) || !std::isfinite(v))
      fail(node, key, "expected a finite number");
    return v;
  }

  bool boolean(const YAML::Node& node, const std::string& key) const {
    bool v = false;
    if (!node.IsScalar() || !YAML::convert<bool>::decode(node, v))
      fail(node, key, "expected true or false");
    return v;
  }

  std::string text(const YAML::Node& node, const std::string& key) const {
    if (!node.IsScalar()) fail(node, key, "expected a string");
    return node.as<std::string>();
  }

  // Runs `fn`, rethrowing UsageError with the location of `at`.
  template <typename Fn>
  void located(const YAML::Node& at, const std::string& key, Fn&& fn) const {
    try {
      fn();
    } catch (const UsageError& e) {
      fail(at, key, e.what());
    }
  }

 private:
  std::string source_;
};

std::pair<int, int> int_range(const Reader& r, const YAML::Node& node,
                              const std::string& key) {
  if (!node.IsSequence() || node.size() != 2) r.fail(node, key, "expected [min, max]");
  const auto lo = static_cast<int>(r.integer(node[0], key, -200, 200));
  const auto hi = static_cast<int>(r.integer(node[1], key, -200, 200));
  if (lo > hi) r.fail(node, key, fmt::format("empty range [{}, {}]", lo, hi));
  return {lo, hi};
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const fs::path& base_dir,
                           const std::string& source) {
  Reader r(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw UsageError(fmt::format("{}:{}: invalid YAML: {}", source, e.mark.line + 1, e.msg));
  }
  RunConfig cfg;
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  r.require_map(root, "<root>");
  r.allow_keys(root, "", {"seed", "stft", "model", "datasim", "train", "paths"});

  if (auto n = root["seed"]) cfg.seed = static_cast<std::uint64_t>(r.integer(n, "seed", 0, (1LL << 62)));

  if (auto s = root["stft"]) {
    r.require_map(s, "stft");
    r.allow_keys(s, "stft", {"window", "window_len", "hop", "fft_len"});
    audio::WindowKind kind = cfg.stft.kind();
    std::size_t win = cfg.stft.window_len(), hop = cfg.stft.hop(), fft = cfg.stft.fft_len();
    if (auto n = s["window"])
      r.located(n, "stft.window",
                [&] { kind = audio::window_kind_from_string(r.text(n, "stft.window")); });
    if (auto n = s["window_len"]) win = r.count(n, "stft.window_len", 1);
    if (auto n = s["hop"]) hop = r.count(n, "stft.hop", 1);
    if (auto n = s["fft_len"]) fft = r.count(n, "stft.fft_len", 1);
    r.located(s, "stft", [&] { cfg.stft = audio::StftConfig(kind, win, hop, fft); });
  }

  std::string preset = "paper-shape";
  YAML::Node model_node = root["model"];
  if (model_node) {
    r.require_map(model_node, "model");
    r.allow_keys(model_node, "model",
                 {"preset", "encoder_channels", "phase_channels", "lstm_layers",
                  "phase_blocks"});
    if (auto n = model_node["preset"]) preset = r.text(n, "model.preset");
  }
  r.located(model_node ? model_node : root, "model.preset",
            [&] { cfg.model = model::make_preset(preset, cfg.stft.bins()); });
  if (model_node) {
    if (auto n = model_node["encoder_channels"]) {
      if (!n.IsSequence() || n.size() != model::kEncoderStages)
        r.fail(n, "model.encoder_channels",
               fmt::format("expected a list of {} channel counts", model::kEncoderStages));
      for (std::size_t i = 0; i < model::kEncoderStages; ++i)
        cfg.model.encoder_channels[i] = r.count(n[i], "model.encoder_channels", 1);
    }
    if (auto n = model_node["phase_channels"])
      cfg.model.phase_channels = r.count(n, "model.phase_channels", 2);
    if (auto n = model_node["lstm_layers"])
      cfg.model.lstm_layers = r.count(n, "model.lstm_layers", 1);
    if (auto n = model_node["phase_blocks"])
      cfg.model.phase_blocks = r.count(n, "model.phase_blocks", 1);
    r.located(model_node, "model", [&] { cfg.model.validate(); });
  }

  if (auto d = root["datasim"]) {
    r.require_map(d, "datasim");
    r.allow_keys(d, "datasim",
                 {"sample_rate", "min_seconds", "max_seconds", "epsilon_db",
                  "train_snr_db", "test_snr_db", "ir_length", "n_train", "n_test"});
    auto& s = cfg.synth;
    if (auto n = d["sample_rate"]) s.sample_rate = r.real(n, "datasim.sample_rate");
    if (auto n = d["min_seconds"]) s.min_seconds = r.real(n, "datasim.min_seconds");
    if (auto n = d["max_seconds"]) s.max_seconds = r.real(n, "datasim.max_seconds");
    if (auto n = d["epsilon_db"])
      std::tie(s.epsilon_min_db, s.epsilon_max_db) = int_range(r, n, "datasim.epsilon_db");
    if (auto n = d["train_snr_db"])
      std::tie(s.train_snr_min_db, s.train_snr_max_db) =
          int_range(r, n, "datasim.train_snr_db");
    if (auto n = d["test_snr_db"]) {
      if (!n.IsSequence() || n.size() == 0)
        r.fail(n, "datasim.test_snr_db", "expected a non-empty list");
      s.test_snrs_db.clear();
      for (const auto& v : n) s.test_snrs_db.push_back(r.real(v, "datasim.test_snr_db"));
    }
    if (auto n = d["ir_length"]) s.ir_length = r.count(n, "datasim.ir_length", 1);
    if (auto n = d["n_train"]) cfg.n_train = r.count(n, "datasim.n_train", 1);
    if (auto n = d["n_test"]) cfg.n_test = r.count(n, "datasim.n_test", 1);
    r.located(d, "datasim", [&] { s.validate(); });
  }

  if (auto t = root["train"]) {
    r.require_map(t, "train");
    r.allow_keys(t, "train",
                 {"learning_rate", "batch_size", "epochs", "max_steps", "shuffle",
                  "warm_start", "loss"});
    auto& tc = cfg.train;
    if (auto n = t["learning_rate"]) tc.learning_rate = r.real(n, "train.learning_rate");
    if (auto n = t["batch_size"]) tc.batch_size = r.count(n, "train.batch_size", 1);
    if (auto n = t["epochs"]) tc.epochs = r.count(n, "train.epochs", 1);
    if (auto n = t["max_steps"]) tc.max_steps = r.count(n, "train.max_steps", 0);
    if (auto n = t["shuffle"]) tc.shuffle = r.boolean(n, "train.shuffle");
    if (auto n = t["warm_start"]) tc.warm_start = r.boolean(n, "train.warm_start");
    if (auto l = t["loss"]) {
      r.require_map(l, "train.loss");
      r.allow_keys(l, "train.loss", {"alpha", "beta", "kd_eps", "mag_loss", "kd_form"});
      auto& w = tc.loss;
      if (auto n = l["alpha"]) w.alpha = r.real(n, "train.loss.alpha");
      if (auto n = l["beta"]) w.beta = r.real(n, "train.loss.beta");
      if (auto n = l["kd_eps"]) w.kd_eps = r.real(n, "train.loss.kd_eps");
      if (auto n = l["mag_loss"])
        r.located(n, "train.loss.mag_loss", [&] {
          w.magnitude = losses::magnitude_loss_from_string(r.text(n, "train.loss.mag_loss"));
        });
      if (auto n = l["kd_form"])
        r.located(n, "train.loss.kd_form", [&] {
          w.kd_form = losses::kd_form_from_string(r.text(n, "train.loss.kd_form"));
        });
    }
    r.located(t, "train", [&] { tc.validate(); });
  }
  cfg.train.seed = cfg.seed;

  if (auto p = root["paths"]) {
    r.require_map(p, "paths");
    r.allow_keys(p, "paths", {"corpus", "checkpoints", "reports"});
    if (auto n = p["corpus"]) cfg.paths.corpus = r.text(n, "paths.corpus");
    if (auto n = p["checkpoints"]) cfg.paths.checkpoints = r.text(n, "paths.checkpoints");
    if (auto n = p["reports"]) cfg.paths.reports = r.text(n, "paths.reports");
  }
  for (fs::path* p : {&cfg.paths.corpus, &cfg.paths.checkpoints, &cfg.paths.reports})
    if (p->is_relative()) *p = (base_dir / *p).lexically_normal();
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError(fmt::format("cannot read config file {}", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), fs::absolute(path).parent_path(), path.string());
}

std::string default_config_yaml() {
  const RunConfig d;
  const auto& s = d.synth;
  const auto& t = d.train;
  std::string snrs;
  for (double v : s.test_snrs_db) snrs += fmt::format("{}{:g}", snrs.empty() ? "" : ", ", v);
  return fmt::format(
      "seed: {}\n"
      "stft:\n  window: {}\n  window_len: {}\n  hop: {}\n  fft_len: {}\n"
      "model:\n  preset: paper-shape\n"
      "datasim:\n  sample_rate: {:g}\n  min_seconds: {:g}\n  max_seconds: {:g}\n"
      "  epsilon_db: [{}, {}]\n  train_snr_db: [{}, {}]\n  test_snr_db: [{}]\n"
      "  ir_length: {}\n  n_train: {}\n  n_test: {}\n"
      "train:\n  learning_rate: {:g}\n  batch_size: {}\n  epochs: {}\n  max_steps: {}\n"
      "  shuffle: {}\n  warm_start: {}\n"
      "  loss:\n    alpha: {:g}\n    beta: {:g}\n    kd_eps: {:g}\n    mag_loss: {}\n"
      "    kd_form: {}\n"
      "paths:\n  corpus: corpus\n  checkpoints: checkpoints\n  reports: reports\n",
      d.seed, audio::to_string(d.stft.kind()), d.stft.window_len(), d.stft.hop(),
      d.stft.fft_len(), s.sample_rate, s.min_seconds, s.max_seconds, s.epsilon_min_db,
      s.epsilon_max_db, s.train_snr_min_db, s.train_snr_max_db, snrs, s.ir_length,
      d.n_train, d.n_test, t.learning_rate, t.batch_size, t.epochs, t.max_steps,
      t.shuffle, t.warm_start, t.loss.alpha, t.loss.beta, t.loss.kd_eps,
      losses::to_string(t.loss.magnitude), losses::to_string(t.loss.kd_form));
}

}  // namespace spatialkd::app
