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

#include "spatialkd/train/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "spatialkd/datasim/synth.hpp"
#include "spatialkd/error.hpp"
#include "spatialkd/train/adam.hpp"

namespace spatialkd::train {

using model::ModelRole;
using nn::Tensor;

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw UsageError(fmt::format("train.learning_rate must be > 0, got {}", learning_rate));
  if (batch_size == 0) throw UsageError("train.batch_size must be >= 1");
  if (epochs == 0) throw UsageError("train.epochs must be >= 1");
  loss.validate();
}

LossValues values(const StepLosses& s) {
  auto v = [](const Tensor& t) { return t.numel() == 0 ? 0.0 : t.item(); };
  return {v(s.l_rl), v(s.l_ts), v(s.l_bs), v(s.l_kd_total), v(s.l_total)};
}

StepLosses compute_losses(model::Network& model, const Batch& batch,
                          const losses::LossWeights& weights, const References& refs,
                          nn::NormMode mode) {
  const std::span<const std::size_t> lengths = batch.lengths;
  StepLosses s;
  const Tensor zero = Tensor::scalar(0.0);
  s.l_ts = s.l_bs = s.l_kd_total = zero;
  if (model.role() == ModelRole::kTeacher) {
    auto out = model.binaural(batch.left_mag, batch.right_mag, mode, lengths);
    s.l_rl = losses::magnitude_loss(out.magnitude, batch.clean_mag, weights.magnitude,
                                    lengths);
    s.l_total = s.l_rl;
    return s;
  }
  auto out = model.enhance(batch.mono_mag, batch.mono_phase, mode, lengths);
  s.l_rl = losses::reconstruction_loss(out.magnitude, batch.clean_mag, out.phase,
                                       batch.clean_phase, weights.alpha,
                                       weights.magnitude, lengths);
  s.l_total = s.l_rl;
  if (model.role() == ModelRole::kBadStudent) return s;

  if (!refs.teacher || !refs.bad_student)
    throw UsageError("student training needs a teacher and a bad student");
  model::EncoderTaps teacher_taps, bad_taps;
  {
    nn::NoGradGuard no_grad;
    teacher_taps = refs.teacher
                       ->binaural(batch.left_mag, batch.right_mag,
                                  nn::NormMode::kFrozenBatch, lengths)
                       .taps;
    // The monaural input feeds both encoders, as in enhance().
    bad_taps = refs.bad_student
                   ->binaural(batch.mono_mag, batch.mono_mag, nn::NormMode::kFrozenBatch,
                              lengths)
                   .taps;
  }
  s.l_ts = losses::kd_loss(out.taps, teacher_taps, weights.kd_form, lengths);
  s.l_bs = losses::kd_loss(out.taps, bad_taps, weights.kd_form, lengths);
  s.l_kd_total = losses::kd_total(s.l_ts, s.l_bs, weights.kd_eps);
  if (weights.beta != 0.0) s.l_total = losses::total_loss(s.l_rl, s.l_kd_total, weights.beta);
  return s;
}

namespace {

void check_references(const model::Network& student, const References& refs) {
  if (!refs.teacher || !refs.bad_student)
    throw UsageError("student training needs both a teacher and a bad-student checkpoint");
  if (refs.teacher->role() != ModelRole::kTeacher)
    throw UsageError(fmt::format("teacher reference has role '{}'",
                                 model::to_string(refs.teacher->role())));
  if (refs.bad_student->role() != ModelRole::kBadStudent)
    throw UsageError(fmt::format("bad-student reference has role '{}'",
                                 model::to_string(refs.bad_student->role())));
  for (const model::Network* ref : {refs.teacher, refs.bad_student})
    if (!(ref->stft() == student.stft()))
      throw ShapeError(fmt::format("{} uses a different STFT than the student",
                                   model::to_string(ref->role())));
}

void accumulate(LossValues& acc, const LossValues& v) {
  acc.l_rl += v.l_rl;
  acc.l_ts += v.l_ts;
  acc.l_bs += v.l_bs;
  acc.l_kd_total += v.l_kd_total;
  acc.l_total += v.l_total;
}

LossValues divided(LossValues v, double n) {
  v.l_rl /= n;
  v.l_ts /= n;
  v.l_bs /= n;
  v.l_kd_total /= n;
  v.l_total /= n;
  return v;
}

}  // namespace

TrainResult train(model::Network& model, const std::vector<Utterance>& data,
                  const TrainConfig& cfg, const References& refs,
                  const std::function<void(std::size_t, const LossValues&)>& on_step) {
  cfg.validate();
  if (data.empty()) throw DataError("training set is empty");
  const ModelRole role = model.role();
  const bool binaural = role != ModelRole::kBadStudent;
  if (role == ModelRole::kStudent) {
    check_references(model, refs);
    refs.teacher->set_frozen(true);
    refs.bad_student->set_frozen(true);
  }
  for (const auto& u : data)
    if (binaural && !u.has_binaural())
      throw DataError(fmt::format("record '{}' has no binaural mixture", u.id));

  model.set_frozen(false);
  nn::ParamList params;
  for (auto& p : model.state())
    if (p.trainable) params.push_back(p);
  Adam adam(params, {.learning_rate = cfg.learning_rate});

  const std::size_t min_frames = model.config().min_frames();
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  std::size_t step = 0;
  bool done = false;
  for (std::size_t epoch = 1; epoch <= cfg.epochs && !done; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    if (cfg.shuffle) {
      std::mt19937_64 rng(datasim::mix_seed(cfg.seed ^ (0xE90C0000ULL + epoch)));
      std::shuffle(order.begin(), order.end(), rng);
    }
    LossValues acc;
    std::size_t batches = 0;
    for (std::size_t first = 0; first < order.size(); first += cfg.batch_size) {
      std::vector<const Utterance*> items;
      for (std::size_t i = first; i < std::min(order.size(), first + cfg.batch_size); ++i)
        items.push_back(&data[order[i]]);
      const Batch batch = make_batch(items, min_frames, binaural);

      adam.zero_grad();
      const StepLosses losses = compute_losses(model, batch, cfg.loss, refs);
      const LossValues v = values(losses);
      if (!std::isfinite(v.l_total))
        throw NumericError(fmt::format(
            "non-finite loss at epoch {} step {} (l_rl={}, l_ts={}, l_bs={})", epoch,
            step + 1, v.l_rl, v.l_ts, v.l_bs));
      nn::backward(losses.l_total);
      adam.step();
      ++step;
      ++batches;
      accumulate(acc, v);
      result.steps.push_back(v);
      if (on_step) on_step(step, v);
      if (cfg.max_steps != 0 && step >= cfg.max_steps) {
        done = true;
        break;
      }
    }
    EpochLog log;
    log.epoch = epoch;
    log.mean = divided(acc, static_cast<double>(batches));
    log.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    spdlog::info("{} epoch {}: l_rl={:.6g} l_ts={:.6g} l_bs={:.6g} l_total={:.6g} ({:.2f} s)",
                 model::to_string(role), epoch, log.mean.l_rl, log.mean.l_ts,
                 log.mean.l_bs, log.mean.l_total, log.wall_seconds);
    result.epochs.push_back(log);
  }
  adam.zero_grad();
  return result;
}

model::Network make_initial(ModelRole role, const model::ModelConfig& cfg,
                            const audio::StftConfig& stft, const TrainConfig& train_cfg,
                            const model::Network* bad_student) {
  model::Network net(role, cfg, stft, train_cfg.seed);
  if (train_cfg.warm_start) {
    if (role != ModelRole::kStudent)
      throw UsageError("warm_start only applies to the student phase");
    if (!bad_student) throw UsageError("warm_start needs a bad-student checkpoint");
    nn::load_state(net.state(), bad_student->state());
  }
  return net;
}

void write_log_csv(const std::filesystem::path& path, const std::vector<EpochLog>& log) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write training log {}", path.string()));
  out << "epoch,l_rl,l_ts,l_bs,l_kd_total,l_total,wall_seconds\n";
  for (const auto& e : log)
    out << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.6f}\n", e.epoch,
                       e.mean.l_rl, e.mean.l_ts, e.mean.l_bs, e.mean.l_kd_total,
                       e.mean.l_total, e.wall_seconds);
}

}  // namespace spatialkd::train
