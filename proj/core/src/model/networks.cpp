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

#include "spatialkd/model/networks.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <json.hpp>

#include "spatialkd/error.hpp"

namespace spatialkd::model {

using nn::Tensor;

std::string to_string(ModelRole role) {
  switch (role) {
    case ModelRole::kTeacher: return "teacher";
    case ModelRole::kStudent: return "student";
    case ModelRole::kBadStudent: return "bad_student";
  }
  return "unknown";
}

ModelRole role_from_string(const std::string& name) {
  if (name == "teacher") return ModelRole::kTeacher;
  if (name == "student") return ModelRole::kStudent;
  if (name == "bad_student") return ModelRole::kBadStudent;
  throw UsageError(fmt::format(
      "unknown model role '{}' (expected teacher, student or bad_student)", name));
}

Network::Network(ModelRole role, const ModelConfig& cfg,
                 const audio::StftConfig& stft, std::uint64_t seed)
    : role_(role), cfg_(cfg), stft_(stft) {
  cfg_.validate();
  if (cfg_.freq_bins != stft_.bins())
    throw UsageError(fmt::format(
        "model expects {} frequency bins but the STFT produces {}", cfg_.freq_bins,
        stft_.bins()));
  nn::Initializer init(seed);
  magnitude_ = MagnitudeNet(cfg_, init);
  if (role_ != ModelRole::kTeacher) phase_.emplace(cfg_, init);
}

void Network::check_frames(std::size_t frames) const {
  if (frames < cfg_.min_frames())
    throw DataError(fmt::format(
        "input has {} frames but the network needs at least {}; zero-pad the "
        "spectrogram in time",
        frames, cfg_.min_frames()));
}

EnhancerOutput Network::enhance(const Tensor& mag, const Tensor& phase,
                                nn::NormMode mode, nn::Lengths lengths) {
  if (!phase_)
    throw UsageError(fmt::format("{} network has no phase sub-network",
                                 to_string(role_)));
  if (mag.rank() != 4) throw ShapeError("enhance: magnitude must be [B, 1, T, F]");
  check_frames(mag.dim(2));
  MagnitudeOutput m = magnitude_.forward(mag, mag, mode, lengths);
  EnhancerOutput out;
  out.phase = phase_->forward(m.magnitude, phase, lengths);
  out.magnitude = std::move(m.magnitude);
  out.taps = std::move(m.taps);
  return out;
}

MagnitudeOutput Network::binaural(const Tensor& left, const Tensor& right,
                                  nn::NormMode mode, nn::Lengths lengths) {
  if (left.rank() != 4) throw ShapeError("binaural: input must be [B, 1, T, F]");
  check_frames(left.dim(2));
  return magnitude_.forward(left, right, mode, lengths);
}

nn::ParamList Network::state() const {
  nn::ParamList out;
  magnitude_.collect("magnitude", out);
  if (phase_) phase_->collect("phase", out);
  return out;
}

std::vector<Tensor> Network::trainable_parameters() const {
  std::vector<Tensor> out;
  for (auto& p : state())
    if (p.trainable) out.push_back(p.tensor);
  return out;
}

void Network::set_frozen(bool frozen) {
  for (auto& p : trainable_parameters()) p.set_requires_grad(!frozen);
}

PhaseNet& Network::phase_net() {
  if (!phase_) throw UsageError("network has no phase sub-network");
  return *phase_;
}

nn::Checkpoint Network::to_checkpoint() const {
  nlohmann::json arch;
  arch["model"] = nlohmann::json::parse(to_json(cfg_));
  arch["stft"] = {{"window", audio::to_string(stft_.kind())},
                  {"window_len", stft_.window_len()},
                  {"hop", stft_.hop()},
                  {"fft_len", stft_.fft_len()}};
  nn::Checkpoint ckpt;
  ckpt.identity = to_string(role_);
  ckpt.architecture = arch.dump();
  for (auto& p : state())
    ckpt.tensors.push_back({p.name, p.tensor.detach(), p.trainable});
  return ckpt;
}

Network Network::from_checkpoint(const nn::Checkpoint& ckpt) {
  const ModelRole role = role_from_string(ckpt.identity);
  ModelConfig cfg;
  std::optional<audio::StftConfig> stft;
  try {
    const auto arch = nlohmann::json::parse(ckpt.architecture);
    cfg = model_config_from_json(arch.at("model").dump());
    const auto& s = arch.at("stft");
    stft.emplace(audio::window_kind_from_string(s.at("window").get<std::string>()),
                 s.at("window_len").get<std::size_t>(), s.at("hop").get<std::size_t>(),
                 s.at("fft_len").get<std::size_t>());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(fmt::format("checkpoint architecture is invalid: {}", e.what()));
  }
  Network net(role, cfg, *stft, 0);
  nn::load_state(net.state(), ckpt.tensors);
  return net;
}

Tensor magnitude_tensor(const audio::Spectrogram& s) {
  return Tensor({1, 1, s.frames(), s.bins()}, s.magnitude_plane());
}

Tensor phase_tensor(const audio::Spectrogram& s) {
  const std::size_t plane = s.frames() * s.bins();
  std::vector<double> v(2 * plane);
  const auto& p = s.phase_plane();
  for (std::size_t i = 0; i < plane; ++i) {
    v[i] = p[2 * i];
    v[plane + i] = p[2 * i + 1];
  }
  return Tensor({1, 2, s.frames(), s.bins()}, std::move(v));
}

namespace {

SpectralEstimate to_estimate(const Tensor& mag, const Tensor* phase,
                             EncoderTaps taps) {
  SpectralEstimate e;
  e.frames = mag.dim(2);
  e.bins = mag.dim(3);
  e.magnitude.assign(mag.data().begin(), mag.data().end());
  if (phase) {
    const std::size_t plane = e.frames * e.bins;
    e.phase.resize(2 * plane);
    for (std::size_t i = 0; i < plane; ++i) {
      e.phase[2 * i] = (*phase)[i];
      e.phase[2 * i + 1] = (*phase)[plane + i];
    }
  }
  e.taps = std::move(taps);
  return e;
}

// Zero-pads a [1, C, T, F] tensor in time to at least `frames`.
Tensor pad_frames(const Tensor& x, std::size_t frames) {
  if (x.dim(2) >= frames) return x;
  return nn::pad_crop(x, 2, 0, frames);
}

Tensor crop_frames(const Tensor& x, std::size_t frames) {
  if (x.dim(2) == frames) return x;
  return nn::pad_crop(x, 2, 0, frames);
}

EncoderTaps crop_taps(EncoderTaps taps, std::size_t frames) {
  for (auto& t : taps.left) t = crop_frames(t, frames);
  for (auto& t : taps.right) t = crop_frames(t, frames);
  return taps;
}

}  // namespace

SpectralEstimate enhance_spectrogram(Network& net, const audio::Spectrogram& noisy) {
  noisy.validate();
  nn::NoGradGuard no_grad;
  const std::size_t frames = noisy.frames();
  const std::size_t need = std::max(frames, net.config().min_frames());
  const std::size_t lengths[] = {frames};
  EnhancerOutput out =
      net.enhance(pad_frames(magnitude_tensor(noisy), need),
                  pad_frames(phase_tensor(noisy), need), nn::NormMode::kEval, lengths);
  const Tensor phase = crop_frames(out.phase, frames);
  return to_estimate(crop_frames(out.magnitude, frames), &phase,
                     crop_taps(std::move(out.taps), frames));
}

SpectralEstimate teacher_spectrogram(Network& net, const audio::Spectrogram& left,
                                     const audio::Spectrogram& right) {
  left.validate();
  right.validate();
  if (left.frames() != right.frames() || left.bins() != right.bins())
    throw ShapeError(fmt::format(
        "teacher: left ({}x{}) and right ({}x{}) spectrograms differ", left.frames(),
        left.bins(), right.frames(), right.bins()));
  nn::NoGradGuard no_grad;
  const std::size_t frames = left.frames();
  const std::size_t need = std::max(frames, net.config().min_frames());
  const std::size_t lengths[] = {frames};
  MagnitudeOutput out =
      net.binaural(pad_frames(magnitude_tensor(left), need),
                   pad_frames(magnitude_tensor(right), need), nn::NormMode::kEval,
                   lengths);
  return to_estimate(crop_frames(out.magnitude, frames), nullptr,
                     crop_taps(std::move(out.taps), frames));
}

audio::Waveform reconstruct(const std::vector<double>& magnitude,
                            const std::vector<double>& phase, std::size_t frames,
                            const audio::StftConfig& cfg, double sample_rate) {
  audio::Spectrogram s(magnitude, phase, frames, cfg, sample_rate);
  return audio::istft(s);
}

namespace {

audio::Waveform fit_length(audio::Waveform w, std::size_t n) {
  w.samples.resize(n, 0.0);
  return w;
}

}  // namespace

audio::Waveform enhance_waveform(Network& net, const audio::Waveform& noisy) {
  const audio::Spectrogram spec = audio::stft(noisy, net.stft());
  const SpectralEstimate est = enhance_spectrogram(net, spec);
  return fit_length(reconstruct(est.magnitude, est.phase, est.frames, net.stft(),
                                noisy.sample_rate),
                    noisy.size());
}

audio::Waveform teacher_waveform(Network& net, const audio::Waveform& left,
                                 const audio::Waveform& right,
                                 const audio::Waveform& mono) {
  const audio::Spectrogram l = audio::stft(left, net.stft());
  const audio::Spectrogram r = audio::stft(right, net.stft());
  const audio::Spectrogram m = audio::stft(mono, net.stft());
  if (m.frames() != l.frames())
    throw ShapeError("teacher: monaural and binaural inputs differ in length");
  const SpectralEstimate est = teacher_spectrogram(net, l, r);
  return fit_length(reconstruct(est.magnitude, m.phase_plane(), est.frames, net.stft(),
                                mono.sample_rate),
                    mono.size());
}

}  // namespace spatialkd::model
