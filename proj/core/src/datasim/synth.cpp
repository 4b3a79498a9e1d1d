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

#include "spatialkd/datasim/synth.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <fmt/format.h>

#include "spatialkd/audio/fft.hpp"
#include "spatialkd/audio/wav_io.hpp"
#include "spatialkd/error.hpp"

namespace spatialkd::datasim {

namespace fs = std::filesystem;
using audio::Waveform;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string to_string(Split s) { return s == Split::kTrain ? "train" : "test"; }

std::string to_string(NoiseColor c) {
  switch (c) {
    case NoiseColor::kWhite: return "white";
    case NoiseColor::kPink: return "pink";
    case NoiseColor::kBrown: return "brown";
    case NoiseColor::kBlue: return "blue";
  }
  return "unknown";
}

void SynthConfig::validate() const {
  auto fail = [](const std::string& msg) { throw UsageError("datasim: " + msg); };
  if (!(sample_rate > 0.0)) fail("sample_rate must be > 0");
  if (!(min_seconds > 0.0) || max_seconds < min_seconds)
    fail(fmt::format("need 0 < min_seconds <= max_seconds, got {} and {}", min_seconds,
                     max_seconds));
  if (epsilon_min_db > epsilon_max_db)
    fail(fmt::format("epsilon range [{}, {}] is empty", epsilon_min_db, epsilon_max_db));
  if (train_snr_min_db > train_snr_max_db)
    fail(fmt::format("train SNR range [{}, {}] is empty", train_snr_min_db,
                     train_snr_max_db));
  if (test_snrs_db.empty()) fail("test_snrs_db must not be empty");
  for (double s : test_snrs_db)
    if (!std::isfinite(s)) fail("test_snrs_db must be finite");
  if (ir_length == 0) fail("ir_length must be >= 1");
  if (static_cast<double>(ir_length) > min_seconds * sample_rate)
    fail("ir_length exceeds the shortest utterance");
}

std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t record_seed(std::uint64_t global_seed, Split split,
                          std::size_t index) noexcept {
  const std::uint64_t salt = split == Split::kTrain ? 0x7472616eULL : 0x74657374ULL;
  return mix_seed(mix_seed(global_seed ^ salt) + static_cast<std::uint64_t>(index));
}

MixtureSpec draw_spec(const SynthConfig& cfg, Split split, std::uint64_t global_seed,
                      std::size_t index) {
  MixtureSpec spec;
  spec.seed = record_seed(global_seed, split, index);
  std::mt19937_64 rng(mix_seed(spec.seed ^ 0x5350ULL));
  spec.epsilon_db = std::uniform_int_distribution<int>(cfg.epsilon_min_db,
                                                       cfg.epsilon_max_db)(rng);
  if (split == Split::kTrain) {
    spec.snr_db = std::uniform_int_distribution<int>(cfg.train_snr_min_db,
                                                     cfg.train_snr_max_db)(rng);
  } else {
    spec.snr_db = cfg.test_snrs_db[index % cfg.test_snrs_db.size()];
  }
  return spec;
}

Waveform synth_speech(std::mt19937_64& rng, std::size_t n, double sr) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto range = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };

  const double f0 = range(90.0, 220.0);
  const double vib_rate = range(3.0, 6.0);
  const double vib_depth = range(0.02, 0.06);
  const double glide = range(-0.15, 0.15);  // relative f0 change over the clip
  const double syl_rate = range(2.5, 5.0);
  const double syl_phase = range(0.0, kTwoPi);
  const double formants[3] = {range(300.0, 900.0), range(900.0, 2300.0),
                              range(2300.0, 3500.0)};
  const double widths[3] = {range(80.0, 160.0), range(100.0, 220.0),
                            range(150.0, 300.0)};
  const double gains[3] = {1.0, range(0.4, 0.8), range(0.2, 0.5)};

  const double max_f0 = f0 * (1.0 + vib_depth) * (1.0 + std::abs(glide));
  const std::size_t harmonics =
      std::clamp<std::size_t>(static_cast<std::size_t>(0.45 * sr / max_f0), 1, 40);
  std::vector<double> phase(harmonics);
  for (auto& p : phase) p = range(0.0, kTwoPi);

  Waveform w;
  w.sample_rate = sr;
  w.samples.assign(n, 0.0);
  const double duration = static_cast<double>(n) / sr;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sr;
    const double f = f0 * (1.0 + glide * t / duration) *
                     (1.0 + vib_depth * std::sin(kTwoPi * vib_rate * t));
    const double syl = std::sin(kTwoPi * syl_rate * t + syl_phase);
    const double env = 0.05 + (syl > 0.0 ? syl * syl : 0.0);
    double acc = 0.0;
    for (std::size_t k = 0; k < harmonics; ++k) {
      const double fk = f * static_cast<double>(k + 1);
      if (fk >= 0.5 * sr) break;
      double amp = 0.0;
      for (int m = 0; m < 3; ++m) {
        const double d = (fk - formants[m]) / widths[m];
        amp += gains[m] * std::exp(-0.5 * d * d);
      }
      amp += 0.05 / static_cast<double>(k + 1);
      phase[k] += kTwoPi * fk / sr;
      acc += amp * std::sin(phase[k]);
    }
    w.samples[i] = env * acc;
  }
  return w;
}

Waveform synth_noise(std::mt19937_64& rng, std::size_t n, double sr, NoiseColor color) {
  std::normal_distribution<double> g(0.0, 1.0);
  Waveform w;
  w.sample_rate = sr;
  w.samples.resize(n);
  for (auto& v : w.samples) v = g(rng);
  double k = 0.0;
  switch (color) {
    case NoiseColor::kWhite: k = 0.0; break;
    case NoiseColor::kPink: k = 1.0; break;
    case NoiseColor::kBrown: k = 2.0; break;
    case NoiseColor::kBlue: k = -1.0; break;
  }
  audio::RealFft fft(n);
  std::vector<std::complex<double>> spec(fft.bins());
  fft.forward(w.samples, spec);
  spec[0] = 0.0;
  for (std::size_t b = 1; b < spec.size(); ++b)
    spec[b] *= std::pow(static_cast<double>(b) / static_cast<double>(spec.size()), -0.5 * k);
  fft.inverse(spec, w.samples);
  const double norm = 1.0 / static_cast<double>(n);
  for (auto& v : w.samples) v *= norm;
  return w;
}

namespace {

// One ear: direct path after `delay` samples plus sparse decaying taps.
std::vector<double> ear_response(std::mt19937_64& rng, std::size_t length,
                                 std::size_t delay, double gain) {
  std::vector<double> h(length, 0.0);
  h[std::min(delay, length - 1)] = gain;
  if (length < 8) return h;
  std::uniform_int_distribution<std::size_t> pos(delay + 2 < length ? delay + 2 : length - 1,
                                                 length - 1);
  std::normal_distribution<double> g(0.0, 1.0);
  const double tau = static_cast<double>(length) / 4.0;
  for (int i = 0; i < 12; ++i) {
    const std::size_t p = pos(rng);
    h[p] += 0.3 * gain * g(rng) * std::exp(-static_cast<double>(p) / tau);
  }
  return h;
}

std::pair<std::vector<double>, std::vector<double>> binaural_pair(
    std::mt19937_64& rng, std::size_t length, double sr, double azimuth_deg) {
  const double s = std::sin(azimuth_deg * std::numbers::pi / 180.0);
  const auto itd = static_cast<std::size_t>(std::lround(std::abs(s) * 0.0007 * sr));
  const double ild_db = 6.0 * s;  // right ear louder for sources on the right
  const std::size_t delay_left = s > 0.0 ? 1 + itd : 1;
  const std::size_t delay_right = s > 0.0 ? 1 : 1 + itd;
  auto left = ear_response(rng, length, delay_left, std::pow(10.0, -ild_db / 40.0));
  auto right = ear_response(rng, length, delay_right, std::pow(10.0, ild_db / 40.0));
  return {std::move(left), std::move(right)};
}

}  // namespace

BinauralImpulses synth_impulses(std::mt19937_64& rng, std::size_t length, double sr,
                                double speech_azimuth, double noise_azimuth) {
  BinauralImpulses h;
  std::tie(h.speech_left, h.speech_right) = binaural_pair(rng, length, sr, speech_azimuth);
  std::tie(h.noise_left, h.noise_right) = binaural_pair(rng, length, sr, noise_azimuth);
  return h;
}

MixtureRecord make_record(const SynthConfig& cfg, MixtureSpec spec) {
  cfg.validate();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double seconds = cfg.min_seconds + (cfg.max_seconds - cfg.min_seconds) * u(rng);
  const auto n = static_cast<std::size_t>(std::lround(seconds * cfg.sample_rate));
  const auto color = static_cast<NoiseColor>(std::uniform_int_distribution<int>(0, 3)(rng));
  const int speech_az = std::uniform_int_distribution<int>(-90, 90)(rng);
  const int noise_az = std::uniform_int_distribution<int>(-90, 90)(rng);
  spec.brir_id = fmt::format("s{:+d}_n{:+d}", speech_az, noise_az);

  const Waveform speech = synth_speech(rng, n, cfg.sample_rate);
  const Waveform noise = synth_noise(rng, n, cfg.sample_rate, color);
  const BinauralImpulses h =
      synth_impulses(rng, cfg.ir_length, cfg.sample_rate, speech_az, noise_az);

  MixtureRecord r;
  r.clean = scale_clean(speech, spec.epsilon_db);
  r.noise = scale_noise(noise, r.clean, spec.snr_db);
  r.mono = mix_mono(r.clean, r.noise);
  std::tie(r.left, r.right) = mix_binaural(r.clean, r.noise, h);
  r.achieved_snr_db = snr_db(r.clean.samples, r.noise.samples);
  r.spec = std::move(spec);
  return r;
}

std::vector<ManifestEntry> synth_corpus(const SynthConfig& cfg, Split split,
                                        std::size_t count, std::uint64_t global_seed,
                                        const fs::path& root) {
  cfg.validate();
  const std::string name = to_string(split);
  std::error_code ec;
  fs::create_directories(root / name, ec);
  if (ec)
    throw DataError(fmt::format("cannot create output directory {}: {}",
                                (root / name).string(), ec.message()));
  std::vector<ManifestEntry> entries;
  entries.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const MixtureRecord r = make_record(cfg, draw_spec(cfg, split, global_seed, i));
    ManifestEntry e;
    e.id = fmt::format("{}_{:05d}", name, i);
    auto put = [&](const Waveform& w, const char* suffix) {
      const std::string rel = fmt::format("{}/{}_{}.wav", name, e.id, suffix);
      audio::write_wav(root / rel, w);
      return rel;
    };
    e.clean = put(r.clean, "clean");
    e.noise = put(r.noise, "noise");
    e.mono = put(r.mono, "mono");
    e.left = put(r.left, "left");
    e.right = put(r.right, "right");
    e.epsilon_db = r.spec.epsilon_db;
    e.snr_db = r.spec.snr_db;
    e.achieved_snr_db = r.achieved_snr_db;
    e.seed = r.spec.seed;
    entries.push_back(std::move(e));
  }
  write_manifest(root / (name + ".jsonl"), entries);
  return entries;
}

}  // namespace spatialkd::datasim
