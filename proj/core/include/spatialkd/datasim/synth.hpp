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

#ifndef SPATIALKD_DATASIM_SYNTH_HPP_
#define SPATIALKD_DATASIM_SYNTH_HPP_

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "spatialkd/audio/waveform.hpp"
#include "spatialkd/datasim/manifest.hpp"
#include "spatialkd/datasim/mixing.hpp"

namespace spatialkd::datasim {

enum class Split { kTrain, kTest };
std::string to_string(Split s);

// Desk-scale generator settings. SNRs and levels are integer dB grids.
struct SynthConfig {
  double sample_rate = 16000.0;
  double min_seconds = 1.0;
  double max_seconds = 1.5;
  int epsilon_min_db = -35;
  int epsilon_max_db = -15;
  int train_snr_min_db = -5;
  int train_snr_max_db = 10;
  std::vector<double> test_snrs_db{-5.0, 0.0, 5.0, 10.0};
  std::size_t ir_length = 256;

  // Throws UsageError naming the offending field.
  void validate() const;
};

struct MixtureSpec {
  double epsilon_db = 0.0;
  double snr_db = 0.0;
  std::uint64_t seed = 0;
  std::string brir_id;
};

struct MixtureRecord {
  audio::Waveform clean;  // x_hat
  audio::Waveform noise;  // v_hat
  audio::Waveform mono;   // y
  audio::Waveform left;
  audio::Waveform right;
  MixtureSpec spec;
  double achieved_snr_db = 0.0;
};

// splitmix64 finalizer.
std::uint64_t mix_seed(std::uint64_t x) noexcept;
// Per-record seed; independent of generation order.
std::uint64_t record_seed(std::uint64_t global_seed, Split split, std::size_t index) noexcept;

// Level and SNR for record `index`. Train SNRs are uniform on the integer
// grid; test records cycle through test_snrs_db so every condition is filled.
MixtureSpec draw_spec(const SynthConfig& cfg, Split split, std::uint64_t global_seed,
                      std::size_t index);

enum class NoiseColor { kWhite, kPink, kBrown, kBlue };
std::string to_string(NoiseColor c);

// Voiced harmonic complex with vibrato, formant-shaped harmonics and
// syllable-rate amplitude modulation.
audio::Waveform synth_speech(std::mt19937_64& rng, std::size_t n, double sample_rate);
// Gaussian noise shaped to a 1/f^k power spectrum (k = 0, 1, 2, -1), DC removed.
audio::Waveform synth_noise(std::mt19937_64& rng, std::size_t n, double sample_rate,
                            NoiseColor color);
// Sparse exponentially decaying responses for a speech and a noise source
// at the given azimuths (degrees, positive to the right), with interaural
// time and level differences.
BinauralImpulses synth_impulses(std::mt19937_64& rng, std::size_t length,
                                double sample_rate, double speech_azimuth,
                                double noise_azimuth);

// Deterministic function of (cfg, spec). spec.brir_id is filled in.
MixtureRecord make_record(const SynthConfig& cfg, MixtureSpec spec);

// Writes `count` records as float-32 WAVs under root/<split>/ and the manifest
// root/<split>.jsonl. Returns the manifest rows (paths relative to root).
std::vector<ManifestEntry> synth_corpus(const SynthConfig& cfg, Split split,
                                        std::size_t count, std::uint64_t global_seed,
                                        const std::filesystem::path& root);

}  // namespace spatialkd::datasim

#endif  // SPATIALKD_DATASIM_SYNTH_HPP_
