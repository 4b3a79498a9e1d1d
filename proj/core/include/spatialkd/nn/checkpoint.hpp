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

#ifndef SPATIALKD_NN_CHECKPOINT_HPP_
#define SPATIALKD_NN_CHECKPOINT_HPP_

#include <filesystem>
#include <string>

#include "spatialkd/nn/layers.hpp"

namespace spatialkd::nn {

// Flat little-endian parameter file:
//
//   char[8]  magic "SPKDCKPT"
//   u32      version (1)
//   u32      identity length, then identity bytes ("teacher", "student", ...)
//   u32      architecture length, then architecture bytes (JSON text)
//   u64      tensor count
//   per tensor:
//     u32 name length, name bytes
//     u8  trainable flag
//     u32 rank, u64 dims[rank]
//     f64 payload[product(dims)]
struct Checkpoint {
  std::string identity;
  std::string architecture;
  ParamList tensors;
};

inline constexpr char kCheckpointMagic[8] = {'S', 'P', 'K', 'D',
                                             'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace spatialkd::nn

#endif  // SPATIALKD_NN_CHECKPOINT_HPP_
