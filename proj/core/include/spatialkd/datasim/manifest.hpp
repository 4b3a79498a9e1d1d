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

#ifndef SPATIALKD_DATASIM_MANIFEST_HPP_
#define SPATIALKD_DATASIM_MANIFEST_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace spatialkd::datasim {

// One JSON object per line. Paths are stored relative to the manifest's
// directory and resolved to absolute paths when read.
struct ManifestEntry {
  std::string id;
  std::string clean;
  std::string noise;
  std::string mono;
  std::string left;
  std::string right;
  double epsilon_db = 0.0;
  double snr_db = 0.0;
  double achieved_snr_db = 0.0;
  std::uint64_t seed = 0;

  bool has_binaural() const noexcept { return !left.empty() && !right.empty(); }
};

std::string to_json_line(const ManifestEntry& e);
// `line_no` is only used in error messages.
ManifestEntry entry_from_json_line(const std::string& line, std::size_t line_no = 0);

void write_manifest(const std::filesystem::path& path,
                    const std::vector<ManifestEntry>& entries);
// Throws DataError on an unreadable file, malformed line or missing field.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

}  // namespace spatialkd::datasim

#endif  // SPATIALKD_DATASIM_MANIFEST_HPP_
