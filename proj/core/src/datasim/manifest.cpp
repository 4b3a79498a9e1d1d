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

#include "spatialkd/datasim/manifest.hpp"

#include <fstream>

#include <fmt/format.h>
#include <json.hpp>

#include "spatialkd/error.hpp"

namespace spatialkd::datasim {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_json_line(const ManifestEntry& e) {
  json j;
  j["id"] = e.id;
  j["clean"] = e.clean;
  j["noise"] = e.noise;
  j["mono"] = e.mono;
  j["left"] = e.left;
  j["right"] = e.right;
  j["epsilon_db"] = e.epsilon_db;
  j["snr_db"] = e.snr_db;
  j["achieved_snr_db"] = e.achieved_snr_db;
  j["seed"] = e.seed;
  return j.dump();
}

ManifestEntry entry_from_json_line(const std::string& line, std::size_t line_no) {
  try {
    const json j = json::parse(line);
    ManifestEntry e;
    e.id = j.at("id").get<std::string>();
    e.clean = j.at("clean").get<std::string>();
    e.noise = j.value("noise", std::string{});
    e.mono = j.at("mono").get<std::string>();
    e.left = j.value("left", std::string{});
    e.right = j.value("right", std::string{});
    e.epsilon_db = j.value("epsilon_db", 0.0);
    e.snr_db = j.at("snr_db").get<double>();
    e.achieved_snr_db = j.value("achieved_snr_db", e.snr_db);
    e.seed = j.value("seed", std::uint64_t{0});
    return e;
  } catch (const json::exception& ex) {
    throw DataError(fmt::format("manifest line {}: {}", line_no, ex.what()));
  }
}

void write_manifest(const fs::path& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write manifest {}", path.string()));
  for (const auto& e : entries) out << to_json_line(e) << '\n';
  if (!out) throw DataError(fmt::format("failed writing manifest {}", path.string()));
}

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open manifest {}", path.string()));
  const fs::path base = fs::absolute(path).parent_path();
  auto resolve = [&](std::string& p) {
    if (!p.empty() && fs::path(p).is_relative()) p = (base / p).lexically_normal().string();
  };
  std::vector<ManifestEntry> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ManifestEntry e = entry_from_json_line(line, line_no);
    resolve(e.clean);
    resolve(e.noise);
    resolve(e.mono);
    resolve(e.left);
    resolve(e.right);
    out.push_back(std::move(e));
  }
  if (out.empty())
    throw DataError(fmt::format("manifest {} has no records", path.string()));
  return out;
}

}  // namespace spatialkd::datasim
