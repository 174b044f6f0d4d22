// Copyright 2026 The CAEN Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "caen/train/checkpoint.h"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "caen/errors.h"

namespace caen {
namespace {

constexpr const char* kManifest = "manifest.json";
constexpr const char* kBlob = "params.bin";

std::uint32_t crc32_of(const std::string& bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  const auto* data = reinterpret_cast<const Bytef*>(bytes.data());
  std::size_t left = bytes.size();
  while (left > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(left, 1u << 30));
    crc = crc32(crc, data, chunk);
    data += chunk;
    left -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

void append_le(std::string& out, double value) {
  const auto bits = std::bit_cast<std::uint64_t>(value);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
}

double read_le(const std::string& in, std::size_t offset) {
  std::uint64_t bits = 0;
  for (int b = 7; b >= 0; --b) {
    bits = (bits << 8) | static_cast<unsigned char>(in[offset + static_cast<std::size_t>(b)]);
  }
  return std::bit_cast<double>(bits);
}

std::string hex32(std::uint32_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(8) << std::setfill('0') << v;
  return s.str();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("cannot write " + path.string());
}

// Manifest plus blob bytes, both validated.
std::pair<CheckpointManifest, std::string> read_checkpoint(const std::filesystem::path& dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(dir / kManifest));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError((dir / kManifest).string() + ": " + e.what());
  }
  CheckpointManifest m;
  std::string blob;
  try {
    m.format_version = j.at("format_version").get<int>();
    if (m.format_version != kCheckpointFormat) {
      throw DataError("unsupported checkpoint format " + std::to_string(m.format_version));
    }
    m.step = j.at("step").get<std::size_t>();
    m.config = j.at("config");
    const auto& sum = j.at("checksum");
    if (sum.at("algorithm").get<std::string>() != "crc32") {
      throw DataError("unsupported checksum algorithm");
    }
    m.checksum = static_cast<std::uint32_t>(std::stoul(sum.at("value").get<std::string>(), nullptr, 16));
    blob = read_file(dir / j.at("blob").get<std::string>());
    if (blob.size() != j.at("blob_bytes").get<std::size_t>()) {
      throw DataError("params.bin has " + std::to_string(blob.size()) + " bytes, manifest says " +
                      std::to_string(j.at("blob_bytes").get<std::size_t>()));
    }
    std::set<std::string> names;
    for (const auto& e : j.at("parameters")) {
      CheckpointEntry entry;
      entry.name = e.at("name").get<std::string>();
      entry.shape = e.at("shape").get<Shape>();
      entry.offset = e.at("offset").get<std::size_t>();
      entry.dtype = e.at("dtype").get<std::string>();
      if (entry.dtype != "f64le") throw DataError("unsupported dtype " + entry.dtype);
      if (!names.insert(entry.name).second) throw DataError("duplicate parameter " + entry.name);
      if (entry.offset + 8 * shape_size(entry.shape) > blob.size()) {
        throw DataError("parameter " + entry.name + " runs past the end of params.bin");
      }
      m.parameters.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError((dir / kManifest).string() + ": " + e.what());
  }
  const std::uint32_t actual = crc32_of(blob);
  if (actual != m.checksum) {
    throw DataError("checkpoint checksum mismatch: manifest " + hex32(m.checksum) +
                    ", params.bin " + hex32(actual));
  }
  return {std::move(m), std::move(blob)};
}

}  // namespace

CheckpointManifest save_checkpoint(const std::filesystem::path& dir, const ParamStore& store,
                                   std::size_t step, const nlohmann::json& config) {
  std::filesystem::create_directories(dir);
  CheckpointManifest m;
  m.step = step;
  m.config = config;
  std::string blob;
  blob.reserve(8 * store.value_count());
  for (const Parameter& p : store.params()) {
    m.parameters.push_back({p.name, p.shape, blob.size(), "f64le"});
    for (double v : p.values) append_le(blob, v);
  }
  m.checksum = crc32_of(blob);

  nlohmann::json j;
  j["format_version"] = m.format_version;
  j["step"] = m.step;
  j["config"] = m.config;
  j["blob"] = kBlob;
  j["blob_bytes"] = blob.size();
  j["checksum"] = {{"algorithm", "crc32"}, {"value", hex32(m.checksum)}};
  auto& entries = j["parameters"] = nlohmann::json::array();
  for (const auto& e : m.parameters) {
    entries.push_back({{"name", e.name}, {"shape", e.shape}, {"offset", e.offset}, {"dtype", e.dtype}});
  }
  write_file(dir / kBlob, blob);
  write_file(dir / kManifest, j.dump(2) + "\n");
  return m;
}

CheckpointManifest read_manifest(const std::filesystem::path& dir) {
  return read_checkpoint(dir).first;
}

CheckpointManifest load_checkpoint(const std::filesystem::path& dir, ParamStore& store) {
  auto [m, blob] = read_checkpoint(dir);
  if (m.parameters.size() != store.size()) {
    throw DataError("checkpoint has " + std::to_string(m.parameters.size()) +
                    " parameters, model has " + std::to_string(store.size()));
  }
  for (const auto& e : m.parameters) {
    auto id = store.find(e.name);
    if (!id) throw DataError("checkpoint parameter " + e.name + " is not in the model");
    auto& p = store.mutable_param(*id);
    if (p.shape != e.shape) {
      throw DataError("checkpoint parameter " + e.name + " has shape " + shape_string(e.shape) +
                      ", model expects " + shape_string(p.shape));
    }
    for (std::size_t i = 0; i < p.values.size(); ++i) p.values[i] = read_le(blob, e.offset + 8 * i);
  }
  return m;
}

}  // namespace caen
