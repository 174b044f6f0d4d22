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

#ifndef CAEN_TRAIN_CHECKPOINT_H_
#define CAEN_TRAIN_CHECKPOINT_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "caen/nn/params.h"
#include "json.hpp"

namespace caen {

inline constexpr int kCheckpointFormat = 1;

struct CheckpointEntry {
  std::string name;
  Shape shape;
  std::size_t offset = 0;  // bytes into params.bin
  std::string dtype = "f64le";
};

// manifest.json next to params.bin, a flat little-endian float64 blob in
// parameter order. The checksum is the crc32 of params.bin.
struct CheckpointManifest {
  int format_version = kCheckpointFormat;
  std::size_t step = 0;
  nlohmann::json config;
  std::vector<CheckpointEntry> parameters;
  std::uint32_t checksum = 0;
};

// Creates `dir` if needed and overwrites both files.
CheckpointManifest save_checkpoint(const std::filesystem::path& dir, const ParamStore& store,
                                   std::size_t step, const nlohmann::json& config);

// Reads and validates the manifest and blob (format, checksum, sizes, unique
// names); throws DataError on any mismatch.
CheckpointManifest read_manifest(const std::filesystem::path& dir);

// Copies the saved values into `store`, which must hold exactly the same
// names and shapes.
CheckpointManifest load_checkpoint(const std::filesystem::path& dir, ParamStore& store);

}  // namespace caen

#endif  // CAEN_TRAIN_CHECKPOINT_H_
