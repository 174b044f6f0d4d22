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

#ifndef CAEN_TRAIN_CONFIG_H_
#define CAEN_TRAIN_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "caen/data/sample.h"
#include "caen/data/synthetic.h"
#include "caen/model/caen_model.h"
#include "json.hpp"

namespace caen {

struct TrainConfig {
  std::size_t batch_size = 1024;
  double learning_rate = 1e-4;
  double min_learning_rate = 5e-5;  // cosine floor reached at the last step
  std::size_t epochs = 2;
  std::uint64_t seed = 1;  // batch shuffling
  Variant variant = Variant::kFull;
  std::size_t eval_batch_size = 2048;
  std::size_t log_every = 0;  // steps between progress lines; 0 disables

  void validate() const;
};

// Everything one gen-data/train/eval run needs. Model vocabulary sizes and
// the sample horizon follow the world section.
struct RunConfig {
  SyntheticWorldConfig world;
  SampleConfig sample;
  ModelConfig model;
  TrainConfig train;

  SampleConfig sample_config() const;
  ModelConfig model_config() const;
  void validate() const;
};

// TOML with [world], [sample], [model] and [train] tables. Missing keys keep
// their defaults; unknown tables or keys and wrongly typed values raise
// ConfigError naming the key.
RunConfig parse_run_config(std::string_view text, std::string_view source = "config");
RunConfig load_run_config(const std::filesystem::path& path);

// Same key layout as the TOML file; used for checkpoint snapshots.
nlohmann::json to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::json& j);

}  // namespace caen

#endif  // CAEN_TRAIN_CONFIG_H_
