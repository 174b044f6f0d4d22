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

#ifndef CAEN_TRAIN_PIPELINE_H_
#define CAEN_TRAIN_PIPELINE_H_

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "caen/data/sample.h"
#include "caen/model/caen_model.h"
#include "caen/train/config.h"
#include "caen/train/trainer.h"
#include "json.hpp"

namespace caen {

// Data directory layout written by gen-data:
//   dataset.json                    config snapshot and corpus statistics
//   users/items/interactions/changes.jsonl   raw event log (clicks only)
//   exposures.jsonl                 labelled exposures
//   train.jsonl, test.jsonl         assembled samples
struct DatasetDir {
  RunConfig config;  // world and sample sections are the ones used to build it
  nlohmann::json info;
  std::vector<TrainingSample> train;
  std::vector<TrainingSample> test;
};

nlohmann::json generate_dataset(const RunConfig& config, const std::filesystem::path& out);
DatasetDir load_dataset(const std::filesystem::path& dir);

// The run's model/train sections combined with the data's world/sample.
RunConfig merge_with_data(const RunConfig& run, const DatasetDir& data);

// Trains on data.train, saves the checkpoint to `out` and returns the
// training report (initial and per-epoch held-out metrics on data.test).
nlohmann::json train_and_save(const RunConfig& run, const DatasetDir& data,
                              const std::filesystem::path& out, const TrainLogger& log = {});

// Restores a checkpoint saved by train_and_save.
CAENParams load_model(const std::filesystem::path& ckpt, RunConfig* config = nullptr);

// Held-out report for a checkpoint; `stratify` adds the state-count buckets.
nlohmann::json evaluate_checkpoint(const std::filesystem::path& ckpt, const DatasetDir& data,
                                   bool stratify);

struct GradientGroupCheck {
  std::string name;
  std::size_t checked = 0;
  double max_error = 0.0;
};

// Backward against central differences (h = 1e-6) on the given batch for
// every parameter group, at `per_group` sampled coordinates per group.
// Embedding tables sample rows the batch touches.
std::vector<GradientGroupCheck> gradient_check(CAENParams& p,
                                               std::span<const TrainingSample* const> batch,
                                               Variant variant, std::size_t per_group,
                                               std::uint64_t seed);

}  // namespace caen

#endif  // CAEN_TRAIN_PIPELINE_H_
