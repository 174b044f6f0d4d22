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

#ifndef CAEN_TRAIN_TRAINER_H_
#define CAEN_TRAIN_TRAINER_H_

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "caen/data/sample.h"
#include "caen/model/caen_model.h"
#include "caen/train/config.h"
#include "caen/train/metrics.h"
#include "caen/train/optimizer.h"

namespace caen {

// Model probabilities in sample order, scored in batches of `batch_size`.
std::vector<double> predict(const CAENParams& p, std::span<const TrainingSample> samples,
                            Variant variant, std::size_t batch_size);

// Overall AUC/Logloss plus buckets by the pre-truncation state count.
MetricsReport evaluate(const CAENParams& p, std::span<const TrainingSample> samples,
                       Variant variant, std::size_t batch_size);

struct EpochLog {
  std::size_t epoch = 0;
  std::size_t step = 0;  // optimizer steps taken so far
  double train_loss = 0.0;  // mean batch loss over the epoch
  double learning_rate = 0.0;  // rate used by the epoch's last step
  MetricsReport held_out;
};

struct TrainResult {
  MetricsReport initial;  // held-out metrics before the first step
  std::vector<EpochLog> history;
  std::size_t steps = 0;
};

// One optimizer step on `batch`; returns the batch loss before the update.
double train_step(CAENParams& p, std::span<const TrainingSample* const> batch, Variant variant,
                  AdamState& adam, double learning_rate);

using TrainLogger = std::function<void(const std::string&)>;

// Seeded shuffle, mini-batch forward/backward, cosine-annealed Adam, and a
// held-out evaluation after every epoch. Throws NumericError when a batch
// loss is not finite.
TrainResult train(CAENParams& p, const TrainConfig& config,
                  std::span<const TrainingSample> train_set,
                  std::span<const TrainingSample> held_out, const TrainLogger& log = {});

}  // namespace caen

#endif  // CAEN_TRAIN_TRAINER_H_
