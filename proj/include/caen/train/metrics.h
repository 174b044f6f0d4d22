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

#ifndef CAEN_TRAIN_METRICS_H_
#define CAEN_TRAIN_METRICS_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace caen {

// Rank-based AUC; tied scores share their average rank, so each tied
// positive/negative pair counts 1/2. Throws DataError unless both classes
// are present.
double evaluate_auc(std::span<const double> scores, std::span<const int> labels);

// Mean binary cross-entropy with predictions clamped to [1e-7, 1 - 1e-7].
double evaluate_logloss(std::span<const double> scores, std::span<const int> labels);

struct BucketMetrics {
  std::string name;  // "1".."8", "9+", or "0" for items without states
  std::size_t samples = 0;
  std::size_t positives = 0;
  double logloss = 0.0;
  std::optional<double> auc;  // only when both classes are present
};

struct MetricsReport {
  std::size_t samples = 0;
  double auc = 0.0;
  double logloss = 0.0;
  std::vector<BucketMetrics> buckets;  // populated buckets in order
  double runtime_seconds = 0.0;

  // Runtime is left out when `with_runtime` is false so reports from two
  // runs can be compared byte for byte.
  nlohmann::json to_json(bool with_runtime = true) const;
};

MetricsReport stratified_report(std::span<const double> scores, std::span<const int> labels,
                                std::span<const int> state_counts);

}  // namespace caen

#endif  // CAEN_TRAIN_METRICS_H_
