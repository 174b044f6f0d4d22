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

// A small simulated marketplace: items change price over time and users
// react to discounts according to a hidden logistic click model.

#ifndef CAEN_DATA_SYNTHETIC_H_
#define CAEN_DATA_SYNTHETIC_H_

#include <cstdint>
#include <span>
#include <vector>

#include "caen/data/events.h"
#include "caen/data/sample.h"

namespace caen {

struct SyntheticWorldConfig {
  std::uint64_t seed = 7;
  int users = 2000;
  int items = 3000;
  int categories = 20;
  int segments = 12;

  // Price reaction of regular users: +1, 0 and -1 respectively.
  double price_sensitive = 0.4;
  double neutral = 0.4;
  double premium = 0.2;
  // Probability that a user's segment is drawn from the block of segments
  // reserved for their price type (otherwise uniform).
  double segment_signal = 0.7;

  // Low-intent users who click anything with a fixed probability and get
  // extra traffic; they dilute the per-state user lists.
  double noise_user_fraction = 0.1;
  double noise_click_prob = 0.6;
  double noise_activity = 3.0;

  int latent_dim = 4;
  double category_log_price_min = 2.5;
  double category_log_price_max = 5.0;
  double item_log_price_sd = 0.4;
  double quality_log_sd = 0.3;
  double appeal_rate = 0.5;  // share of items whose buyers respond to discounts

  // Expected price changes per item per history horizon; per-item rates are
  // gamma-distributed around it.
  double change_rate = 1.73;
  double change_rate_shape = 2.0;
  double max_discount = 0.5;  // discounts are multiples of 0.1 up to this

  int horizon_days = 38;   // simulated period
  int history_days = 30;   // history window before each exposure
  int exposure_days = 8;   // exposures are drawn from the final days
  int test_days = 1;       // last days of exposures form the test split
  Timestamp start_time = 1700000000;

  double impressions_per_day = 60000;  // background traffic
  int exposures = 50000;
  double negative_ratio = 5.0;

  double w_bias = -2.5;
  double w_quality = 1.5;
  double w_sensitivity = 3.0;
  double w_novelty = 1.0;
  double novelty_hours = 48.0;
  // Reference-price effect: bonus for the size of the latest price cut,
  // (discount now - discount before the change) / max_discount when positive.
  double w_price_drop = 0.0;
  // Audience shift: at every price change the item's latent taste vector
  // becomes persistence * old + sqrt(1 - persistence^2) * fresh noise.
  double latent_persistence = 1.0;

  // Throws ConfigError on inconsistent settings.
  void validate() const;
};

// Hidden per-entity parameters of the click model.
struct WorldTruth {
  std::vector<int> price_type;   // per user id: +1 / 0 / -1
  std::vector<uint8_t> noise_user;
  std::vector<double> user_latent;  // users x latent_dim
  std::vector<double> item_latent;  // items x latent_dim, before any change
  // Per item, one latent row per entry of the item's change list when the
  // latent drifts; empty otherwise.
  std::vector<std::vector<double>> item_latent_after_change;
  std::vector<double> quality;
  std::vector<double> appeal;
  int latent_dim = 0;
};

struct SyntheticWorld {
  SyntheticWorldConfig config;
  EventLog log;  // clicks only
  std::vector<InteractionEvent> exposures;  // time-sorted, clicked = label
  std::vector<double> exposure_probability;
  Timestamp test_start = 0;
  WorldTruth truth;

  // Discount of an item at time t and the time of its last price change
  // (excluding the initial listing), if any.
  double discount_at(int item_id, Timestamp t) const;
  double click_probability(int user_id, int item_id, Timestamp t) const;

  std::vector<std::vector<AttributeChangeEvent>> changes_by_item;  // index = item id
};

SyntheticWorld generate_synthetic_logs(const SyntheticWorldConfig& config);

// AUC of the generator's true probabilities against the realised labels by
// counting every positive/negative pair; ties count one half.
double bayes_auc_oracle(std::span<const InteractionEvent> exposures,
                        std::span<const double> probabilities);

struct AssembledDataset {
  std::vector<TrainingSample> train;
  std::vector<TrainingSample> test;
};

AssembledDataset assemble_dataset(const SyntheticWorld& world, const SampleConfig& config);

}  // namespace caen

#endif  // CAEN_DATA_SYNTHETIC_H_
