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

// Assembly of model-ready samples from raw event logs.

#ifndef CAEN_DATA_SAMPLE_H_
#define CAEN_DATA_SAMPLE_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "caen/data/events.h"
#include "caen/data/partition.h"
#include "caen/tensor/ops.h"

namespace caen {

inline constexpr int kDiscountBuckets = 10;
inline constexpr int kPriceLevelBuckets = 5;
inline constexpr int kPriceRankBuckets = 10;

// Bucket ids of one price observation; 0 is padding, real buckets start at 1.
struct AttributeFeatures {
  int discount = 0;     // decile of 1 - price / base_price
  int price_level = 0;  // quintile of price among the category's base prices
  int price_rank = 0;   // decile of the price's rank among current category prices

  bool operator==(const AttributeFeatures&) const = default;
};

struct SampleConfig {
  std::size_t max_states = 8;
  std::size_t max_users = 50;
  std::size_t max_behaviors = 20;
  Timestamp horizon = 30 * kSecondsPerDay;
};

// One state slot. Real users come first, then padding (id 0, mask 0).
struct AttributeStateInput {
  AttributeFeatures attribute;
  std::vector<int> user_ids;
  Mask user_mask;
  std::vector<Timestamp> user_times;
  Timestamp start_time = 0;
  bool is_empty = true;

  std::size_t user_count() const;
};

// Real states first in chronological order, then padded slots.
struct ItemBehaviorInput {
  std::vector<AttributeStateInput> states;
  Mask state_mask;
  std::vector<Timestamp> change_timestamps;  // all changes inside the window
  AttributeFeatures current_attribute;
  int total_states = 0;  // before truncation; used for stratified reports

  std::size_t state_count() const;
};

struct UserBehaviorInput {
  std::vector<int> item_ids;  // oldest to newest, then padding
  Mask mask;
  std::vector<Timestamp> times;

  std::size_t length() const;
};

struct TrainingSample {
  int user_id = 0;
  int item_id = 0;
  int label = 0;
  Timestamp timestamp = 0;
  int user_segment = 0;
  int item_category = 0;
  int item_price_level = 0;  // bucket of the base price
  UserBehaviorInput behavior;
  ItemBehaviorInput item;
  double true_probability = -1.0;  // generator ground truth, -1 if unknown
};

// Price lookups and bucketization against the catalogue.
class PriceFeaturizer {
 public:
  PriceFeaturizer(std::span<const ItemProfile> items,
                  std::span<const AttributeChangeEvent> changes);

  // Price set by the latest change at or before t.
  std::optional<double> price_at(int item_id, Timestamp t) const;
  AttributeFeatures features(int item_id, double price, Timestamp t) const;
  int base_price_level(int item_id) const;
  const ItemProfile& item(int item_id) const;

 private:
  int level_bucket(int category, double price) const;

  std::unordered_map<int, ItemProfile> items_;
  std::unordered_map<int, std::vector<AttributeChangeEvent>> changes_;
  std::unordered_map<int, std::vector<double>> level_cuts_;    // per category
  std::unordered_map<int, std::vector<int>> category_members_;
};

struct SampleContext {
  const UserProfile* user = nullptr;
  const PriceFeaturizer* prices = nullptr;
};

// `user_history` is the user's clicks in time order (may extend past the
// exposure; later events are ignored). `item_states` must come from
// partition_states over [t - horizon, t) and is checked for leakage.
TrainingSample build_sample(const InteractionEvent& exposure,
                            std::span<const InteractionEvent> user_history,
                            std::span<const AttributeState> item_states,
                            const SampleContext& context, const SampleConfig& config);

struct EventLog {
  std::vector<UserProfile> users;
  std::vector<ItemProfile> items;
  std::vector<InteractionEvent> interactions;
  std::vector<AttributeChangeEvent> changes;
};

// Per-user and per-item click histories for repeated sample assembly.
class HistoryIndex {
 public:
  explicit HistoryIndex(const EventLog& log);

  TrainingSample build(const InteractionEvent& exposure, const SampleConfig& config) const;
  PartitionResult item_states(int item_id, TimeWindow window) const;

 private:
  std::unordered_map<int, UserProfile> users_;
  std::unordered_map<int, std::vector<InteractionEvent>> by_user_;
  std::unordered_map<int, std::vector<InteractionEvent>> by_item_;
  std::unordered_map<int, std::vector<AttributeChangeEvent>> changes_;
  PriceFeaturizer prices_;
};

// Compact encoding: only real entries are stored; reading pads to `config`.
std::string to_json_line(const TrainingSample& s);
TrainingSample sample_from_json_line(const std::string& line, const SampleConfig& config);
void write_samples(const std::filesystem::path& path, std::span<const TrainingSample> samples);
std::vector<TrainingSample> read_samples(const std::filesystem::path& path,
                                         const SampleConfig& config);

// Largest history timestamp referenced anywhere in the sample, or nullopt
// if it carries no history at all.
std::optional<Timestamp> latest_history_time(const TrainingSample& s);

}  // namespace caen

#endif  // CAEN_DATA_SAMPLE_H_
