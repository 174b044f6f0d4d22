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

#include "caen/data/sample.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "caen/data/jsonl.h"

namespace caen {
namespace {

using json = nlohmann::json;

// Decile edges are hit exactly by generated discounts such as 0.3; the slack
// keeps 1 - 0.7 from landing in the bucket below.
constexpr double kEdgeSlack = 1e-9;

int decile_bucket(double fraction) {
  const int b = 1 + static_cast<int>(std::floor(10.0 * fraction + kEdgeSlack));
  return std::clamp(b, 1, 10);
}

std::size_t count_true(const Mask& m) {
  return static_cast<std::size_t>(std::count_if(m.begin(), m.end(), [](auto v) { return v != 0; }));
}

AttributeStateInput padded_state(std::size_t max_users) {
  AttributeStateInput s;
  s.user_ids.assign(max_users, 0);
  s.user_mask.assign(max_users, 0);
  s.user_times.assign(max_users, 0);
  return s;
}

json features_json(const AttributeFeatures& f) {
  return json::array({f.discount, f.price_level, f.price_rank});
}

AttributeFeatures features_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw DataError("attribute must be [d, l, r]");
  AttributeFeatures f{j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
  if (f.discount < 0 || f.discount > kDiscountBuckets || f.price_level < 0 ||
      f.price_level > kPriceLevelBuckets || f.price_rank < 0 ||
      f.price_rank > kPriceRankBuckets) {
    throw DataError("attribute bucket out of range");
  }
  return f;
}

int checked_id(const json& j) {
  const int id = j.get<int>();
  if (id < 0) throw DataError("negative id");
  return id;
}

}  // namespace

std::size_t AttributeStateInput::user_count() const { return count_true(user_mask); }
std::size_t ItemBehaviorInput::state_count() const { return count_true(state_mask); }
std::size_t UserBehaviorInput::length() const { return count_true(mask); }

PriceFeaturizer::PriceFeaturizer(std::span<const ItemProfile> items,
                                 std::span<const AttributeChangeEvent> changes) {
  std::unordered_map<int, std::vector<double>> bases;
  for (const auto& it : items) {
    if (!items_.emplace(it.item_id, it).second) {
      throw DataError("duplicate item profile " + std::to_string(it.item_id));
    }
    bases[it.category].push_back(it.base_price);
    category_members_[it.category].push_back(it.item_id);
  }
  for (auto& [cat, prices] : bases) {
    std::sort(prices.begin(), prices.end());
    std::vector<double> cuts;
    for (int q = 1; q < kPriceLevelBuckets; ++q) {
      cuts.push_back(prices[prices.size() * q / kPriceLevelBuckets]);
    }
    level_cuts_[cat] = std::move(cuts);
  }
  for (auto& [cat, members] : category_members_) std::sort(members.begin(), members.end());
  for (const auto& c : changes) changes_[c.item_id].push_back(c);
  for (auto& [id, list] : changes_) {
    std::stable_sort(list.begin(), list.end(),
                     [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  }
}

const ItemProfile& PriceFeaturizer::item(int item_id) const {
  auto it = items_.find(item_id);
  if (it == items_.end()) throw DataError("unknown item " + std::to_string(item_id));
  return it->second;
}

std::optional<double> PriceFeaturizer::price_at(int item_id, Timestamp t) const {
  auto it = changes_.find(item_id);
  if (it == changes_.end()) return std::nullopt;
  const auto& list = it->second;
  auto pos = std::upper_bound(list.begin(), list.end(), t,
                              [](Timestamp v, const auto& c) { return v < c.timestamp; });
  if (pos == list.begin()) return std::nullopt;
  return std::prev(pos)->new_value;
}

int PriceFeaturizer::level_bucket(int category, double price) const {
  const auto& cuts = level_cuts_.at(category);
  return 1 + static_cast<int>(std::upper_bound(cuts.begin(), cuts.end(), price) - cuts.begin());
}

int PriceFeaturizer::base_price_level(int item_id) const {
  const ItemProfile& p = item(item_id);
  return level_bucket(p.category, p.base_price);
}

AttributeFeatures PriceFeaturizer::features(int item_id, double price, Timestamp t) const {
  const ItemProfile& p = item(item_id);
  AttributeFeatures f;
  f.discount = decile_bucket(std::max(0.0, 1.0 - price / p.base_price));
  f.price_level = level_bucket(p.category, price);
  std::size_t others = 0, cheaper = 0;
  for (int other : category_members_.at(p.category)) {
    if (other == item_id) continue;
    const auto q = price_at(other, t);
    if (!q) continue;
    ++others;
    if (*q < price) ++cheaper;
  }
  f.price_rank = others == 0 ? 1
                             : decile_bucket(static_cast<double>(cheaper) /
                                             static_cast<double>(others));
  return f;
}

TrainingSample build_sample(const InteractionEvent& exposure,
                            std::span<const InteractionEvent> user_history,
                            std::span<const AttributeState> item_states,
                            const SampleContext& context, const SampleConfig& config) {
  if (!context.prices) throw DataError("build_sample: missing price featurizer");
  const Timestamp t = exposure.timestamp;
  const TimeWindow window{t - config.horizon, t};
  const PriceFeaturizer& prices = *context.prices;
  const ItemProfile& item = prices.item(exposure.item_id);

  TrainingSample s;
  s.user_id = exposure.user_id;
  s.item_id = exposure.item_id;
  s.label = exposure.clicked ? 1 : 0;
  s.timestamp = t;
  s.user_segment = context.user ? context.user->segment : 0;
  s.item_category = item.category;
  s.item_price_level = prices.base_price_level(exposure.item_id);

  // User behaviors: clicks inside the window, most recent max_behaviors.
  std::vector<const InteractionEvent*> behaviors;
  for (const auto& e : user_history) {
    if (e.clicked && window.contains(e.timestamp)) behaviors.push_back(&e);
  }
  if (behaviors.size() > config.max_behaviors) {
    behaviors.erase(behaviors.begin(),
                    behaviors.end() - static_cast<std::ptrdiff_t>(config.max_behaviors));
  }
  s.behavior.item_ids.assign(config.max_behaviors, 0);
  s.behavior.mask.assign(config.max_behaviors, 0);
  s.behavior.times.assign(config.max_behaviors, 0);
  for (std::size_t i = 0; i < behaviors.size(); ++i) {
    s.behavior.item_ids[i] = behaviors[i]->item_id;
    s.behavior.mask[i] = 1;
    s.behavior.times[i] = behaviors[i]->timestamp;
  }

  for (const auto& st : item_states) {
    const bool leaks = st.start < window.start || st.start >= t || st.end > t ||
                       std::any_of(st.interaction_times.begin(), st.interaction_times.end(),
                                   [&](Timestamp v) { return v >= t || v < window.start; });
    if (leaks) {
      throw DataError("build_sample: item " + std::to_string(exposure.item_id) +
                      " state outside the history window of the exposure at " +
                      std::to_string(t));
    }
    if (st.start > window.start) s.item.change_timestamps.push_back(st.start);
  }
  s.item.total_states = static_cast<int>(item_states.size());
  const std::size_t first =
      item_states.size() > config.max_states ? item_states.size() - config.max_states : 0;
  s.item.states.reserve(config.max_states);
  s.item.state_mask.assign(config.max_states, 0);
  for (std::size_t k = first; k < item_states.size(); ++k) {
    const AttributeState& st = item_states[k];
    AttributeStateInput in = padded_state(config.max_users);
    in.attribute = prices.features(exposure.item_id, st.value, st.start);
    in.start_time = st.start;
    const std::size_t n = st.user_ids.size();
    const std::size_t skip = n > config.max_users ? n - config.max_users : 0;
    for (std::size_t j = skip; j < n; ++j) {
      in.user_ids[j - skip] = st.user_ids[j];
      in.user_mask[j - skip] = 1;
      in.user_times[j - skip] = st.interaction_times[j];
    }
    in.is_empty = n == 0;
    s.item.state_mask[s.item.states.size()] = 1;
    s.item.states.push_back(std::move(in));
  }
  while (s.item.states.size() < config.max_states) {
    s.item.states.push_back(padded_state(config.max_users));
  }

  double current = item.base_price;
  if (auto p = prices.price_at(exposure.item_id, t)) {
    current = *p;
  } else if (!item_states.empty()) {
    current = item_states.back().value;
  }
  s.item.current_attribute = prices.features(exposure.item_id, current, t);
  return s;
}

HistoryIndex::HistoryIndex(const EventLog& log) : prices_(log.items, log.changes) {
  for (const auto& u : log.users) users_.emplace(u.user_id, u);
  for (const auto& e : log.interactions) {
    if (!e.clicked) continue;
    by_user_[e.user_id].push_back(e);
    by_item_[e.item_id].push_back(e);
  }
  auto by_time = [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; };
  for (auto& [id, v] : by_user_) std::stable_sort(v.begin(), v.end(), by_time);
  for (auto& [id, v] : by_item_) std::stable_sort(v.begin(), v.end(), by_time);
  for (const auto& c : log.changes) changes_[c.item_id].push_back(c);
  for (auto& [id, v] : changes_) std::stable_sort(v.begin(), v.end(), by_time);
}

PartitionResult HistoryIndex::item_states(int item_id, TimeWindow window) const {
  static const std::vector<InteractionEvent> kNoEvents;
  static const std::vector<AttributeChangeEvent> kNoChanges;
  auto it = by_item_.find(item_id);
  auto ct = changes_.find(item_id);
  const auto& events = it == by_item_.end() ? kNoEvents : it->second;
  const auto& changes = ct == changes_.end() ? kNoChanges : ct->second;
  // Only hand the window's slice to the partitioner.
  auto lo = std::lower_bound(events.begin(), events.end(), window.start,
                             [](const auto& e, Timestamp v) { return e.timestamp < v; });
  auto hi = std::lower_bound(lo, events.end(), window.end,
                             [](const auto& e, Timestamp v) { return e.timestamp < v; });
  return partition_states({lo, hi}, changes, window);
}

TrainingSample HistoryIndex::build(const InteractionEvent& exposure,
                                   const SampleConfig& config) const {
  static const std::vector<InteractionEvent> kNoEvents;
  const TimeWindow window{exposure.timestamp - config.horizon, exposure.timestamp};
  auto states = item_states(exposure.item_id, window).states;
  auto u = by_user_.find(exposure.user_id);
  const auto& history = u == by_user_.end() ? kNoEvents : u->second;
  auto hi = std::lower_bound(history.begin(), history.end(), exposure.timestamp,
                             [](const auto& e, Timestamp v) { return e.timestamp < v; });
  auto profile = users_.find(exposure.user_id);
  SampleContext ctx{profile == users_.end() ? nullptr : &profile->second, &prices_};
  return build_sample(exposure, {history.begin(), hi}, states, ctx, config);
}

std::string to_json_line(const TrainingSample& s) {
  json behaviors = json::array();
  for (std::size_t i = 0; i < s.behavior.item_ids.size(); ++i) {
    if (s.behavior.mask[i]) behaviors.push_back({s.behavior.item_ids[i], s.behavior.times[i]});
  }
  json states = json::array();
  for (std::size_t k = 0; k < s.item.states.size(); ++k) {
    if (!s.item.state_mask[k]) continue;
    const auto& st = s.item.states[k];
    json users = json::array();
    for (std::size_t j = 0; j < st.user_ids.size(); ++j) {
      if (st.user_mask[j]) users.push_back({st.user_ids[j], st.user_times[j]});
    }
    states.push_back(
        {{"attribute", features_json(st.attribute)}, {"start", st.start_time}, {"users", users}});
  }
  json j = {{"user_id", s.user_id},
            {"item_id", s.item_id},
            {"label", s.label},
            {"timestamp", s.timestamp},
            {"user_segment", s.user_segment},
            {"item_category", s.item_category},
            {"item_price_level", s.item_price_level},
            {"behaviors", behaviors},
            {"states", states},
            {"total_states", s.item.total_states},
            {"changes", s.item.change_timestamps},
            {"current_attribute", features_json(s.item.current_attribute)},
            {"true_probability", s.true_probability}};
  return j.dump();
}

namespace {

TrainingSample sample_from_json(const json& j, const SampleConfig& config) {
  jsonl::require_keys(j, {"behaviors", "changes", "current_attribute", "item_category", "item_id",
                          "item_price_level", "label", "states", "timestamp", "total_states",
                          "true_probability", "user_id", "user_segment"});
  TrainingSample s;
  s.user_id = checked_id(j.at("user_id"));
  s.item_id = checked_id(j.at("item_id"));
  s.label = j.at("label").get<int>();
  if (s.label != 0 && s.label != 1) throw DataError("label must be 0 or 1");
  s.timestamp = j.at("timestamp").get<Timestamp>();
  s.user_segment = checked_id(j.at("user_segment"));
  s.item_category = checked_id(j.at("item_category"));
  s.item_price_level = checked_id(j.at("item_price_level"));
  s.true_probability = j.at("true_probability").get<double>();

  const json& behaviors = j.at("behaviors");
  if (behaviors.size() > config.max_behaviors) throw DataError("too many behaviors");
  s.behavior.item_ids.assign(config.max_behaviors, 0);
  s.behavior.mask.assign(config.max_behaviors, 0);
  s.behavior.times.assign(config.max_behaviors, 0);
  for (std::size_t i = 0; i < behaviors.size(); ++i) {
    s.behavior.item_ids[i] = checked_id(behaviors[i].at(0));
    s.behavior.times[i] = behaviors[i].at(1).get<Timestamp>();
    s.behavior.mask[i] = 1;
  }

  const json& states = j.at("states");
  if (states.size() > config.max_states) throw DataError("too many states");
  s.item.state_mask.assign(config.max_states, 0);
  for (std::size_t k = 0; k < config.max_states; ++k) {
    AttributeStateInput in = padded_state(config.max_users);
    if (k < states.size()) {
      const json& st = states[k];
      jsonl::require_keys(st, {"attribute", "start", "users"});
      in.attribute = features_from(st.at("attribute"));
      in.start_time = st.at("start").get<Timestamp>();
      const json& users = st.at("users");
      if (users.size() > config.max_users) throw DataError("too many users in a state");
      for (std::size_t u = 0; u < users.size(); ++u) {
        in.user_ids[u] = checked_id(users[u].at(0));
        in.user_times[u] = users[u].at(1).get<Timestamp>();
        in.user_mask[u] = 1;
      }
      in.is_empty = users.empty();
      s.item.state_mask[k] = 1;
    }
    s.item.states.push_back(std::move(in));
  }
  s.item.total_states = j.at("total_states").get<int>();
  s.item.change_timestamps = j.at("changes").get<std::vector<Timestamp>>();
  s.item.current_attribute = features_from(j.at("current_attribute"));
  return s;
}

}  // namespace

TrainingSample sample_from_json_line(const std::string& line, const SampleConfig& config) {
  try {
    return sample_from_json(json::parse(line), config);
  } catch (const DataError&) {
    throw;
  } catch (const std::exception& e) {
    throw DataError(e.what());
  }
}

void write_samples(const std::filesystem::path& path, std::span<const TrainingSample> samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  for (const auto& s : samples) out << to_json_line(s) << '\n';
  if (!out) throw DataError("write failed: " + path.string());
}

std::vector<TrainingSample> read_samples(const std::filesystem::path& path,
                                         const SampleConfig& config) {
  return jsonl::read_records<TrainingSample>(
      path, [&](const json& j) { return sample_from_json(j, config); });
}

std::optional<Timestamp> latest_history_time(const TrainingSample& s) {
  std::optional<Timestamp> latest;
  auto see = [&](Timestamp v) { latest = latest ? std::max(*latest, v) : v; };
  for (std::size_t i = 0; i < s.behavior.times.size(); ++i) {
    if (s.behavior.mask[i]) see(s.behavior.times[i]);
  }
  for (std::size_t k = 0; k < s.item.states.size(); ++k) {
    if (!s.item.state_mask[k]) continue;
    const auto& st = s.item.states[k];
    see(st.start_time);
    for (std::size_t j = 0; j < st.user_times.size(); ++j) {
      if (st.user_mask[j]) see(st.user_times[j]);
    }
  }
  for (Timestamp c : s.item.change_timestamps) see(c);
  return latest;
}

}  // namespace caen
