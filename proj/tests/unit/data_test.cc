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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "caen/data/events.h"
#include "caen/data/partition.h"
#include "caen/data/sample.h"
#include "caen/data/synthetic.h"
#include "caen/nn/params.h"

namespace caen {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("caen_data_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SyntheticWorldConfig small_world() {
  SyntheticWorldConfig c;
  c.users = 300;
  c.items = 400;
  c.categories = 5;
  c.impressions_per_day = 6000;
  c.exposures = 3000;
  return c;
}

TEST_CASE("events: round trip, empty file and canonical bytes") {
  const fs::path dir = scratch_dir("events");
  std::vector<InteractionEvent> few{{1, 2, 100, true}, {3, 4, 101, false}};
  write_events(dir / "few.jsonl", few);
  CHECK(read_interactions(dir / "few.jsonl") == few);

  std::ofstream(dir / "empty.jsonl").close();
  CHECK(read_interactions(dir / "empty.jsonl").empty());
  CHECK(read_changes(dir / "empty.jsonl").empty());

  Rng rng(1);
  std::vector<InteractionEvent> events;
  std::vector<AttributeChangeEvent> changes;
  for (int i = 0; i < 10000; ++i) {
    events.push_back({1 + static_cast<int>(rng() % 5000), 1 + static_cast<int>(rng() % 5000),
                      static_cast<Timestamp>(1600000000 + rng() % 100000000), rng() % 2 == 0});
    changes.push_back({1 + static_cast<int>(rng() % 5000),
                       static_cast<Timestamp>(1600000000 + rng() % 100000000),
                       uniform(rng, 0.01, 5000.0)});
  }
  write_events(dir / "a.jsonl", events);
  write_events(dir / "c.jsonl", changes);
  auto events_back = read_interactions(dir / "a.jsonl");
  auto changes_back = read_changes(dir / "c.jsonl");
  CHECK(events_back == events);
  CHECK(changes_back == changes);
  write_events(dir / "a2.jsonl", events_back);
  write_events(dir / "c2.jsonl", changes_back);
  CHECK(slurp(dir / "a.jsonl") == slurp(dir / "a2.jsonl"));
  CHECK(slurp(dir / "c.jsonl") == slurp(dir / "c2.jsonl"));

  std::vector<UserProfile> users{{1, 3}, {2, 1}};
  std::vector<ItemProfile> items{{1, 2, 19.99}, {5, 1, 3.5}};
  write_events(dir / "u.jsonl", users);
  write_events(dir / "i.jsonl", items);
  CHECK(read_users(dir / "u.jsonl") == users);
  CHECK(read_items(dir / "i.jsonl") == items);
}

TEST_CASE("events: malformed lines are reported with their line number") {
  const fs::path dir = scratch_dir("malformed");
  auto expect_error = [&](const std::string& body, const std::string& fragment) {
    std::ofstream(dir / "bad.jsonl") << body;
    CHECK_THROWS_WITH_AS(read_interactions(dir / "bad.jsonl"), doctest::Contains(fragment.c_str()),
                         DataError);
  };
  const std::string good = R"({"clicked":true,"item_id":1,"timestamp":5,"user_id":2})";
  expect_error(good + "\n{not json\n", "bad.jsonl:2:");
  expect_error(good + "\n" + good + "\n" +
                   R"({"clicked":true,"item_id":0,"timestamp":5,"user_id":2})",
               ":3:");
  expect_error(R"({"clicked":true,"item_id":1,"timestamp":5})", "missing field user_id");
  expect_error(R"({"clicked":true,"item_id":1,"timestamp":5,"user_id":2,"x":1})",
               "unknown field x");
  expect_error(R"({"clicked":1,"item_id":1,"timestamp":5,"user_id":2})", "clicked");
}

TEST_CASE("validate_changes: ordering and value rules") {
  validate_changes({{1, 10, 5.0}, {2, 5, 3.0}, {1, 20, 4.0}, {1, 30, 5.0}});
  CHECK_THROWS_AS(validate_changes({{1, 10, 5.0}, {1, 10, 4.0}}), DataError);
  CHECK_THROWS_AS(validate_changes({{1, 10, 5.0}, {1, 20, 5.0}}), DataError);
  CHECK_THROWS_AS(validate_changes({{1, 10, -1.0}}), DataError);
}

TEST_CASE("partition_states: hand cases") {
  const TimeWindow window{0, 1000};
  std::vector<InteractionEvent> three{{1, 9, 10, true}, {2, 9, 20, true}, {3, 9, 30, true}};
  auto single = partition_states(three, {}, window, 10.0);
  REQUIRE(single.states.size() == 1);
  CHECK(single.states[0].user_ids == std::vector<int>{1, 2, 3});
  CHECK(single.states[0].start == 0);
  CHECK(single.states[0].end == 1000);

  // 10 -> 8 -> 10: the revisited price is its own state.
  std::vector<AttributeChangeEvent> changes{{9, -5, 10.0}, {9, 100, 8.0}, {9, 200, 10.0}};
  auto revisit = partition_states(three, changes, window);
  REQUIRE(revisit.states.size() == 3);
  CHECK(revisit.states[0].value == 10.0);
  CHECK(revisit.states[1].value == 8.0);
  CHECK(revisit.states[2].value == 10.0);
  CHECK(revisit.states[0].user_ids.size() == 3);
  CHECK(revisit.states[1].empty());
  CHECK(revisit.states[2].empty());
  CHECK(revisit.states[1].start == 100);
  CHECK(revisit.states[1].end == 200);

  // Outside the window, or before any known price: dropped, not an error.
  std::vector<InteractionEvent> outside{{1, 9, -1, true}, {1, 9, 50, true}, {1, 9, 1000, true}};
  auto late = partition_states(outside, std::vector<AttributeChangeEvent>{{9, 60, 4.0}}, window);
  CHECK(late.dropped == 3);
  REQUIRE(late.states.size() == 1);
  CHECK(late.states[0].start == 60);
  CHECK(partition_states(three, {}, window).states.empty());
}

// Independent oracle: recompute state boundaries and search them linearly.
void check_against_brute_force(const std::vector<InteractionEvent>& interactions,
                               const std::vector<AttributeChangeEvent>& changes,
                               TimeWindow window) {
  auto result = partition_states(interactions, changes, window);
  std::vector<Timestamp> starts;
  bool known_at_start = false;
  std::size_t inside = 0;
  for (const auto& c : changes) {
    if (c.timestamp <= window.start) known_at_start = true;
    if (c.timestamp > window.start && c.timestamp < window.end) ++inside;
  }
  if (known_at_start) starts.push_back(window.start);
  for (const auto& c : changes) {
    if (c.timestamp > window.start && c.timestamp < window.end) starts.push_back(c.timestamp);
  }
  REQUIRE(result.states.size() == starts.size());
  if (known_at_start) CHECK(result.states.size() == inside + 1);
  std::vector<std::vector<int>> expect(starts.size());
  std::size_t dropped = 0;
  for (const auto& e : interactions) {
    int slot = -1;
    for (std::size_t k = 0; k < starts.size(); ++k) {
      const Timestamp end = k + 1 < starts.size() ? starts[k + 1] : window.end;
      if (e.timestamp >= starts[k] && e.timestamp < end) slot = static_cast<int>(k);
    }
    if (slot < 0) {
      ++dropped;
    } else {
      expect[static_cast<std::size_t>(slot)].push_back(e.user_id);
    }
  }
  CHECK(result.dropped == dropped);
  std::size_t total = 0;
  for (std::size_t k = 0; k < starts.size(); ++k) {
    const auto& st = result.states[k];
    CHECK(st.start == starts[k]);
    CHECK(st.end > st.start);
    if (k + 1 < starts.size()) CHECK(st.end == result.states[k + 1].start);
    CHECK(st.user_ids == expect[k]);
    for (Timestamp t : st.interaction_times) CHECK((t >= st.start && t < st.end));
    total += st.user_ids.size();
  }
  CHECK(total + dropped == interactions.size());
}

TEST_CASE("partition_states: matches a brute-force interval search") {
  Rng rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const TimeWindow window{1000, 1000 + 1 + static_cast<Timestamp>(rng() % 5000)};
    std::vector<AttributeChangeEvent> changes;
    Timestamp t = static_cast<Timestamp>(rng() % 2000);
    const int n_changes = static_cast<int>(rng() % 8);
    double price = 10.0;
    for (int c = 0; c < n_changes; ++c) {
      t += 1 + static_cast<Timestamp>(rng() % 1500);
      price += 1.0 + static_cast<double>(rng() % 3);
      changes.push_back({1, t, price});
    }
    std::vector<InteractionEvent> interactions;
    const int n_events = static_cast<int>(rng() % 40);
    for (int i = 0; i < n_events; ++i) {
      interactions.push_back({1 + static_cast<int>(rng() % 50), 1,
                              static_cast<Timestamp>(rng() % 8000), true});
    }
    std::stable_sort(interactions.begin(), interactions.end(),
                     [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
    check_against_brute_force(interactions, changes, window);
  }
}

TEST_CASE("partition_states: unsorted input is rejected") {
  std::vector<InteractionEvent> unsorted{{1, 1, 20, true}, {2, 1, 10, true}};
  CHECK_THROWS_AS(partition_states(unsorted, {}, {0, 100}, 1.0), DataError);
}

struct Catalogue {
  std::vector<ItemProfile> items{{1, 1, 100.0}, {2, 1, 50.0}, {3, 1, 200.0}, {4, 2, 10.0}};
  std::vector<AttributeChangeEvent> changes{
      {1, 0, 100.0}, {2, 0, 50.0}, {3, 0, 200.0}, {4, 0, 10.0}, {1, 500, 70.0}};
  PriceFeaturizer prices{items, changes};
};

TEST_CASE("build_sample: padding, truncation and recency") {
  Catalogue cat;
  SampleConfig config;
  config.horizon = 10000;
  const InteractionEvent exposure{7, 1, 20000, true};

  std::vector<AttributeState> two(2);
  two[0] = {1, 100.0, 10000, 15000, {3, 4}, {11000, 12000}};
  two[1] = {1, 70.0, 15000, 20000, {}, {}};
  UserProfile user{7, 2};
  TrainingSample s = build_sample(exposure, {}, two, {&user, &cat.prices}, config);
  CHECK(s.item.state_mask == Mask{1, 1, 0, 0, 0, 0, 0, 0});
  CHECK(s.item.states.size() == 8);
  CHECK(s.item.states[0].user_ids[0] == 3);
  CHECK(s.item.states[0].user_mask[1] == 1);
  CHECK(s.item.states[0].user_mask[2] == 0);
  CHECK(s.item.states[1].is_empty);
  CHECK(s.item.states[5].user_ids == std::vector<int>(50, 0));
  CHECK(s.item.change_timestamps == std::vector<Timestamp>{15000});
  CHECK(s.item.total_states == 2);
  CHECK(s.user_segment == 2);
  CHECK(s.label == 1);

  // 60 users in one state: the earliest 10 are dropped.
  AttributeState crowded{1, 100.0, 10000, 20000, {}, {}};
  for (int u = 1; u <= 60; ++u) {
    crowded.user_ids.push_back(u);
    crowded.interaction_times.push_back(10000 + u);
  }
  std::vector<AttributeState> one{crowded};
  TrainingSample c = build_sample(exposure, {}, one, {nullptr, &cat.prices}, config);
  CHECK(c.item.states[0].user_ids.front() == 11);
  CHECK(c.item.states[0].user_ids.back() == 60);
  CHECK(c.item.states[0].user_count() == 50);

  // Ten states: the most recent eight are kept, oldest first.
  std::vector<AttributeState> many;
  for (int k = 0; k < 10; ++k) {
    many.push_back({1, 100.0 - k, 10000 + 1000 * k, 11000 + 1000 * k, {k + 1}, {10000 + 1000 * k}});
  }
  TrainingSample m = build_sample(exposure, {}, many, {nullptr, &cat.prices}, config);
  CHECK(m.item.state_count() == 8);
  CHECK(m.item.states[0].user_ids[0] == 3);
  CHECK(m.item.states[7].user_ids[0] == 10);
  CHECK(m.item.total_states == 10);
  CHECK(m.item.change_timestamps.size() == 9);

  // 25 behaviors, some at or after the exposure: last 20 before it.
  std::vector<InteractionEvent> history;
  for (int k = 0; k < 25; ++k) history.push_back({7, 1 + k % 4, 15000 + 100 * k, true});
  history.push_back({7, 2, 20000, true});
  history.push_back({7, 2, 20500, true});
  TrainingSample b = build_sample(exposure, history, {}, {nullptr, &cat.prices}, config);
  CHECK(b.behavior.length() == 20);
  CHECK(b.behavior.times[0] == 15500);
  CHECK(b.behavior.times[19] == 17400);
  CHECK(b.item.state_count() == 0);

  // History that reaches the exposure is rejected.
  std::vector<AttributeState> leaky{{1, 100.0, 10000, 20000, {3}, {20000}}};
  CHECK_THROWS_AS(build_sample(exposure, {}, leaky, {nullptr, &cat.prices}, config),
                  DataError);
}

TEST_CASE("PriceFeaturizer: bucket definitions") {
  Catalogue cat;
  // Item 1 at 70 (30% off): decile 4; category 1 bases {50, 100, 200} give
  // quintile cuts at 50, 100, 100, 200.
  AttributeFeatures f = cat.prices.features(1, 70.0, 600);
  CHECK(f.discount == 4);
  CHECK(f.price_level == 2);
  CHECK(f.price_rank == 6);  // cheaper than 1 of 2 other items
  CHECK(cat.prices.features(1, 100.0, 0).discount == 1);
  CHECK(cat.prices.features(1, 100.0, 0).price_rank == 6);
  CHECK(cat.prices.features(3, 200.0, 0).price_rank == 10);
  CHECK(cat.prices.features(2, 50.0, 0).price_rank == 1);
  CHECK(cat.prices.features(4, 10.0, 0).price_rank == 1);  // alone in its category
  for (double d = 0.0; d < 0.95; d += 0.1) {
    const int expect = 1 + static_cast<int>(std::round(d * 10));
    CHECK(cat.prices.features(3, 200.0 * (1 - d), 0).discount == expect);
  }
  CHECK(cat.prices.price_at(1, 499) == 100.0);
  CHECK(cat.prices.price_at(1, 500) == 70.0);
  CHECK_FALSE(cat.prices.price_at(1, -1).has_value());
}

TEST_CASE("samples: JSON round trip keeps every padded field") {
  auto world = generate_synthetic_logs(small_world());
  SampleConfig config;
  auto data = assemble_dataset(world, config);
  const fs::path dir = scratch_dir("samples");
  write_samples(dir / "s.jsonl", data.train);
  auto back = read_samples(dir / "s.jsonl", config);
  REQUIRE(back.size() == data.train.size());
  for (std::size_t n = 0; n < back.size(); ++n) {
    const auto& a = data.train[n];
    const auto& b = back[n];
    CHECK(to_json_line(a) == to_json_line(b));
    CHECK(a.behavior.item_ids == b.behavior.item_ids);
    CHECK(a.item.state_mask == b.item.state_mask);
    for (std::size_t k = 0; k < config.max_states; ++k) {
      CHECK(a.item.states[k].user_ids == b.item.states[k].user_ids);
      CHECK(a.item.states[k].user_mask == b.item.states[k].user_mask);
      CHECK(a.item.states[k].is_empty == b.item.states[k].is_empty);
    }
  }
}

TEST_CASE("assembled corpus: no temporal leakage and bounded shapes") {
  auto world = generate_synthetic_logs(small_world());
  auto data = assemble_dataset(world, SampleConfig{});
  std::size_t scanned = 0;
  for (const auto* split : {&data.train, &data.test}) {
    for (const auto& s : *split) {
      auto latest = latest_history_time(s);
      if (latest) CHECK(*latest < s.timestamp);
      CHECK(s.item.states.size() == 8);
      CHECK(s.behavior.item_ids.size() == 20);
      for (std::size_t k = 0; k < s.item.state_count(); ++k) {
        if (k > 0) CHECK(s.item.states[k].start_time > s.item.states[k - 1].start_time);
        CHECK(s.item.states[k].is_empty == (s.item.states[k].user_count() == 0));
      }
      ++scanned;
    }
  }
  CHECK(scanned == world.exposures.size());
  for (const auto& s : data.test) CHECK(s.timestamp >= world.test_start);
  for (const auto& s : data.train) CHECK(s.timestamp < world.test_start);
}

TEST_CASE("generator: identical seeds give byte-identical corpora") {
  auto write_all = [](const SyntheticWorld& w, const fs::path& dir) {
    write_events(dir / "interactions.jsonl", w.log.interactions);
    write_events(dir / "changes.jsonl", w.log.changes);
    write_events(dir / "exposures.jsonl", w.exposures);
  };
  const fs::path a = scratch_dir("det_a"), b = scratch_dir("det_b");
  write_all(generate_synthetic_logs(small_world()), a);
  write_all(generate_synthetic_logs(small_world()), b);
  for (const char* f : {"interactions.jsonl", "changes.jsonl", "exposures.jsonl"}) {
    CHECK(slurp(a / f) == slurp(b / f));
  }
  auto other = small_world();
  other.seed = 8;
  const fs::path c = scratch_dir("det_c");
  write_all(generate_synthetic_logs(other), c);
  CHECK(slurp(a / "interactions.jsonl") != slurp(c / "interactions.jsonl"));
}

TEST_CASE("generator: event invariants and negative ratio") {
  auto cfg = small_world();
  auto world = generate_synthetic_logs(cfg);
  validate_changes(world.log.changes);
  validate_interactions(world.log.interactions);
  std::size_t pos = 0;
  for (const auto& e : world.exposures) pos += e.clicked;
  CHECK(pos == 500);
  CHECK(world.exposures.size() == 3000);
  for (std::size_t i = 1; i < world.exposures.size(); ++i) {
    CHECK(world.exposures[i - 1].timestamp <= world.exposures[i].timestamp);
  }
  for (std::size_t i = 0; i < world.exposures.size(); i += 97) {
    const auto& e = world.exposures[i];
    CHECK(world.exposure_probability[i] ==
          world.click_probability(e.user_id, e.item_id, e.timestamp));
  }
}

TEST_CASE("generator: zero change rate gives one state per item") {
  auto cfg = small_world();
  cfg.change_rate = 0.0;
  auto world = generate_synthetic_logs(cfg);
  CHECK(world.log.changes.size() == static_cast<std::size_t>(cfg.items));
  for (const auto& s : assemble_dataset(world, SampleConfig{}).train) {
    CHECK(s.item.total_states == 1);
    CHECK(s.item.change_timestamps.empty());
  }
}

TEST_CASE("generator: default change rate yields about 2.73 states per sample") {
  auto world = generate_synthetic_logs(SyntheticWorldConfig{});
  auto data = assemble_dataset(world, SampleConfig{});
  double total = 0;
  for (const auto* split : {&data.train, &data.test}) {
    for (const auto& s : *split) total += s.item.total_states;
  }
  const double mean = total / static_cast<double>(world.exposures.size());
  MESSAGE("mean states per sample: " << mean);
  CHECK(std::abs(mean - 2.73) <= 0.3);
}

// Pearson chi-square of discount level against label.
double discount_independence_p_value(const SyntheticWorld& world) {
  const int levels = 6;
  std::vector<double> clicks(levels, 0), totals(levels, 0);
  double all_clicks = 0;
  for (const auto& e : world.exposures) {
    const int level = static_cast<int>(std::round(world.discount_at(e.item_id, e.timestamp) * 10));
    totals[level] += 1;
    clicks[level] += e.clicked;
    all_clicks += e.clicked;
  }
  const double n = static_cast<double>(world.exposures.size());
  const double rate = all_clicks / n;
  double stat = 0;
  int used = 0;
  for (int l = 0; l < levels; ++l) {
    if (totals[l] == 0) continue;
    ++used;
    const double e1 = totals[l] * rate, e0 = totals[l] * (1 - rate);
    stat += (clicks[l] - e1) * (clicks[l] - e1) / e1 +
            (totals[l] - clicks[l] - e0) * (totals[l] - clicks[l] - e0) / e0;
  }
  boost::math::chi_squared dist(used - 1);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

TEST_CASE("generator: without price sensitivity clicks ignore the discount") {
  auto cfg = small_world();
  cfg.exposures = 12000;
  cfg.w_sensitivity = 0.0;
  cfg.w_novelty = 0.0;
  const double p_flat = discount_independence_p_value(generate_synthetic_logs(cfg));
  MESSAGE("p-value without sensitivity: " << p_flat);
  CHECK(p_flat > 0.01);

  // Power check: the same test detects a strong price effect.
  cfg.w_sensitivity = 3.0;
  cfg.price_sensitive = 1.0;
  cfg.neutral = 0.0;
  cfg.premium = 0.0;
  cfg.appeal_rate = 1.0;
  CHECK(discount_independence_p_value(generate_synthetic_logs(cfg)) < 1e-6);
}

TEST_CASE("generator: invalid configs are rejected") {
  auto cfg = small_world();
  cfg.neutral = 0.5;
  CHECK_THROWS_AS(generate_synthetic_logs(cfg), ConfigError);
  cfg = small_world();
  cfg.users = 0;
  CHECK_THROWS_AS(generate_synthetic_logs(cfg), ConfigError);
  cfg = small_world();
  cfg.history_days = 35;
  CHECK_THROWS_AS(generate_synthetic_logs(cfg), ConfigError);
}

TEST_CASE("generator: a price cut adds its size to the click logit") {
  auto cfg = small_world();
  const SyntheticWorld flat = generate_synthetic_logs(cfg);
  cfg.w_price_drop = 2.0;
  const SyntheticWorld cut = generate_synthetic_logs(cfg);
  auto logit = [](double p) { return std::log(p / (1.0 - p)); };
  std::size_t checked = 0, cuts = 0;
  for (int item = 1; item <= cfg.items; ++item) {
    const auto& list = flat.changes_by_item[static_cast<std::size_t>(item)];
    if (list.size() < 2) continue;
    const Timestamp t = list.back().timestamp + 3600;
    const double base = flat.log.items[static_cast<std::size_t>(item - 1)].base_price;
    const double now = 1.0 - list.back().new_value / base;
    const double before = 1.0 - list[list.size() - 2].new_value / base;
    const double expect = 2.0 * std::max(0.0, now - before) / cfg.max_discount;
    cuts += now > before;
    for (int user = 1; user <= 20; ++user) {
      if (flat.truth.noise_user[static_cast<std::size_t>(user)]) continue;
      const double diff = logit(cut.click_probability(user, item, t)) -
                          logit(flat.click_probability(user, item, t));
      CHECK(std::abs(diff - expect) < 1e-9);
      ++checked;
    }
  }
  CHECK(checked > 1000);
  CHECK(cuts > 50);
}

TEST_CASE("generator: latent persistence sets the correlation across changes") {
  auto correlation = [](double persistence) {
    auto cfg = small_world();
    cfg.change_rate = 4.0;
    cfg.latent_persistence = persistence;
    const SyntheticWorld w = generate_synthetic_logs(cfg);
    const auto dim = static_cast<std::size_t>(w.truth.latent_dim);
    double xy = 0.0, xx = 0.0, yy = 0.0;
    for (int item = 1; item <= cfg.items; ++item) {
      const auto i = static_cast<std::size_t>(item);
      const auto& rows = w.truth.item_latent_after_change[i];
      REQUIRE(rows.size() == w.changes_by_item[i].size() * dim);
      // The opening price keeps the base taste.
      for (std::size_t k = 0; k < dim; ++k) CHECK(rows[k] == w.truth.item_latent[i * dim + k]);
      for (std::size_t c = 1; c < w.changes_by_item[i].size(); ++c) {
        for (std::size_t k = 0; k < dim; ++k) {
          const double x = rows[(c - 1) * dim + k], y = rows[c * dim + k];
          xy += x * y;
          xx += x * x;
          yy += y * y;
        }
      }
    }
    return xy / std::sqrt(xx * yy);
  };
  // Stationary AR(1) rows with unit variance: the lag-one correlation is
  // the persistence itself.
  CHECK(std::abs(correlation(0.5) - 0.5) < 0.05);
  CHECK(std::abs(correlation(0.0)) < 0.05);

  auto cfg = small_world();
  const SyntheticWorld fixed = generate_synthetic_logs(cfg);
  for (const auto& rows : fixed.truth.item_latent_after_change) CHECK(rows.empty());
  cfg.latent_persistence = 1.5;
  CHECK_THROWS_AS(generate_synthetic_logs(cfg), ConfigError);
}

TEST_CASE("bayes_auc_oracle: limits and pairwise oracle") {
  std::vector<InteractionEvent> ex;
  std::vector<double> p;
  for (int i = 0; i < 20; ++i) {
    ex.push_back({1, 1, i, i % 3 == 0});
    p.push_back(0.3);
  }
  CHECK(bayes_auc_oracle(ex, p) == 0.5);
  for (int i = 0; i < 20; ++i) p[static_cast<std::size_t>(i)] = ex[static_cast<std::size_t>(i)].clicked ? 0.9 : 0.1;
  CHECK(bayes_auc_oracle(ex, p) == 1.0);

  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng() % 499;
    ex.assign(n, {});
    p.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      ex[i].clicked = rng() % 3 == 0;
      p[i] = static_cast<double>(rng() % 20) / 20.0;  // plenty of ties
    }
    ex[0].clicked = true;
    ex[1].clicked = false;
    double wins = 0, pairs = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (!ex[i].clicked || ex[j].clicked) continue;
        pairs += 1;
        wins += p[i] > p[j] ? 1.0 : p[i] == p[j] ? 0.5 : 0.0;
      }
    }
    CHECK(bayes_auc_oracle(ex, p) == doctest::Approx(wins / pairs).epsilon(1e-15));
  }
}

}  // namespace
}  // namespace caen
