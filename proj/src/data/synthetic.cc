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

#include "caen/data/synthetic.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "caen/nn/params.h"

namespace caen {
namespace {

constexpr double kDiscountStep = 0.1;

// Samplers built on uniform01 so corpora do not depend on the standard
// library's distribution implementations.
double normal(Rng& rng) {
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Marsaglia-Tsang; shape >= 1 is enforced by the config.
double gamma(Rng& rng, double shape, double scale) {
  const double d = shape - 1.0 / 3.0, c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = 1.0 - uniform01(rng);
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v * scale;
  }
}

int poisson(Rng& rng, double mean) {
  const double limit = std::exp(-mean);
  int k = 0;
  for (double p = uniform01(rng); p > limit; p *= uniform01(rng)) ++k;
  return k;
}

int uniform_int(Rng& rng, int lo, int hi) {
  const int span = hi - lo + 1;
  return lo + std::min(span - 1, static_cast<int>(uniform01(rng) * span));
}

Timestamp uniform_time(Rng& rng, Timestamp lo, Timestamp hi) {
  return lo + static_cast<Timestamp>(uniform01(rng) * static_cast<double>(hi - lo));
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("world config: " + what);
}

bool by_time_then_ids(const InteractionEvent& a, const InteractionEvent& b) {
  if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
  if (a.user_id != b.user_id) return a.user_id < b.user_id;
  return a.item_id < b.item_id;
}

}  // namespace

void SyntheticWorldConfig::validate() const {
  require(users > 0 && items > 0 && categories > 0 && segments > 0, "counts must be positive");
  require(price_sensitive >= 0 && neutral >= 0 && premium >= 0,
          "user type proportions must be non-negative");
  require(std::abs(price_sensitive + neutral + premium - 1.0) < 1e-9,
          "user type proportions must sum to 1");
  require(segment_signal >= 0 && segment_signal <= 1, "segment_signal must be in [0, 1]");
  require(segments % 3 == 0, "segments must be a multiple of 3");
  require(noise_user_fraction >= 0 && noise_user_fraction < 1,
          "noise_user_fraction must be in [0, 1)");
  require(noise_click_prob >= 0 && noise_click_prob <= 1, "noise_click_prob must be in [0, 1]");
  require(noise_activity > 0, "noise_activity must be positive");
  require(latent_dim > 0, "latent_dim must be positive");
  require(category_log_price_min <= category_log_price_max, "category price range inverted");
  require(item_log_price_sd >= 0 && quality_log_sd >= 0, "spreads must be non-negative");
  require(appeal_rate >= 0 && appeal_rate <= 1, "appeal_rate must be in [0, 1]");
  require(change_rate >= 0, "change_rate must be non-negative");
  require(change_rate_shape >= 1, "change_rate_shape must be >= 1");
  require(max_discount >= kDiscountStep - 1e-12 && max_discount < 1,
          "max_discount must be in [0.1, 1)");
  require(horizon_days > 0 && history_days > 0 && exposure_days > 0 && test_days > 0,
          "day counts must be positive");
  require(history_days + exposure_days <= horizon_days,
          "history_days + exposure_days must fit in horizon_days");
  require(test_days < exposure_days, "test_days must be smaller than exposure_days");
  require(impressions_per_day > 0, "impressions_per_day must be positive");
  require(exposures > 1, "exposures must be at least 2");
  require(negative_ratio > 0, "negative_ratio must be positive");
  require(novelty_hours > 0, "novelty_hours must be positive");
  require(latent_persistence >= 0 && latent_persistence <= 1,
          "latent_persistence must be in [0, 1]");
  require(change_rate * horizon_days / history_days * 10 < 500, "change_rate too large");
}

double SyntheticWorld::discount_at(int item_id, Timestamp t) const {
  const auto& list = changes_by_item.at(static_cast<std::size_t>(item_id));
  auto pos = std::upper_bound(list.begin(), list.end(), t,
                              [](Timestamp v, const auto& c) { return v < c.timestamp; });
  if (pos == list.begin()) return 0.0;
  const double base = log.items[static_cast<std::size_t>(item_id - 1)].base_price;
  return 1.0 - std::prev(pos)->new_value / base;
}

double SyntheticWorld::click_probability(int user_id, int item_id, Timestamp t) const {
  const auto u = static_cast<std::size_t>(user_id), i = static_cast<std::size_t>(item_id);
  if (truth.noise_user[u]) return config.noise_click_prob;
  const auto& list = changes_by_item[i];
  auto pos = std::upper_bound(list.begin(), list.end(), t,
                              [](Timestamp v, const auto& c) { return v < c.timestamp; });
  const std::size_t idx = static_cast<std::size_t>(pos - list.begin());

  const int dim = truth.latent_dim;
  const auto& drifted = truth.item_latent_after_change[i];
  const double* item_latent = drifted.empty() || idx == 0
                                  ? &truth.item_latent[i * dim]
                                  : &drifted[(idx - 1) * static_cast<std::size_t>(dim)];
  double aff = 0.0;
  for (int k = 0; k < dim; ++k) aff += truth.user_latent[u * dim + k] * item_latent[k];
  aff /= std::sqrt(static_cast<double>(dim));
  const double base = log.items[i - 1].base_price;
  double discount = 0.0, novelty = 0.0, drop = 0.0;
  if (idx > 0) {
    discount = 1.0 - list[idx - 1].new_value / base;
    if (idx > 1) {
      const double hours = static_cast<double>(t - list[idx - 1].timestamp) / kSecondsPerHour;
      novelty = std::exp(-hours / config.novelty_hours);
      drop = std::max(0.0, discount - (1.0 - list[idx - 2].new_value / base));
    }
  }
  const double logit = config.w_bias + config.w_quality * truth.quality[i] * aff +
                       config.w_sensitivity * truth.price_type[u] *
                           (discount / config.max_discount) * truth.appeal[i] +
                       config.w_novelty * novelty +
                       config.w_price_drop * drop / config.max_discount;
  return 1.0 / (1.0 + std::exp(-logit));
}

SyntheticWorld generate_synthetic_logs(const SyntheticWorldConfig& config) {
  config.validate();
  Rng rng(config.seed);
  SyntheticWorld w;
  w.config = config;
  WorldTruth& truth = w.truth;
  const int dim = config.latent_dim;
  truth.latent_dim = dim;
  const auto nu = static_cast<std::size_t>(config.users) + 1;
  const auto ni = static_cast<std::size_t>(config.items) + 1;

  // Users; index 0 is unused so vectors are addressable by id.
  truth.price_type.assign(nu, 0);
  truth.noise_user.assign(nu, 0);
  truth.user_latent.assign(nu * dim, 0.0);
  const int block = config.segments / 3;
  for (int id = 1; id <= config.users; ++id) {
    const auto u = static_cast<std::size_t>(id);
    truth.noise_user[u] = uniform01(rng) < config.noise_user_fraction;
    const double r = uniform01(rng);
    const int type = r < config.price_sensitive ? 1
                     : r < config.price_sensitive + config.neutral ? 0
                                                                   : -1;
    truth.price_type[u] = type;
    int segment;
    if (!truth.noise_user[u] && uniform01(rng) < config.segment_signal) {
      segment = (1 - type) * block + uniform_int(rng, 1, block);
    } else {
      segment = uniform_int(rng, 1, config.segments);
    }
    for (int k = 0; k < dim; ++k) truth.user_latent[u * dim + k] = normal(rng);
    w.log.users.push_back({id, segment});
  }

  // Items and their price trajectories.
  std::vector<double> category_mean(static_cast<std::size_t>(config.categories) + 1);
  for (auto& m : category_mean) {
    m = uniform(rng, config.category_log_price_min, config.category_log_price_max);
  }
  truth.item_latent.assign(ni * dim, 0.0);
  truth.quality.assign(ni, 0.0);
  truth.appeal.assign(ni, 0.0);
  truth.item_latent_after_change.assign(ni, {});
  w.changes_by_item.assign(ni, {});
  const Timestamp end = config.start_time + config.horizon_days * kSecondsPerDay;
  const int levels = static_cast<int>(std::round(config.max_discount / kDiscountStep)) + 1;
  const double periods = static_cast<double>(config.horizon_days) / config.history_days;
  for (int id = 1; id <= config.items; ++id) {
    const auto i = static_cast<std::size_t>(id);
    const int category = uniform_int(rng, 1, config.categories);
    const double log_price =
        category_mean[static_cast<std::size_t>(category)] + config.item_log_price_sd * normal(rng);
    const double base = std::max(0.01, std::round(std::exp(log_price) * 100.0) / 100.0);
    w.log.items.push_back({id, category, base});
    truth.quality[i] = std::exp(config.quality_log_sd * normal(rng));
    truth.appeal[i] = uniform01(rng) < config.appeal_rate ? 1.0 : 0.0;
    for (int k = 0; k < dim; ++k) truth.item_latent[i * dim + k] = normal(rng);

    auto& changes = w.changes_by_item[i];
    changes.push_back({id, config.start_time, base});
    const double rate =
        config.change_rate * gamma(rng, config.change_rate_shape, 1.0 / config.change_rate_shape);
    const int count = poisson(rng, rate * periods);
    std::vector<Timestamp> times;
    for (int c = 0; c < count; ++c) times.push_back(uniform_time(rng, config.start_time + 1, end));
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    int level = 0;
    for (Timestamp t : times) {
      int next = uniform_int(rng, 0, levels - 2);
      if (next >= level) ++next;  // any level except the current one
      level = next;
      changes.push_back({id, t, base * (1.0 - level * kDiscountStep)});
    }
    w.log.changes.insert(w.log.changes.end(), changes.begin(), changes.end());
    if (config.latent_persistence < 1.0) {
      const double rho = config.latent_persistence, fresh = std::sqrt(1.0 - rho * rho);
      auto& rows = truth.item_latent_after_change[i];
      rows.assign(changes.size() * static_cast<std::size_t>(dim), 0.0);
      for (std::size_t c = 0; c < changes.size(); ++c) {
        for (int k = 0; k < dim; ++k) {
          // The first entry is the opening price, which keeps the base taste.
          const double prev =
              c == 0 ? truth.item_latent[i * dim + k] : rows[(c - 1) * dim + k];
          rows[c * dim + k] = c == 0 ? prev : rho * prev + fresh * normal(rng);
        }
      }
    }
  }

  // Background traffic; only clicks are logged.
  std::vector<double> cumulative(nu, 0.0);
  for (std::size_t u = 1; u < nu; ++u) {
    cumulative[u] = cumulative[u - 1] + (truth.noise_user[u] ? config.noise_activity : 1.0);
  }
  const auto impressions =
      static_cast<std::size_t>(std::llround(config.impressions_per_day * config.horizon_days));
  for (std::size_t n = 0; n < impressions; ++n) {
    const double r = uniform01(rng) * cumulative.back();
    const auto user = static_cast<int>(
        std::upper_bound(cumulative.begin() + 1, cumulative.end(), r) - cumulative.begin());
    const int item = uniform_int(rng, 1, config.items);
    const Timestamp t = uniform_time(rng, config.start_time, end);
    if (uniform01(rng) < w.click_probability(std::min(user, config.users), item, t)) {
      w.log.interactions.push_back({std::min(user, config.users), item, t, true});
    }
  }
  std::sort(w.log.interactions.begin(), w.log.interactions.end(), by_time_then_ids);

  // Labelled exposures in the final days, negative-sampled to the ratio.
  const auto positives = static_cast<int>(
      std::llround(config.exposures / (1.0 + config.negative_ratio)));
  const int negatives = config.exposures - positives;
  if (positives < 1 || negatives < 1) throw ConfigError("world config: exposure quota too small");
  const Timestamp exposure_start = end - config.exposure_days * kSecondsPerDay;
  int have_pos = 0, have_neg = 0;
  std::vector<std::pair<InteractionEvent, double>> drawn;
  const long long max_draws = 10000LL * config.exposures;
  for (long long n = 0; have_pos < positives || have_neg < negatives; ++n) {
    if (n > max_draws) throw ConfigError("world config: click rate too low to fill exposures");
    const int user = uniform_int(rng, 1, config.users);
    const int item = uniform_int(rng, 1, config.items);
    const Timestamp t = uniform_time(rng, exposure_start, end);
    const double p = w.click_probability(user, item, t);
    const bool clicked = uniform01(rng) < p;
    int& have = clicked ? have_pos : have_neg;
    if (have >= (clicked ? positives : negatives)) continue;
    ++have;
    drawn.push_back({{user, item, t, clicked}, p});
  }
  std::stable_sort(drawn.begin(), drawn.end(),
                   [](const auto& a, const auto& b) { return by_time_then_ids(a.first, b.first); });
  for (const auto& [e, p] : drawn) {
    w.exposures.push_back(e);
    w.exposure_probability.push_back(p);
  }
  w.test_start = end - config.test_days * kSecondsPerDay;
  return w;
}

double bayes_auc_oracle(std::span<const InteractionEvent> exposures,
                        std::span<const double> probabilities) {
  if (exposures.size() != probabilities.size()) {
    throw DataError("bayes_auc_oracle: size mismatch");
  }
  std::vector<double> neg;
  std::vector<double> pos;
  for (std::size_t i = 0; i < exposures.size(); ++i) {
    (exposures[i].clicked ? pos : neg).push_back(probabilities[i]);
  }
  if (pos.empty() || neg.empty()) throw DataError("bayes_auc_oracle: need both classes");
  std::sort(neg.begin(), neg.end());
  // For each positive, count negatives strictly below and tied.
  long double wins = 0;
  for (double p : pos) {
    const auto lo = std::lower_bound(neg.begin(), neg.end(), p);
    const auto hi = std::upper_bound(lo, neg.end(), p);
    wins += static_cast<long double>(lo - neg.begin()) + 0.5L * static_cast<long double>(hi - lo);
  }
  return static_cast<double>(wins / (static_cast<long double>(pos.size()) * neg.size()));
}

AssembledDataset assemble_dataset(const SyntheticWorld& world, const SampleConfig& config) {
  HistoryIndex index(world.log);
  AssembledDataset out;
  for (std::size_t n = 0; n < world.exposures.size(); ++n) {
    TrainingSample s = index.build(world.exposures[n], config);
    s.true_probability = world.exposure_probability[n];
    (s.timestamp >= world.test_start ? out.test : out.train).push_back(std::move(s));
  }
  return out;
}

}  // namespace caen
