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

#include "caen/train/config.h"

#include <fstream>
#include <functional>
#include <sstream>
#include <variant>
#include <vector>

#include "caen/errors.h"
#include "toml.hpp"

namespace caen {
namespace {

// std::size_t and std::uint64_t are the same type on the supported targets.
static_assert(std::is_same_v<std::size_t, std::uint64_t>);
using Slot = std::variant<int*, double*, std::uint64_t*, std::int64_t*, std::vector<std::size_t>*,
                          Variant*>;

struct Field {
  const char* section;
  const char* key;
  Slot slot;
};

std::vector<Field> fields(RunConfig& c) {
  auto& w = c.world;
  auto& s = c.sample;
  auto& m = c.model;
  auto& t = c.train;
  return {
      {"world", "seed", &w.seed},
      {"world", "users", &w.users},
      {"world", "items", &w.items},
      {"world", "categories", &w.categories},
      {"world", "segments", &w.segments},
      {"world", "price_sensitive", &w.price_sensitive},
      {"world", "neutral", &w.neutral},
      {"world", "premium", &w.premium},
      {"world", "segment_signal", &w.segment_signal},
      {"world", "noise_user_fraction", &w.noise_user_fraction},
      {"world", "noise_click_prob", &w.noise_click_prob},
      {"world", "noise_activity", &w.noise_activity},
      {"world", "latent_dim", &w.latent_dim},
      {"world", "category_log_price_min", &w.category_log_price_min},
      {"world", "category_log_price_max", &w.category_log_price_max},
      {"world", "item_log_price_sd", &w.item_log_price_sd},
      {"world", "quality_log_sd", &w.quality_log_sd},
      {"world", "appeal_rate", &w.appeal_rate},
      {"world", "change_rate", &w.change_rate},
      {"world", "change_rate_shape", &w.change_rate_shape},
      {"world", "max_discount", &w.max_discount},
      {"world", "horizon_days", &w.horizon_days},
      {"world", "history_days", &w.history_days},
      {"world", "exposure_days", &w.exposure_days},
      {"world", "test_days", &w.test_days},
      {"world", "start_time", &w.start_time},
      {"world", "impressions_per_day", &w.impressions_per_day},
      {"world", "exposures", &w.exposures},
      {"world", "negative_ratio", &w.negative_ratio},
      {"world", "w_bias", &w.w_bias},
      {"world", "w_quality", &w.w_quality},
      {"world", "w_sensitivity", &w.w_sensitivity},
      {"world", "w_novelty", &w.w_novelty},
      {"world", "novelty_hours", &w.novelty_hours},
      {"world", "w_price_drop", &w.w_price_drop},
      {"world", "latent_persistence", &w.latent_persistence},
      {"sample", "max_states", &s.max_states},
      {"sample", "max_users", &s.max_users},
      {"sample", "max_behaviors", &s.max_behaviors},
      {"model", "id_dim", &m.id_dim},
      {"model", "attribute_dim", &m.attribute_dim},
      {"model", "profile_dim", &m.profile_dim},
      {"model", "heads", &m.heads},
      {"model", "key_proj_dim", &m.key_proj_dim},
      {"model", "value_proj_dim", &m.value_proj_dim},
      {"model", "state_hidden", &m.state_hidden},
      {"model", "frequency_hidden", &m.frequency_hidden},
      {"model", "behavior_hidden", &m.behavior_hidden},
      {"model", "mlp_hidden", &m.mlp_hidden},
      {"model", "seed", &m.seed},
      {"train", "batch_size", &t.batch_size},
      {"train", "learning_rate", &t.learning_rate},
      {"train", "min_learning_rate", &t.min_learning_rate},
      {"train", "epochs", &t.epochs},
      {"train", "seed", &t.seed},
      {"train", "variant", &t.variant},
      {"train", "eval_batch_size", &t.eval_batch_size},
      {"train", "log_every", &t.log_every},
  };
}

[[noreturn]] void bad_value(const std::string& where, const char* expected) {
  throw ConfigError(where + ": expected " + expected);
}

std::int64_t to_integer(const toml::node& node, const std::string& where) {
  auto v = node.value<std::int64_t>();
  if (!node.is_integer() || !v) bad_value(where, "an integer");
  return *v;
}

std::size_t to_count(const toml::node& node, const std::string& where) {
  const std::int64_t v = to_integer(node, where);
  if (v < 0) bad_value(where, "a non-negative integer");
  return static_cast<std::size_t>(v);
}

void assign(const Field& f, const toml::node& node, const std::string& where) {
  std::visit(
      [&](auto* target) {
        using T = std::remove_pointer_t<decltype(target)>;
        if constexpr (std::is_same_v<T, double>) {
          if (!node.is_number()) bad_value(where, "a number");
          *target = *node.value<double>();
        } else if constexpr (std::is_same_v<T, int>) {
          *target = static_cast<int>(to_integer(node, where));
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          *target = to_integer(node, where);
        } else if constexpr (std::is_same_v<T, std::uint64_t>) {
          *target = static_cast<T>(to_count(node, where));
        } else if constexpr (std::is_same_v<T, std::vector<std::size_t>>) {
          const toml::array* arr = node.as_array();
          if (!arr) bad_value(where, "an array of integers");
          target->clear();
          for (const auto& e : *arr) target->push_back(to_count(e, where));
        } else {
          const auto name = node.value<std::string>();
          if (!name) bad_value(where, "a string");
          *target = parse_variant(*name);
        }
      },
      f.slot);
}

void assign(const Field& f, const nlohmann::json& j) {
  std::visit(
      [&](auto* target) {
        using T = std::remove_pointer_t<decltype(target)>;
        if constexpr (std::is_same_v<T, Variant>) {
          *target = parse_variant(j.get<std::string>());
        } else {
          *target = j.get<T>();
        }
      },
      f.slot);
}

nlohmann::json value_json(const Field& f) {
  return std::visit(
      [](auto* target) -> nlohmann::json {
        using T = std::remove_pointer_t<decltype(target)>;
        if constexpr (std::is_same_v<T, Variant>) {
          return variant_name(*target);
        } else {
          return *target;
        }
      },
      f.slot);
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("train.batch_size must be at least 1");
  if (eval_batch_size == 0) throw ConfigError("train.eval_batch_size must be at least 1");
  if (!(min_learning_rate > 0.0) || !(min_learning_rate <= learning_rate)) {
    throw ConfigError("train: need 0 < min_learning_rate <= learning_rate");
  }
}

SampleConfig RunConfig::sample_config() const {
  SampleConfig s = sample;
  s.horizon = static_cast<Timestamp>(world.history_days) * kSecondsPerDay;
  return s;
}

ModelConfig RunConfig::model_config() const {
  ModelConfig m = model;
  m.users = static_cast<std::size_t>(world.users);
  m.items = static_cast<std::size_t>(world.items);
  m.segments = static_cast<std::size_t>(world.segments);
  m.categories = static_cast<std::size_t>(world.categories);
  return m;
}

void RunConfig::validate() const {
  world.validate();
  model_config().validate();
  train.validate();
  if (sample.max_states == 0 || sample.max_users == 0 || sample.max_behaviors == 0) {
    throw ConfigError("sample: truncation lengths must be positive");
  }
}

RunConfig parse_run_config(std::string_view text, std::string_view source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << source << ":" << e.source().begin.line << ": " << e.description();
    throw ConfigError(msg.str());
  }
  RunConfig config;
  const auto table = fields(config);
  for (const auto& [section, node] : root) {
    const std::string name(section.str());
    const toml::table* body = node.as_table();
    if (!body) throw ConfigError(std::string(source) + ": top-level key '" + name + "' outside a table");
    bool known_section = false;
    for (const Field& f : table) known_section |= name == f.section;
    if (!known_section) throw ConfigError(std::string(source) + ": unknown table [" + name + "]");
    for (const auto& [key, value] : *body) {
      const std::string where = name + "." + std::string(key.str());
      auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) {
        return name == f.section && key.str() == f.key;
      });
      if (it == table.end()) throw ConfigError(std::string(source) + ": unknown key " + where);
      assign(*it, value, where);
    }
  }
  config.validate();
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str(), path.string());
}

nlohmann::json to_json(const RunConfig& config) {
  RunConfig copy = config;
  nlohmann::json j = nlohmann::json::object();
  for (const Field& f : fields(copy)) j[f.section][f.key] = value_json(f);
  return j;
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig config;
  for (const Field& f : fields(config)) {
    if (!j.contains(f.section) || !j[f.section].contains(f.key)) {
      throw ConfigError(std::string("config snapshot lacks ") + f.section + "." + f.key);
    }
    try {
      assign(f, j[f.section][f.key]);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config snapshot ") + f.section + "." + f.key + ": " + e.what());
    }
  }
  config.validate();
  return config;
}

}  // namespace caen
