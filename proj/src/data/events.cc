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

#include "caen/data/events.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <map>

#include "caen/data/jsonl.h"

namespace caen {
namespace {

using json = nlohmann::json;

int parse_id(const json& j, const char* key) {
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw DataError(std::string(key) + " must be an integer");
  const auto id = v.get<std::int64_t>();
  if (id < 1 || id > INT32_MAX) {
    throw DataError(std::string(key) + " must be >= 1, got " + std::to_string(id));
  }
  return static_cast<int>(id);
}

Timestamp parse_time(const json& j) {
  const json& v = j.at("timestamp");
  if (!v.is_number_integer()) throw DataError("timestamp must be an integer");
  return v.get<Timestamp>();
}

double parse_positive(const json& j, const char* key) {
  const json& v = j.at(key);
  if (!v.is_number()) throw DataError(std::string(key) + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x) || x <= 0.0) {
    throw DataError(std::string(key) + " must be a positive number");
  }
  return x;
}

InteractionEvent parse_interaction(const json& j) {
  jsonl::require_keys(j, {"clicked", "item_id", "timestamp", "user_id"});
  if (!j.at("clicked").is_boolean()) throw DataError("clicked must be a boolean");
  return {parse_id(j, "user_id"), parse_id(j, "item_id"), parse_time(j),
          j.at("clicked").get<bool>()};
}

AttributeChangeEvent parse_change(const json& j) {
  jsonl::require_keys(j, {"item_id", "new_value", "timestamp"});
  return {parse_id(j, "item_id"), parse_time(j), parse_positive(j, "new_value")};
}

UserProfile parse_user(const json& j) {
  jsonl::require_keys(j, {"segment", "user_id"});
  return {parse_id(j, "user_id"), parse_id(j, "segment")};
}

ItemProfile parse_item(const json& j) {
  jsonl::require_keys(j, {"base_price", "category", "item_id"});
  return {parse_id(j, "item_id"), parse_id(j, "category"),
          parse_positive(j, "base_price")};
}

template <typename T>
void write_lines(const std::filesystem::path& path, const std::vector<T>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  for (const auto& r : records) out << to_json_line(r) << '\n';
  if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace

namespace jsonl {

void require_keys(const json& j, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw DataError("expected a JSON object");
  for (const char* k : keys) {
    if (!j.contains(k)) throw DataError(std::string("missing field ") + k);
  }
  if (j.size() != keys.size()) {
    for (const auto& [k, _] : j.items()) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* e) { return k == e; })) {
        throw DataError("unknown field " + k);
      }
    }
  }
}

}  // namespace jsonl

std::string to_json_line(const InteractionEvent& e) {
  json j = {{"user_id", e.user_id},
            {"item_id", e.item_id},
            {"timestamp", e.timestamp},
            {"clicked", e.clicked}};
  return j.dump();
}

std::string to_json_line(const AttributeChangeEvent& e) {
  json j = {{"item_id", e.item_id}, {"timestamp", e.timestamp}, {"new_value", e.new_value}};
  return j.dump();
}

std::string to_json_line(const UserProfile& p) {
  json j = {{"user_id", p.user_id}, {"segment", p.segment}};
  return j.dump();
}

std::string to_json_line(const ItemProfile& p) {
  json j = {{"item_id", p.item_id}, {"category", p.category}, {"base_price", p.base_price}};
  return j.dump();
}

std::vector<InteractionEvent> read_interactions(const std::filesystem::path& path) {
  return jsonl::read_records<InteractionEvent>(path, parse_interaction);
}

std::vector<AttributeChangeEvent> read_changes(const std::filesystem::path& path) {
  return jsonl::read_records<AttributeChangeEvent>(path, parse_change);
}

std::vector<UserProfile> read_users(const std::filesystem::path& path) {
  return jsonl::read_records<UserProfile>(path, parse_user);
}

std::vector<ItemProfile> read_items(const std::filesystem::path& path) {
  return jsonl::read_records<ItemProfile>(path, parse_item);
}

void write_events(const std::filesystem::path& path,
                  const std::vector<InteractionEvent>& events) {
  write_lines(path, events);
}
void write_events(const std::filesystem::path& path,
                  const std::vector<AttributeChangeEvent>& events) {
  write_lines(path, events);
}
void write_events(const std::filesystem::path& path,
                  const std::vector<UserProfile>& users) {
  write_lines(path, users);
}
void write_events(const std::filesystem::path& path,
                  const std::vector<ItemProfile>& items) {
  write_lines(path, items);
}

void validate_interactions(const std::vector<InteractionEvent>& events) {
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].user_id < 1 || events[i].item_id < 1) {
      throw DataError("interaction " + std::to_string(i) + ": ids must be >= 1");
    }
  }
}

void validate_changes(const std::vector<AttributeChangeEvent>& changes) {
  std::map<int, const AttributeChangeEvent*> last;
  for (const auto& c : changes) {
    if (c.item_id < 1) throw DataError("change with item_id < 1");
    if (!(c.new_value > 0.0) || !std::isfinite(c.new_value)) {
      throw DataError("item " + std::to_string(c.item_id) + ": non-positive price");
    }
    auto [it, fresh] = last.emplace(c.item_id, &c);
    if (fresh) continue;
    const AttributeChangeEvent& prev = *it->second;
    if (c.timestamp <= prev.timestamp) {
      throw DataError("item " + std::to_string(c.item_id) +
                      ": change timestamps not strictly increasing at " +
                      std::to_string(c.timestamp));
    }
    if (c.new_value == prev.new_value) {
      throw DataError("item " + std::to_string(c.item_id) +
                      ": consecutive changes with equal value at " +
                      std::to_string(c.timestamp));
    }
    it->second = &c;
  }
}

}  // namespace caen
