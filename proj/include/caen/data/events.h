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

// Event and profile records plus their line-delimited JSON encoding.

#ifndef CAEN_DATA_EVENTS_H_
#define CAEN_DATA_EVENTS_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "caen/errors.h"

namespace caen {

using Timestamp = std::int64_t;  // epoch seconds

inline constexpr Timestamp kSecondsPerHour = 3600;
inline constexpr Timestamp kSecondsPerDay = 86400;

struct InteractionEvent {
  int user_id = 0;
  int item_id = 0;
  Timestamp timestamp = 0;
  bool clicked = false;

  bool operator==(const InteractionEvent&) const = default;
};

struct AttributeChangeEvent {
  int item_id = 0;
  Timestamp timestamp = 0;
  double new_value = 0.0;  // price, > 0

  bool operator==(const AttributeChangeEvent&) const = default;
};

struct UserProfile {
  int user_id = 0;
  int segment = 0;

  bool operator==(const UserProfile&) const = default;
};

struct ItemProfile {
  int item_id = 0;
  int category = 0;
  double base_price = 0.0;

  bool operator==(const ItemProfile&) const = default;
};

// Serialization uses sorted keys, so output is canonical.
std::string to_json_line(const InteractionEvent& e);
std::string to_json_line(const AttributeChangeEvent& e);
std::string to_json_line(const UserProfile& p);
std::string to_json_line(const ItemProfile& p);

std::vector<InteractionEvent> read_interactions(const std::filesystem::path& path);
std::vector<AttributeChangeEvent> read_changes(const std::filesystem::path& path);
std::vector<UserProfile> read_users(const std::filesystem::path& path);
std::vector<ItemProfile> read_items(const std::filesystem::path& path);

void write_events(const std::filesystem::path& path,
                  const std::vector<InteractionEvent>& events);
void write_events(const std::filesystem::path& path,
                  const std::vector<AttributeChangeEvent>& events);
void write_events(const std::filesystem::path& path,
                  const std::vector<UserProfile>& users);
void write_events(const std::filesystem::path& path,
                  const std::vector<ItemProfile>& items);

// Checks per-record invariants (ids >= 1, positive prices) and per-item
// ordering of changes: strictly increasing times, differing values.
void validate_interactions(const std::vector<InteractionEvent>& events);
void validate_changes(const std::vector<AttributeChangeEvent>& changes);

}  // namespace caen

#endif  // CAEN_DATA_EVENTS_H_
