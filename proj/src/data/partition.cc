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

#include "caen/data/partition.h"

#include <cmath>
#include <string>

namespace caen {

PartitionResult partition_states(std::span<const InteractionEvent> interactions,
                                 std::span<const AttributeChangeEvent> changes,
                                 TimeWindow window, double initial_value) {
  if (window.end <= window.start) {
    throw DataError("partition_states: empty window");
  }
  PartitionResult result;
  const int item_id = !changes.empty()        ? changes.front().item_id
                      : !interactions.empty() ? interactions.front().item_id
                                              : 0;
  std::size_t c = 0;
  const AttributeChangeEvent* in_force = nullptr;
  for (; c < changes.size() && changes[c].timestamp <= window.start; ++c) {
    if (c > 0 && changes[c].timestamp <= changes[c - 1].timestamp) {
      throw DataError("partition_states: changes not time-sorted");
    }
    in_force = &changes[c];
  }
  auto open = [&](Timestamp start, double value) {
    if (!result.states.empty()) result.states.back().end = start;
    AttributeState s;
    s.item_id = item_id;
    s.value = value;
    s.start = start;
    s.end = window.end;
    result.states.push_back(std::move(s));
  };
  if (in_force) {
    open(window.start, in_force->new_value);
  } else if (!std::isnan(initial_value)) {
    open(window.start, initial_value);
  }
  for (; c < changes.size() && changes[c].timestamp < window.end; ++c) {
    if (c > 0 && changes[c].timestamp <= changes[c - 1].timestamp) {
      throw DataError("partition_states: changes not time-sorted");
    }
    open(changes[c].timestamp, changes[c].new_value);
  }

  // Interactions and state starts are both sorted, so one sweep assigns each
  // interaction to the last state starting at or before it.
  std::size_t s = 0;
  for (std::size_t i = 0; i < interactions.size(); ++i) {
    const auto& e = interactions[i];
    if (i > 0 && e.timestamp < interactions[i - 1].timestamp) {
      throw DataError("partition_states: interactions not time-sorted at " +
                      std::to_string(e.timestamp));
    }
    if (!window.contains(e.timestamp) || result.states.empty() ||
        e.timestamp < result.states.front().start) {
      ++result.dropped;
      continue;
    }
    while (s + 1 < result.states.size() && result.states[s + 1].start <= e.timestamp) ++s;
    result.states[s].user_ids.push_back(e.user_id);
    result.states[s].interaction_times.push_back(e.timestamp);
  }
  return result;
}

}  // namespace caen
