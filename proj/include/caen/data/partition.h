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

// Splits an item's history into constant-price states.

#ifndef CAEN_DATA_PARTITION_H_
#define CAEN_DATA_PARTITION_H_

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "caen/data/events.h"

namespace caen {

// Half-open interval [start, end).
struct TimeWindow {
  Timestamp start = 0;
  Timestamp end = 0;

  bool contains(Timestamp t) const { return t >= start && t < end; }
};

struct AttributeState {
  int item_id = 0;
  double value = 0.0;
  Timestamp start = 0;
  Timestamp end = 0;
  std::vector<int> user_ids;              // in time order
  std::vector<Timestamp> interaction_times;

  bool empty() const { return user_ids.empty(); }
};

struct PartitionResult {
  std::vector<AttributeState> states;
  // Interactions outside the window, or inside it but before the item's
  // first known price.
  std::size_t dropped = 0;
};

// A state opens at the window start with the price in force then (the
// latest change at or before it, else `initial_value` when that is not
// NaN) and at every change strictly inside the window, so a revisited price
// opens a new state. When no price is known at the start, states begin at
// the first change. Inputs must be time-sorted and belong to one item.
PartitionResult partition_states(
    std::span<const InteractionEvent> interactions,
    std::span<const AttributeChangeEvent> changes, TimeWindow window,
    double initial_value = std::numeric_limits<double>::quiet_NaN());

}  // namespace caen

#endif  // CAEN_DATA_PARTITION_H_
