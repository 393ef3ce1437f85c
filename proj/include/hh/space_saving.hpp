// Copyright 2026 The precision-hh Authors
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

#pragma once

#include <cstddef>
#include <set>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hh/algorithm.hpp"
#include "hh/core.hpp"

namespace hh {

namespace detail {

/// Fully associative flow table with O(log C) access to the minimum entry.
/// Minimum ties resolve to the smaller FlowId.
class OrderedFlowTable {
 public:
  explicit OrderedFlowTable(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw UsageError("flow table: capacity must be >= 1");
    counters_.reserve(capacity);
  }

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return counters_.size(); }
  bool full() const noexcept { return counters_.size() >= capacity_; }

  const Count* find(FlowId flow) const {
    auto it = counters_.find(flow);
    return it == counters_.end() ? nullptr : &it->second;
  }

  Count increment(FlowId flow) {
    auto it = counters_.find(flow);
    by_count_.erase({it->second, flow});
    ++it->second;
    by_count_.insert({it->second, flow});
    return it->second;
  }

  void insert(FlowId flow, Count value) {
    counters_.emplace(flow, value);
    by_count_.insert({value, flow});
  }

  /// Requires size() > 0.
  FlowCount min_entry() const {
    const auto& [count, flow] = *by_count_.begin();
    return {flow, count};
  }

  void replace_min(FlowId flow, Count value) {
    const auto victim = by_count_.begin()->second;
    by_count_.erase(by_count_.begin());
    counters_.erase(victim);
    insert(flow, value);
  }

  /// Counter reported for flows the table does not monitor.
  Count unmonitored_estimate() const {
    return full() ? min_entry().count : 0;
  }

  std::vector<FlowCount> entries() const {
    std::vector<FlowCount> out;
    out.reserve(counters_.size());
    for (const auto& [count, flow] : by_count_) out.push_back({flow, count});
    return out;
  }

  Count total() const {
    Count sum = 0;
    for (const auto& [flow, count] : counters_) sum += count;
    return sum;
  }

 private:
  std::size_t capacity_;
  std::unordered_map<FlowId, Count> counters_;
  std::set<std::pair<Count, FlowId>> by_count_;
};

}  // namespace detail

/// Space-Saving over a C-entry table: an unmonitored flow takes over the
/// minimum entry and inherits its counter plus one.
class SpaceSaving {
 public:
  explicit SpaceSaving(std::size_t capacity) : table_(capacity) {}

  ArrivalOutcome process(const Packet& p) {
    ArrivalOutcome out;
    if (table_.find(p.flow) != nullptr) {
      out.matched = true;
      out.estimate = table_.increment(p.flow);
    } else if (!table_.full()) {
      table_.insert(p.flow, 1);
      out.estimate = 1;
    } else {
      const Count floor = table_.min_entry().count;
      table_.replace_min(p.flow, floor + 1);
      out.estimate = floor + 1;
    }
    return out;
  }

  Count estimate(FlowId flow) const {
    if (const Count* c = table_.find(flow)) return *c;
    return table_.unmonitored_estimate();
  }

  std::vector<FlowCount> top(std::size_t k) const {
    return rank_top(table_.entries(), k);
  }

  std::size_t memory_counters() const noexcept { return table_.capacity(); }

  /// Sum of all counters; equals the number of packets processed.
  Count counter_sum() const { return table_.total(); }
  std::vector<FlowCount> entries() const { return table_.entries(); }

 private:
  detail::OrderedFlowTable table_;
};

}  // namespace hh
