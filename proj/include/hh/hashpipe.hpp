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
#include <cstdint>
#include <utility>
#include <vector>

#include "hh/algorithm.hpp"
#include "hh/core.hpp"
#include "hh/way_table.hpp"

namespace hh {

/// HashPipe: always insert at stage 1, then carry the evicted entry down the
/// pipeline, keeping the larger counter at each stage. Whatever is still
/// carried after stage d is dropped. A flow may end up in several stages;
/// queries sum its copies.
class HashPipe {
 public:
  HashPipe(std::size_t stages, std::size_t entries_per_stage,
           std::uint64_t seed)
      : hashes_(stages, entries_per_stage, SeedSequence(seed).next()),
        table_(stages, entries_per_stage, 0) {}

  ArrivalOutcome process(const Packet& p) {
    ArrivalOutcome out;
    run_pipeline(p.flow, out.matched);
    out.estimate = estimate(p.flow);
    return out;
  }

  /// Sum over every stage holding the flow.
  Count estimate(FlowId flow) const {
    Count sum = 0;
    for (std::size_t w = 0; w < table_.ways(); ++w) {
      const std::size_t s = hashes_.slot_unchecked(w, flow);
      if (table_.key(w, s) == flow) sum += table_.val(w, s);
    }
    return sum;
  }

  std::vector<FlowCount> top(std::size_t k) const {
    std::vector<FlowCount> raw;
    table_.for_each_occupied([&](std::size_t, std::size_t, FlowId f, Count v) {
      raw.push_back({f, v});
    });
    return rank_top(merge_duplicates(raw, [](Count a, Count b) { return a + b; }),
                    k);
  }

  std::size_t memory_counters() const noexcept { return table_.capacity(); }

  const WayTable& table() const noexcept { return table_; }
  /// Direct register access, for constructing specific states in tests.
  WayTable& mutable_table() noexcept { return table_; }
  const HashFamily& hashes() const noexcept { return hashes_; }

 private:
  void run_pipeline(FlowId flow, bool& matched_first) {
    const std::size_t s1 = hashes_.slot_unchecked(0, flow);
    if (table_.key(0, s1) == flow) {
      ++table_.val(0, s1);
      matched_first = true;
      return;
    }
    if (table_.empty_slot(0, s1)) {
      table_.write(0, s1, flow, 1);
      return;
    }
    FlowId carry_key = table_.key(0, s1);
    Count carry_val = table_.val(0, s1);
    table_.write(0, s1, flow, 1);

    for (std::size_t w = 1; w < table_.ways(); ++w) {
      const std::size_t s = hashes_.slot_unchecked(w, carry_key);
      if (table_.key(w, s) == carry_key) {
        table_.val(w, s) += carry_val;
        return;
      }
      if (table_.empty_slot(w, s)) {
        table_.write(w, s, carry_key, carry_val);
        return;
      }
      if (table_.val(w, s) < carry_val) {
        std::swap(carry_key, table_.key(w, s));
        std::swap(carry_val, table_.val(w, s));
      }
    }
  }

  HashFamily hashes_;
  WayTable table_;
};

}  // namespace hh
