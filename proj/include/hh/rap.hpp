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
#include <vector>

#include "hh/algorithm.hpp"
#include "hh/core.hpp"
#include "hh/space_saving.hpp"
#include "hh/way_table.hpp"

namespace hh {

/// Admission rule shared by both RAP layouts: take over a slot holding c with
/// probability 1/(c+1). `forced` makes admission certain, which turns the
/// fully associative variant into Space-Saving.
inline bool rap_admit(Count c, bool forced, RandomSource& rng) {
  if (forced || c == 0) return true;
  return rng.below(c + 1) == 0;
}

/// Fully associative RAP: the candidate victim is the global minimum.
class RapFull {
 public:
  RapFull(std::size_t capacity, std::uint64_t seed, bool forced = false)
      : table_(capacity), rng_(seed), forced_(forced) {}

  ArrivalOutcome process(const Packet& p) {
    ArrivalOutcome out;
    if (table_.find(p.flow) != nullptr) {
      out.matched = true;
      out.estimate = table_.increment(p.flow);
      return out;
    }
    if (!table_.full()) {
      out.carry_min = 0;
      table_.insert(p.flow, 1);
      out.estimate = 1;
      return out;
    }
    const Count c = table_.min_entry().count;
    out.carry_min = c;
    if (rap_admit(c, forced_, rng_)) {
      table_.replace_min(p.flow, c + 1);
      out.estimate = c + 1;
    } else {
      out.estimate = c;
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
  std::vector<FlowCount> entries() const { return table_.entries(); }

 private:
  detail::OrderedFlowTable table_;
  RandomSource rng_;
  bool forced_;
};

/// RAP with d-way limited associativity: the candidate victim is the minimum
/// of the slots h_1(flow)..h_d(flow), lowest way on ties. Updates are
/// immediate (no recirculation delay).
class RapWays {
 public:
  RapWays(std::size_t ways, std::size_t entries_per_way, std::uint64_t seed)
      : hashes_(ways, entries_per_way, SeedSequence(seed).next()),
        table_(ways, entries_per_way, 0),
        rng_(SeedSequence(seed ^ 0x5241505241505241ULL).next()) {}

  ArrivalOutcome process(const Packet& p) {
    ArrivalOutcome out;
    const std::size_t d = table_.ways();
    std::size_t min_way = 0;
    std::size_t min_slot = 0;
    Count carry = 0;
    bool have_min = false;
    for (std::size_t w = 0; w < d; ++w) {
      const std::size_t s = hashes_.slot_unchecked(w, p.flow);
      if (table_.key(w, s) == p.flow) {
        out.matched = true;
        out.estimate = ++table_.val(w, s);
        return out;
      }
      const Count v = table_.val(w, s);
      if (!have_min || v < carry) {
        carry = v;
        min_way = w;
        min_slot = s;
        have_min = true;
      }
    }
    out.carry_min = carry;
    if (rap_admit(carry, false, rng_)) {
      table_.write(min_way, min_slot, p.flow, carry + 1);
      out.estimate = carry + 1;
    } else {
      out.estimate = carry;
    }
    return out;
  }

  Count estimate(FlowId flow) const {
    Count lowest = 0;
    for (std::size_t w = 0; w < table_.ways(); ++w) {
      const std::size_t s = hashes_.slot_unchecked(w, flow);
      if (table_.key(w, s) == flow) return table_.val(w, s);
      const Count v = table_.val(w, s);
      if (w == 0 || v < lowest) lowest = v;
    }
    return lowest;
  }

  std::vector<FlowCount> top(std::size_t k) const {
    std::vector<FlowCount> all;
    table_.for_each_occupied([&](std::size_t, std::size_t, FlowId f, Count v) {
      all.push_back({f, v});
    });
    return rank_top(std::move(all), k);
  }

  std::size_t memory_counters() const noexcept { return table_.capacity(); }
  const WayTable& table() const noexcept { return table_; }

 private:
  HashFamily hashes_;
  WayTable table_;
  RandomSource rng_;
};

}  // namespace hh
