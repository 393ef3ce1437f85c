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
#include <vector>

#include "hh/core.hpp"

namespace hh {

/// d register-array pairs (key_i, val_i), each entries_per_way wide. Unclaimed
/// slots hold kEmptyFlow and the table's initial counter value.
class WayTable {
 public:
  WayTable(std::size_t ways, std::size_t entries_per_way, Count initial = 0)
      : ways_(ways),
        width_(entries_per_way),
        initial_(initial),
        keys_(ways * entries_per_way, kEmptyFlow),
        vals_(ways * entries_per_way, initial) {
    if (ways == 0) throw UsageError("way table: d must be >= 1");
    if (entries_per_way == 0) {
      throw UsageError("way table: entries_per_way must be >= 1");
    }
  }

  std::size_t ways() const noexcept { return ways_; }
  std::size_t entries_per_way() const noexcept { return width_; }
  std::size_t capacity() const noexcept { return keys_.size(); }
  Count initial_value() const noexcept { return initial_; }

  FlowId& key(std::size_t way, std::size_t slot) noexcept {
    return keys_[way * width_ + slot];
  }
  FlowId key(std::size_t way, std::size_t slot) const noexcept {
    return keys_[way * width_ + slot];
  }
  Count& val(std::size_t way, std::size_t slot) noexcept {
    return vals_[way * width_ + slot];
  }
  Count val(std::size_t way, std::size_t slot) const noexcept {
    return vals_[way * width_ + slot];
  }

  bool empty_slot(std::size_t way, std::size_t slot) const noexcept {
    return key(way, slot) == kEmptyFlow;
  }

  void write(std::size_t way, std::size_t slot, FlowId k, Count v) noexcept {
    key(way, slot) = k;
    val(way, slot) = v;
  }

  std::size_t occupied() const noexcept {
    std::size_t n = 0;
    for (FlowId k : keys_) n += (k != kEmptyFlow);
    return n;
  }

  /// Visits every claimed slot as (way, slot, key, value).
  template <typename Fn>
  void for_each_occupied(Fn&& fn) const {
    for (std::size_t w = 0; w < ways_; ++w) {
      for (std::size_t s = 0; s < width_; ++s) {
        const FlowId k = key(w, s);
        if (k != kEmptyFlow) fn(w, s, k, val(w, s));
      }
    }
  }

 private:
  std::size_t ways_;
  std::size_t width_;
  Count initial_;
  std::vector<FlowId> keys_;
  std::vector<Count> vals_;
};

}  // namespace hh
