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

#include "hh/precision.hpp"

namespace hh {

/// HashParallel: every unmatched packet recirculates and replaces the minimum
/// of its d sampled entries with (flow, min + 1). Shares the delayed-write
/// pipeline with PRECISION.
class HashParallel : public BasicPrecision<AlwaysAdmit> {
 public:
  HashParallel(std::size_t ways, std::size_t entries_per_way,
               std::uint64_t delay, std::uint64_t seed)
      : BasicPrecision(make_config(ways, entries_per_way, delay, seed),
                       AlwaysAdmit{}) {}

 private:
  static PrecisionConfig make_config(std::size_t ways,
                                     std::size_t entries_per_way,
                                     std::uint64_t delay, std::uint64_t seed) {
    PrecisionConfig cfg;
    cfg.ways = ways;
    cfg.entries_per_way = entries_per_way;
    cfg.delay = delay;
    cfg.seed = seed;
    return cfg;
  }
};

}  // namespace hh
