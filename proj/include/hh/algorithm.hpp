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

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hh/core.hpp"

namespace hh {

/// What one algorithm reports about a single arrival.
struct ArrivalOutcome {
  bool matched = false;
  /// OnArrival estimate of the packet's flow, taken after the update.
  Count estimate = 0;
  bool recirculated = false;
  std::optional<Count> carry_min;
};

struct FlowCount {
  FlowId flow = 0;
  Count count = 0;

  friend bool operator==(const FlowCount&, const FlowCount&) = default;
};

// clang-format off
template <typename A>
concept HeavyHitterAlgorithm = requires(A& a, const A& ca, Packet p, FlowId f,
                                        std::size_t k) {
  { a.process(p) } -> std::same_as<ArrivalOutcome>;
  { ca.estimate(f) } -> std::convertible_to<Count>;
  { ca.top(k) } -> std::same_as<std::vector<FlowCount>>;
  { ca.memory_counters() } -> std::convertible_to<std::size_t>;
};
// clang-format on

inline void require_positive_k(std::size_t k) {
  if (k == 0) throw UsageError("top(k): k must be >= 1");
}

/// Sorts by count descending, then FlowId ascending, and keeps the first k.
inline std::vector<FlowCount> rank_top(std::vector<FlowCount> entries,
                                       std::size_t k) {
  require_positive_k(k);
  auto better = [](const FlowCount& a, const FlowCount& b) {
    return a.count != b.count ? a.count > b.count : a.flow < b.flow;
  };
  if (entries.size() > k) {
    std::partial_sort(entries.begin(), entries.begin() + k, entries.end(),
                      better);
    entries.resize(k);
  } else {
    std::sort(entries.begin(), entries.end(), better);
  }
  return entries;
}

/// Collapses repeated flows. `merge` combines two counts of the same flow.
template <typename Merge>
std::vector<FlowCount> merge_duplicates(const std::vector<FlowCount>& raw,
                                        Merge merge) {
  std::unordered_map<FlowId, Count> merged;
  merged.reserve(raw.size());
  for (const auto& e : raw) {
    auto [it, inserted] = merged.try_emplace(e.flow, e.count);
    if (!inserted) it->second = merge(it->second, e.count);
  }
  std::vector<FlowCount> out;
  out.reserve(merged.size());
  for (const auto& [flow, count] : merged) out.push_back({flow, count});
  return out;
}

/// Runtime-polymorphic handle over any HeavyHitterAlgorithm, used where the
/// algorithm is chosen from configuration.
class AnyAlgorithm {
 public:
  virtual ~AnyAlgorithm() = default;
  virtual ArrivalOutcome process(const Packet& p) = 0;
  virtual Count estimate(FlowId flow) const = 0;
  virtual std::vector<FlowCount> top(std::size_t k) const = 0;
  virtual std::size_t memory_counters() const = 0;
};

template <HeavyHitterAlgorithm A>
class AlgorithmModel final : public AnyAlgorithm {
 public:
  explicit AlgorithmModel(A impl) : impl_(std::move(impl)) {}

  ArrivalOutcome process(const Packet& p) override { return impl_.process(p); }
  Count estimate(FlowId flow) const override { return impl_.estimate(flow); }
  std::vector<FlowCount> top(std::size_t k) const override {
    return impl_.top(k);
  }
  std::size_t memory_counters() const override {
    return impl_.memory_counters();
  }

  A& get() noexcept { return impl_; }
  const A& get() const noexcept { return impl_; }

 private:
  A impl_;
};

template <HeavyHitterAlgorithm A>
std::unique_ptr<AnyAlgorithm> make_any(A impl) {
  return std::make_unique<AlgorithmModel<A>>(std::move(impl));
}

}  // namespace hh
