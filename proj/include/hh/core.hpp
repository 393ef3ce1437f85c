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
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace hh {

/// Raised on precondition violations (bad arguments, bad configuration).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a trace or output file cannot be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Count = std::uint64_t;
using FlowId = std::uint64_t;

/// Marks an unclaimed table slot. Never produced by trace generation or
/// loading.
inline constexpr FlowId kEmptyFlow = std::numeric_limits<FlowId>::max();

struct Packet {
  FlowId flow = 0;
  std::uint64_t seq = 0;

  friend bool operator==(const Packet&, const Packet&) = default;
};

using Trace = std::vector<Packet>;

/// splitmix64 finalizer. Full avalanche on 64-bit inputs.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

/// Deterministic stream of seeds derived from one root seed.
class SeedSequence {
 public:
  explicit constexpr SeedSequence(std::uint64_t root) noexcept : state_(root) {}

  constexpr std::uint64_t next() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

 private:
  std::uint64_t state_;
};

/// Uniform random bits. Models the switch's hardware random source, plus an
/// arbitrary-range draw for the idealised (non-hardware) variants.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  /// n independent uniform bits, 1 <= n <= 64.
  std::uint64_t bits(unsigned n) {
    if (n == 0 || n > 64) {
      throw UsageError("random_bits: n must be in [1, 64], got " +
                       std::to_string(n));
    }
    const std::uint64_t word = engine_();
    return n == 64 ? word : word >> (64 - n);
  }

  /// Uniform integer in [0, bound). bound >= 1.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw UsageError("random below: bound must be >= 1");
    // Lemire's multiply-shift with rejection; unbiased.
    using u128 = unsigned __int128;
    u128 m = static_cast<u128>(engine_()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<u128>(engine_()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Uniform double in (0, 1].
  double unit_open_closed() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// d independent hash functions h_1..h_d, each mapping a flow onto one of
/// entries_per_way slots.
class HashFamily {
 public:
  HashFamily(std::size_t ways, std::size_t entries_per_way, std::uint64_t seed)
      : entries_per_way_(entries_per_way) {
    if (ways == 0) throw UsageError("hash family: way count must be >= 1");
    if (entries_per_way == 0) {
      throw UsageError("hash family: entries_per_way must be >= 1");
    }
    SeedSequence seq(seed);
    seeds_.reserve(ways);
    for (std::size_t i = 0; i < ways; ++i) seeds_.push_back(seq.next());
  }

  std::size_t ways() const noexcept { return seeds_.size(); }
  std::size_t entries_per_way() const noexcept { return entries_per_way_; }
  const std::vector<std::uint64_t>& seeds() const noexcept { return seeds_; }

  std::size_t slot(std::size_t way, FlowId key) const {
    if (way >= seeds_.size()) {
      throw UsageError("hash_way: way " + std::to_string(way) +
                       " out of range for d=" + std::to_string(seeds_.size()));
    }
    return slot_unchecked(way, key);
  }

  std::size_t slot_unchecked(std::size_t way, FlowId key) const noexcept {
    return static_cast<std::size_t>(mix64(key ^ seeds_[way]) %
                                    entries_per_way_);
  }

 private:
  std::size_t entries_per_way_;
  std::vector<std::uint64_t> seeds_;
};

}  // namespace hh
