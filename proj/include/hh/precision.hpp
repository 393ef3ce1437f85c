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

#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hh/algorithm.hpp"
#include "hh/core.hpp"
#include "hh/way_table.hpp"

namespace hh {

/// How the recirculation probability 1/(carry_min+1) is realised.
enum class ProbMode {
  /// Arbitrary-range integer draw; probability is exact.
  Exact,
  /// Rounded to 2^-x using x random bits; counter jumps to 2^x.
  PowerOfTwo,
  /// carry_min+1 = 2^y * T, T in [8,16); probability 2^-y / floor(T) from y
  /// bits plus an N-bit draw compared against a lookup threshold.
  NineEighths,
};

inline std::string_view to_string(ProbMode m) {
  switch (m) {
    case ProbMode::Exact:
      return "exact";
    case ProbMode::PowerOfTwo:
      return "pow2";
    case ProbMode::NineEighths:
      return "nine-eighths";
  }
  return "?";
}

inline ProbMode parse_prob_mode(std::string_view s) {
  if (s == "exact") return ProbMode::Exact;
  if (s == "pow2" || s == "2approx" || s == "power-of-two") {
    return ProbMode::PowerOfTwo;
  }
  if (s == "nine-eighths" || s == "9/8" || s == "98approx") {
    return ProbMode::NineEighths;
  }
  throw UsageError("unknown probability mode '" + std::string(s) +
                   "' (valid: exact, pow2, nine-eighths)");
}

/// num / (den * 2^pow2). Kept exact so approximation ratios can be checked
/// without rounding.
struct Probability {
  std::uint64_t num = 1;
  std::uint64_t den = 1;
  unsigned pow2 = 0;

  double value() const {
    return std::ldexp(static_cast<double>(num) / static_cast<double>(den),
                      -static_cast<int>(pow2));
  }

  /// Sign of (value() * scale) - rhs_num / rhs_den. Exact whenever the
  /// cross products fit in 127 bits, which covers every carry_min a real
  /// table reaches.
  int compare_scaled(std::uint64_t scale, std::uint64_t rhs_num = 1,
                     std::uint64_t rhs_den = 1) const {
    using u128 = unsigned __int128;
    const auto width = [](std::uint64_t v) {
      return static_cast<unsigned>(std::bit_width(v));
    };
    if (width(num) + width(scale) + width(rhs_den) < 127 &&
        width(den) + width(rhs_num) + pow2 < 127) {
      const u128 lhs = static_cast<u128>(num) * scale * rhs_den;
      const u128 rhs = (static_cast<u128>(den) * rhs_num) << pow2;
      return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
    }
    const long double lhs = static_cast<long double>(value()) * scale;
    const long double rhs = static_cast<long double>(rhs_num) / rhs_den;
    return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
  }
};

/// Outcome of deciding how a given carry_min would be recirculated.
struct RecircDecision {
  ProbMode mode = ProbMode::Exact;
  Count carry_min = 0;
  /// Probability actually realised by the random draw.
  Probability probability;
  /// NineEighths only: 2^-y / floor(T) before N-bit threshold rounding.
  Probability unquantized;
  /// Value written to the evicted slot on recirculation.
  Count new_value = 1;
  /// Hardware random bits the draw needs (0 for Exact, which models an
  /// arbitrary-range generator).
  unsigned bits_consumed = 0;
  /// Number of random bits that must all be zero.
  unsigned zero_bits = 0;
  /// NineEighths: accept when an N-bit draw is below this value.
  std::uint64_t threshold = 0;
  unsigned threshold_bits = 0;
};

inline constexpr unsigned kDefaultLookupBits = 16;

/// floor(2^N / t) for t in [1, 16). Indexed by t.
class NineEighthsLookup {
 public:
  explicit NineEighthsLookup(unsigned bits = kDefaultLookupBits) : bits_(bits) {
    if (bits < 4 || bits > 63) {
      throw UsageError("lookup_bits must be in [4, 63], got " +
                       std::to_string(bits));
    }
    for (std::uint64_t t = 1; t < table_.size(); ++t) {
      table_[t] = (std::uint64_t{1} << bits) / t;
    }
  }

  unsigned bits() const noexcept { return bits_; }
  std::uint64_t threshold(std::uint64_t t) const { return table_.at(t); }

 private:
  unsigned bits_;
  std::array<std::uint64_t, 16> table_{};
};

inline RecircDecision recirc_decision(Count carry_min, ProbMode mode,
                                      const NineEighthsLookup& lookup) {
  RecircDecision d;
  d.mode = mode;
  d.carry_min = carry_min;
  if (carry_min == std::numeric_limits<Count>::max()) {
    throw UsageError("recirc_decision: carry_min overflows");
  }
  const Count m = carry_min + 1;
  switch (mode) {
    case ProbMode::Exact:
      d.probability = {1, m, 0};
      d.unquantized = d.probability;
      d.new_value = m;
      break;
    case ProbMode::PowerOfTwo: {
      // x = ceil(log2(carry_min)), and x = 0 for carry_min in {0, 1}.
      const unsigned x =
          carry_min < 2 ? 0u : static_cast<unsigned>(std::bit_width(carry_min - 1));
      if (x >= 64) throw UsageError("recirc_decision: carry_min too large");
      d.probability = {1, 1, x};
      d.unquantized = d.probability;
      d.new_value = Count{1} << x;
      d.zero_bits = x;
      d.bits_consumed = x;
      break;
    }
    case ProbMode::NineEighths: {
      d.new_value = m;
      if (m == 1) break;
      const int msb = static_cast<int>(std::bit_width(m)) - 1;
      const int y = msb - 3;
      if (y >= 0) {
        const std::uint64_t t_floor = m >> y;  // in [8, 16)
        d.zero_bits = static_cast<unsigned>(y);
        d.threshold = lookup.threshold(t_floor);
        d.unquantized = {1, t_floor, static_cast<unsigned>(y)};
      } else {
        // m < 8: T = m * 2^-y is integral, so the product is exactly 1/m.
        d.threshold = lookup.threshold(m);
        d.unquantized = {1, m, 0};
      }
      d.threshold_bits = lookup.bits();
      d.probability = {d.threshold, 1, d.zero_bits + lookup.bits()};
      d.bits_consumed = d.zero_bits + lookup.bits();
      break;
    }
  }
  return d;
}

inline RecircDecision recirc_decision(Count carry_min, ProbMode mode,
                                      unsigned lookup_bits = kDefaultLookupBits) {
  return recirc_decision(carry_min, mode, NineEighthsLookup(lookup_bits));
}

/// Flips the coin described by `d`.
inline bool draw_recirculation(const RecircDecision& d, RandomSource& rng) {
  switch (d.mode) {
    case ProbMode::Exact:
      return d.carry_min == 0 || rng.below(d.carry_min + 1) == 0;
    case ProbMode::PowerOfTwo:
      return d.zero_bits == 0 || rng.bits(d.zero_bits) == 0;
    case ProbMode::NineEighths:
      if (d.threshold_bits == 0) return true;
      if (d.zero_bits > 0 && rng.bits(d.zero_bits) != 0) return false;
      return rng.bits(d.threshold_bits) < d.threshold;
  }
  return false;
}

/// Hardware stages for d ways: three per way serially, d + 2 when the A/B/C
/// actions of neighbouring ways share stages.
inline std::size_t stage_count(std::size_t d, bool stacked) {
  if (d == 0) throw UsageError("stage_count: d must be >= 1");
  return stacked ? d + 2 : 3 * d;
}

struct PrecisionConfig {
  std::size_t ways = 2;
  std::size_t entries_per_way = 1;
  Count initial_value = 0;
  ProbMode prob_mode = ProbMode::PowerOfTwo;
  /// Packets processed between a recirculation decision and its write.
  std::uint64_t delay = 0;
  std::uint64_t seed = 0;
  unsigned lookup_bits = kDefaultLookupBits;
};

/// A write carried by a recirculated packet; lands unconditionally.
struct PendingWrite {
  std::uint64_t apply_at_seq = 0;
  std::size_t way = 0;
  std::size_t slot = 0;
  FlowId key = kEmptyFlow;
  Count value = 0;
};

struct PipelineStats {
  std::uint64_t packets = 0;
  std::uint64_t matched = 0;
  std::uint64_t recirculations = 0;
};

/// Recirculate with the configured approximation of 1/(carry_min+1).
class ProbabilisticAdmission {
 public:
  ProbabilisticAdmission(ProbMode mode, unsigned lookup_bits)
      : mode_(mode), lookup_(lookup_bits) {}

  RecircDecision decide(Count carry_min) const {
    return recirc_decision(carry_min, mode_, lookup_);
  }
  bool draw(const RecircDecision& d, RandomSource& rng) const {
    return draw_recirculation(d, rng);
  }
  ProbMode mode() const noexcept { return mode_; }

 private:
  ProbMode mode_;
  NineEighthsLookup lookup_;
};

/// Recirculate every unmatched packet (HashParallel).
class AlwaysAdmit {
 public:
  RecircDecision decide(Count carry_min) const {
    RecircDecision d;
    d.carry_min = carry_min;
    d.new_value = carry_min + 1;
    return d;
  }
  bool draw(const RecircDecision&, RandomSource&) const { return true; }
};

/// d-way register pipeline where an unmatched packet may recirculate to
/// claim the minimum sampled slot. The claim is a PendingWrite that lands
/// after `delay` further packets, overwriting whatever the slot holds then.
template <typename Admission>
class BasicPrecision {
 public:
  BasicPrecision(const PrecisionConfig& cfg, Admission admission)
      : cfg_(cfg),
        hashes_(cfg.ways, cfg.entries_per_way, SeedSequence(cfg.seed).next()),
        table_(cfg.ways, cfg.entries_per_way, cfg.initial_value),
        rng_(SeedSequence(cfg.seed ^ 0x50524543ULL).next()),
        admission_(std::move(admission)) {}

  ArrivalOutcome process(const Packet& p) {
    if (p.seq > 0) apply_pending(p.seq - 1);
    ++stats_.packets;
    last_decision_.reset();

    ArrivalOutcome out;
    bool matched = false;
    Count carry_min = std::numeric_limits<Count>::max();
    std::size_t min_way = 0;
    std::size_t min_slot = 0;
    for (std::size_t w = 0; w < table_.ways(); ++w) {
      const std::size_t s = hashes_.slot_unchecked(w, p.flow);
      if (table_.key(w, s) == p.flow) {
        ++table_.val(w, s);
        matched = true;
      } else if (table_.val(w, s) < carry_min) {
        carry_min = table_.val(w, s);
        min_way = w;
        min_slot = s;
      }
    }

    out.matched = matched;
    if (matched) {
      ++stats_.matched;
    } else {
      out.carry_min = carry_min;
      const RecircDecision d = admission_.decide(carry_min);
      last_decision_ = d;
      if (admission_.draw(d, rng_)) {
        pending_.push_back(
            {p.seq + cfg_.delay, min_way, min_slot, p.flow, d.new_value});
        out.recirculated = true;
        ++stats_.recirculations;
      }
    }
    apply_pending(p.seq);
    out.estimate = estimate(p.flow);
    return out;
  }

  /// Lands every pending write due at or before `up_to_seq`.
  std::size_t apply_pending(std::uint64_t up_to_seq) {
    std::size_t applied = 0;
    while (!pending_.empty() && pending_.front().apply_at_seq <= up_to_seq) {
      const PendingWrite& w = pending_.front();
      table_.write(w.way, w.slot, w.key, w.value);
      pending_.pop_front();
      ++applied;
    }
    return applied;
  }

  /// Largest matching counter, else the minimum of the d sampled counters.
  Count estimate(FlowId flow) const {
    bool found = false;
    Count best = 0;
    Count lowest = std::numeric_limits<Count>::max();
    for (std::size_t w = 0; w < table_.ways(); ++w) {
      const std::size_t s = hashes_.slot_unchecked(w, flow);
      const Count v = table_.val(w, s);
      if (table_.key(w, s) == flow) {
        found = true;
        if (v > best) best = v;
      }
      if (v < lowest) lowest = v;
    }
    return found ? best : lowest;
  }

  std::vector<FlowCount> top(std::size_t k) const {
    std::vector<FlowCount> raw;
    table_.for_each_occupied([&](std::size_t, std::size_t, FlowId f, Count v) {
      raw.push_back({f, v});
    });
    return rank_top(
        merge_duplicates(raw, [](Count a, Count b) { return a > b ? a : b; }),
        k);
  }

  std::size_t memory_counters() const noexcept { return table_.capacity(); }

  const PrecisionConfig& config() const noexcept { return cfg_; }
  const PipelineStats& stats() const noexcept { return stats_; }
  const WayTable& table() const noexcept { return table_; }
  WayTable& mutable_table() noexcept { return table_; }
  const HashFamily& hashes() const noexcept { return hashes_; }
  const std::deque<PendingWrite>& pending() const noexcept { return pending_; }
  /// Decision taken for the most recent packet, if it was unmatched.
  const std::optional<RecircDecision>& last_decision() const noexcept {
    return last_decision_;
  }

 private:
  PrecisionConfig cfg_;
  HashFamily hashes_;
  WayTable table_;
  RandomSource rng_;
  Admission admission_;
  std::deque<PendingWrite> pending_;
  PipelineStats stats_;
  std::optional<RecircDecision> last_decision_;
};

class Precision : public BasicPrecision<ProbabilisticAdmission> {
 public:
  explicit Precision(const PrecisionConfig& cfg)
      : BasicPrecision(cfg, ProbabilisticAdmission(cfg.prob_mode,
                                                   cfg.lookup_bits)) {}
};

}  // namespace hh
