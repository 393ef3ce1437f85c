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

#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "hh/precision.hpp"
#include "hh/traces.hpp"

namespace hh {
namespace {

constexpr FlowId A = 1, X = 2;

PrecisionConfig config(std::size_t ways, std::size_t width, ProbMode mode,
                       Count init = 0, std::uint64_t delay = 0,
                       std::uint64_t seed = 1) {
  PrecisionConfig c;
  c.ways = ways;
  c.entries_per_way = width;
  c.prob_mode = mode;
  c.initial_value = init;
  c.delay = delay;
  c.seed = seed;
  return c;
}

// --- recirc_decision --------------------------------------------------------

TEST(RecircDecisionTest, PowerOfTwoRoundsUpTheCounter) {
  const auto d = recirc_decision(5, ProbMode::PowerOfTwo);
  EXPECT_EQ(d.new_value, 8u);
  EXPECT_EQ(d.probability.compare_scaled(8), 0);  // exactly 1/8
  EXPECT_EQ(d.bits_consumed, 3u);
}

TEST(RecircDecisionTest, PowerOfTwoUsesCeilLog2AtExactPowers) {
  // ceil(log2 4) = 2: probability 1/4, counter set to 4.
  const auto d = recirc_decision(4, ProbMode::PowerOfTwo);
  EXPECT_EQ(d.new_value, 4u);
  EXPECT_EQ(d.probability.compare_scaled(4), 0);
  const auto one = recirc_decision(1, ProbMode::PowerOfTwo);
  EXPECT_EQ(one.new_value, 1u);
  EXPECT_EQ(one.probability.compare_scaled(1), 0);
}

TEST(RecircDecisionTest, NineEighthsBelowEightIsExact) {
  // 5 = 2^-1 * 10: probability 2 * (1/10) = 1/5.
  const auto d = recirc_decision(4, ProbMode::NineEighths);
  EXPECT_EQ(d.new_value, 5u);
  EXPECT_EQ(d.unquantized.compare_scaled(5), 0);
  EXPECT_EQ(d.threshold, 65536u / 5u);
  EXPECT_EQ(d.bits_consumed, 16u);
}

TEST(RecircDecisionTest, NineEighthsAtOneHundred) {
  // 101 = 2^3 * 12.625 -> floor(T) = 12 -> 1/96.
  const auto d = recirc_decision(100, ProbMode::NineEighths);
  EXPECT_EQ(d.new_value, 101u);
  EXPECT_EQ(d.zero_bits, 3u);
  EXPECT_EQ(d.unquantized.compare_scaled(96), 0);
  // ratio to 1/101 is 101/96, inside [1, 9/8)
  EXPECT_EQ(d.unquantized.compare_scaled(101, 101, 96), 0);
  EXPECT_LT(d.unquantized.compare_scaled(101, 9, 8), 0);
  EXPECT_EQ(d.threshold, 65536u / 12u);
  EXPECT_EQ(d.bits_consumed, 19u);
}

TEST(RecircDecisionTest, ZeroCarryIsCertainInEveryMode) {
  for (ProbMode m :
       {ProbMode::Exact, ProbMode::PowerOfTwo, ProbMode::NineEighths}) {
    const auto d = recirc_decision(0, m);
    EXPECT_EQ(d.new_value, 1u);
    EXPECT_EQ(d.probability.compare_scaled(1), 0);
    EXPECT_EQ(d.bits_consumed, 0u);
    RandomSource rng(1);
    for (int i = 0; i < 100; ++i) EXPECT_TRUE(draw_recirculation(d, rng));
  }
}

TEST(RecircDecisionTest, ExactModeIsOneOverCarryPlusOne) {
  for (Count c : {1ULL, 2ULL, 3ULL, 99ULL, 1000000ULL}) {
    const auto d = recirc_decision(c, ProbMode::Exact);
    EXPECT_EQ(d.new_value, c + 1);
    EXPECT_EQ(d.probability.compare_scaled(c + 1), 0);
  }
}

TEST(RecircDecisionTest, PowerOfTwoWritesPowersOfTwo) {
  for (Count c = 0; c < 5000; ++c) {
    const auto d = recirc_decision(c, ProbMode::PowerOfTwo);
    ASSERT_TRUE(std::has_single_bit(d.new_value)) << c;
    ASSERT_GE(d.new_value, c) << c;
    // probability * new_value == 1
    ASSERT_EQ(d.probability.compare_scaled(d.new_value), 0) << c;
  }
}

TEST(RecircDecisionTest, NineEighthsQuantizedRatioBounds) {
  // With an N-bit threshold the realised ratio lies in [1 - 2^(4-N), 9/8).
  for (unsigned bits : {8u, 16u}) {
    const NineEighthsLookup lookup(bits);
    const double lo = 1.0 - std::ldexp(1.0, 4 - static_cast<int>(bits));
    for (Count c = 0; c < 100000; ++c) {
      const auto d = recirc_decision(c, ProbMode::NineEighths, lookup);
      const double ratio = d.probability.value() * static_cast<double>(c + 1);
      ASSERT_GE(ratio, lo) << c;
      ASSERT_LT(d.probability.compare_scaled(c + 1, 9, 8), 0) << c;
    }
  }
}

TEST(RecircDecisionTest, LookupBitsValidated) {
  EXPECT_THROW(NineEighthsLookup(3), UsageError);
  EXPECT_THROW(NineEighthsLookup(64), UsageError);
  EXPECT_NO_THROW(NineEighthsLookup(4));
}

TEST(RecircDecisionTest, DrawFrequenciesMatchProbability) {
  RandomSource rng(21);
  for (ProbMode m :
       {ProbMode::Exact, ProbMode::PowerOfTwo, ProbMode::NineEighths}) {
    for (Count c : {3ULL, 10ULL, 100ULL}) {
      const auto d = recirc_decision(c, m);
      const int n = 200000;
      int hits = 0;
      for (int i = 0; i < n; ++i) hits += draw_recirculation(d, rng);
      const double p = d.probability.value();
      const double sigma = std::sqrt(p * (1 - p) / n);
      EXPECT_NEAR(hits / static_cast<double>(n), p, 5 * sigma)
          << to_string(m) << " c=" << c;
    }
  }
}

TEST(ProbModeTest, ParsesNames) {
  EXPECT_EQ(parse_prob_mode("exact"), ProbMode::Exact);
  EXPECT_EQ(parse_prob_mode("pow2"), ProbMode::PowerOfTwo);
  EXPECT_EQ(parse_prob_mode("nine-eighths"), ProbMode::NineEighths);
  EXPECT_THROW(parse_prob_mode("half"), UsageError);
}

// --- stage_count ------------------------------------------------------------

TEST(StageCountTest, StackedAndNaive) {
  EXPECT_EQ(stage_count(2, true), 4u);
  EXPECT_EQ(stage_count(8, false), 24u);
  EXPECT_EQ(stage_count(1, true), 3u);
  EXPECT_EQ(stage_count(1, false), 3u);
  EXPECT_THROW(stage_count(0, true), UsageError);
}

// --- process_packet ---------------------------------------------------------

TEST(PrecisionTest, SingleFlowCountsExactly) {
  Precision p(config(2, 64, ProbMode::Exact));
  constexpr std::uint64_t kN = 1000;
  const auto first = p.process({A, 0});
  EXPECT_FALSE(first.matched);
  EXPECT_TRUE(first.recirculated);
  EXPECT_EQ(first.carry_min, 0u);
  EXPECT_EQ(first.estimate, 1u);
  for (std::uint64_t i = 1; i < kN; ++i) {
    ASSERT_TRUE(p.process({A, i}).matched);
  }
  EXPECT_EQ(p.estimate(A), kN);
  EXPECT_EQ(p.stats().recirculations, 1u);
}

TEST(PrecisionTest, FrozenCarryMinThreeRecirculatesAQuarter) {
  // Every slot stays at 3: flows are distinct and writes never land.
  PrecisionConfig c = config(2, 1024, ProbMode::Exact, 3, 1ULL << 40, 5);
  Precision p(c);
  constexpr std::uint64_t kN = 100000;
  for (std::uint64_t i = 0; i < kN; ++i) {
    const auto out = p.process({1000 + i, i});
    ASSERT_EQ(out.carry_min, 3u);
  }
  EXPECT_NEAR(p.stats().recirculations / static_cast<double>(kN), 0.25, 0.01);
}

TEST(PrecisionTest, InitialValueCapsEveryDecision) {
  const Trace t = generate_zipf({1.0, 50000, 200000}, 3);
  for (ProbMode m : {ProbMode::Exact, ProbMode::PowerOfTwo}) {
    Precision p(config(2, 512, m, 100, 0, 3));
    for (const auto& pkt : t) {
      p.process(pkt);
      if (const auto& d = p.last_decision()) {
        if (m == ProbMode::Exact) {
          ASSERT_LE(d->probability.compare_scaled(101), 0);
        } else {
          ASSERT_LE(d->probability.compare_scaled(128), 0);
        }
      }
    }
    EXPECT_LE(p.stats().recirculations / static_cast<double>(t.size()), 0.01);
  }
}

TEST(PrecisionTest, DelayZeroLandsBeforeNextPacket) {
  Precision p(config(2, 16, ProbMode::Exact));
  const auto out = p.process({A, 0});
  ASSERT_TRUE(out.recirculated);
  EXPECT_TRUE(p.pending().empty());
  EXPECT_TRUE(p.process({A, 1}).matched);
}

TEST(PrecisionTest, InFlightIncrementsAreOverridden) {
  Precision p(config(1, 1, ProbMode::Exact, 0, 5));
  p.mutable_table().write(0, 0, X, 0);
  ASSERT_TRUE(p.process({A, 0}).recirculated);  // carry_min 0: certain
  ASSERT_EQ(p.pending().size(), 1u);
  for (std::uint64_t i = 1; i <= 3; ++i) ASSERT_TRUE(p.process({X, i}).matched);
  EXPECT_EQ(p.table().val(0, 0), 3u);
  EXPECT_EQ(p.apply_pending(5), 1u);
  EXPECT_EQ(p.table().key(0, 0), A);
  EXPECT_EQ(p.table().val(0, 0), 1u);
}

TEST(PrecisionTest, WriteLandsAfterDelayPackets) {
  Precision p(config(1, 1, ProbMode::Exact, 0, 2));
  p.mutable_table().write(0, 0, X, 0);
  p.process({A, 0});
  p.process({X, 1});
  EXPECT_EQ(p.table().key(0, 0), X);
  EXPECT_EQ(p.pending().size(), 1u);
  p.process({X, 2});
  EXPECT_EQ(p.table().key(0, 0), A);
  EXPECT_TRUE(p.pending().empty());
}

TEST(PrecisionTest, ApplyPendingOnEmptyQueueIsNoop) {
  Precision p(config(2, 4, ProbMode::Exact, 7));
  EXPECT_EQ(p.apply_pending(1000), 0u);
  EXPECT_EQ(p.table().occupied(), 0u);
  EXPECT_EQ(p.table().val(1, 3), 7u);
}

TEST(PrecisionTest, EstimateConventions) {
  Precision p(config(2, 64, ProbMode::Exact));
  WayTable& t = p.mutable_table();
  const auto& h = p.hashes();
  t.write(0, h.slot(0, A), A, 7);
  EXPECT_EQ(p.estimate(A), 7u);
  t.write(1, h.slot(1, A), A, 3);  // stale duplicate
  EXPECT_EQ(p.estimate(A), 7u);
  EXPECT_EQ(p.top(5), (std::vector<FlowCount>{{A, 7}}));

  constexpr FlowId kAbsent = 99;
  t.write(0, h.slot(0, kAbsent), 500, 4);
  t.write(1, h.slot(1, kAbsent), 501, 9);
  EXPECT_EQ(p.estimate(kAbsent), 4u);
  EXPECT_THROW(p.top(0), UsageError);
}

TEST(PrecisionTest, MatchedPacketIncrementsEveryCopy) {
  Precision p(config(2, 64, ProbMode::Exact));
  WayTable& t = p.mutable_table();
  const auto& h = p.hashes();
  t.write(0, h.slot(0, A), A, 7);
  t.write(1, h.slot(1, A), A, 3);
  const auto out = p.process({A, 0});
  EXPECT_TRUE(out.matched);
  EXPECT_EQ(out.estimate, 8u);
  EXPECT_EQ(t.val(1, h.slot(1, A)), 4u);
}

TEST(PrecisionTest, CarryMinTieGoesToLowestWay) {
  Precision p(config(3, 8, ProbMode::Exact, 0, 1000));
  p.process({A, 0});
  ASSERT_EQ(p.pending().size(), 1u);
  EXPECT_EQ(p.pending().front().way, 0u);
  EXPECT_EQ(p.pending().front().apply_at_seq, 1000u);
  EXPECT_EQ(p.pending().front().value, 1u);
}

TEST(PrecisionTest, OutcomeInvariantsOnZipf) {
  const Trace t = generate_zipf({1.1, 20000, 100000}, 9);
  for (ProbMode m :
       {ProbMode::Exact, ProbMode::PowerOfTwo, ProbMode::NineEighths}) {
    for (std::uint64_t delay : {0ULL, 7ULL}) {
      Precision p(config(2, 128, m, 0, delay, 9));
      std::uint64_t recirc = 0;
      for (const auto& pkt : t) {
        const auto out = p.process(pkt);
        ASSERT_FALSE(out.recirculated && out.matched);
        ASSERT_EQ(out.matched, !out.carry_min.has_value());
        ASSERT_EQ(out.estimate, p.estimate(pkt.flow));
        ASSERT_LE(p.pending().size(), delay + 1);
        recirc += out.recirculated;
      }
      EXPECT_EQ(recirc, p.stats().recirculations);
      EXPECT_EQ(p.stats().packets, t.size());
    }
  }
}

TEST(PrecisionTest, CountersOnlyDropWherePendingWritesLand) {
  const Trace t = generate_zipf({1.0, 5000, 50000}, 12);
  for (std::uint64_t delay : {0ULL, 3ULL, 25ULL}) {
    Precision p(config(2, 32, ProbMode::Exact, 0, delay, 12));
    std::vector<Count> before;
    for (const auto& pkt : t) {
      std::set<std::pair<std::size_t, std::size_t>> landing;
      for (const auto& w : p.pending()) {
        if (w.apply_at_seq <= pkt.seq) landing.insert({w.way, w.slot});
      }
      const WayTable& tab = p.table();
      before.clear();
      for (std::size_t w = 0; w < tab.ways(); ++w) {
        for (std::size_t s = 0; s < tab.entries_per_way(); ++s) {
          before.push_back(tab.val(w, s));
        }
      }
      p.process(pkt);
      // A write decided on this packet lands now when delay == 0.
      if (delay == 0) {
        for (std::size_t w = 0; w < tab.ways(); ++w) {
          for (std::size_t s = 0; s < tab.entries_per_way(); ++s) {
            ASSERT_GE(tab.val(w, s), before[w * tab.entries_per_way() + s]);
          }
        }
        continue;
      }
      for (std::size_t w = 0; w < tab.ways(); ++w) {
        for (std::size_t s = 0; s < tab.entries_per_way(); ++s) {
          if (tab.val(w, s) < before[w * tab.entries_per_way() + s]) {
            ASSERT_TRUE(landing.count({w, s})) << "slot decreased without write";
          }
        }
      }
    }
  }
}

TEST(PrecisionTest, UnmatchedFlowGainsOnePerArrivalInExpectation) {
  // One slot holding X:20; A keeps arriving. Admission after j ~ Geo(1/21)
  // arrivals writes 21, so after n arrivals E[estimate(A)] = n.
  constexpr std::uint64_t kArrivals = 200;
  constexpr int kSeeds = 20000;
  double total = 0;
  for (int s = 0; s < kSeeds; ++s) {
    Precision p(config(1, 1, ProbMode::Exact, 0, 0, static_cast<std::uint64_t>(s)));
    p.mutable_table().write(0, 0, X, 20);
    for (std::uint64_t i = 0; i < kArrivals; ++i) p.process({A, i});
    total += p.table().key(0, 0) == A ? static_cast<double>(p.estimate(A)) : 0.0;
  }
  // sd(j) ~ 20.5, so the mean over 20000 seeds has sd ~ 0.15.
  EXPECT_NEAR(total / kSeeds, static_cast<double>(kArrivals), 1.0);
}

TEST(PrecisionTest, ReplayIsDeterministic) {
  const Trace t = generate_zipf({1.0, 10000, 30000}, 4);
  Precision a(config(2, 64, ProbMode::NineEighths, 10, 3, 4));
  Precision b(config(2, 64, ProbMode::NineEighths, 10, 3, 4));
  for (const auto& pkt : t) {
    const auto x = a.process(pkt);
    const auto y = b.process(pkt);
    ASSERT_EQ(x.estimate, y.estimate);
    ASSERT_EQ(x.recirculated, y.recirculated);
  }
  EXPECT_EQ(a.top(16), b.top(16));
}

}  // namespace
}  // namespace hh
