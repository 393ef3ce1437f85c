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

#include <array>
#include <cstdint>
#include <vector>

#include "hh/core.hpp"
#include "hh/way_table.hpp"

namespace hh {
namespace {

TEST(HashFamilyTest, DeterministicForFixedSeeds) {
  const HashFamily a(4, 1000, 42);
  const HashFamily b(4, 1000, 42);
  for (FlowId key : {0ULL, 1ULL, 12345ULL, 0xdeadbeefULL}) {
    for (std::size_t w = 0; w < 4; ++w) {
      EXPECT_EQ(a.slot(w, key), a.slot(w, key));
      EXPECT_EQ(a.slot(w, key), b.slot(w, key));
    }
  }
}

TEST(HashFamilyTest, SingleSlotTableAlwaysZero) {
  const HashFamily h(3, 1, 9);
  for (FlowId key = 0; key < 1000; ++key) {
    for (std::size_t w = 0; w < 3; ++w) EXPECT_EQ(h.slot(w, key), 0u);
  }
}

TEST(HashFamilyTest, WayOutOfRangeIsUsageError) {
  const HashFamily h(2, 16, 1);
  EXPECT_THROW(h.slot(2, 7), UsageError);
  EXPECT_THROW(HashFamily(0, 16, 1), UsageError);
  EXPECT_THROW(HashFamily(2, 0, 1), UsageError);
}

TEST(HashFamilyTest, NeverLeavesTableWidth) {
  for (std::size_t width : {1u, 2u, 3u, 7u, 100u, 4097u}) {
    const HashFamily h(2, width, width);
    RandomSource rng(width);
    for (int i = 0; i < 10000; ++i) {
      const FlowId key = rng.bits(64);
      EXPECT_LT(h.slot(0, key), width);
      EXPECT_LT(h.slot(1, key), width);
    }
  }
}

// Pearson chi-square over 256 slots; 310.457 is the 0.99 quantile of
// chi2(255), so a uniform hash fails with probability 1%.
TEST(HashFamilyTest, ChiSquareUniformity) {
  constexpr std::size_t kSlots = 256;
  constexpr int kKeys = 100000;
  const HashFamily h(2, kSlots, 2024);
  RandomSource keys(77);
  for (std::size_t way = 0; way < 2; ++way) {
    std::array<int, kSlots> hist{};
    for (int i = 0; i < kKeys; ++i) ++hist[h.slot(way, keys.bits(64))];
    const double expected = static_cast<double>(kKeys) / kSlots;
    double stat = 0;
    for (int c : hist) stat += (c - expected) * (c - expected) / expected;
    EXPECT_LT(stat, 310.457) << "way " << way;
  }
}

TEST(HashFamilyTest, SequentialKeysSpreadEvenly) {
  // Dense ids (as produced by the trace loader) must not cluster.
  constexpr std::size_t kSlots = 256;
  const HashFamily h(1, kSlots, 5);
  std::array<int, kSlots> hist{};
  for (FlowId k = 0; k < 100000; ++k) ++hist[h.slot(0, k)];
  const double expected = 100000.0 / kSlots;
  double stat = 0;
  for (int c : hist) stat += (c - expected) * (c - expected) / expected;
  EXPECT_LT(stat, 310.457);
}

TEST(RandomSourceTest, SingleBitIsFair) {
  RandomSource rng(1);
  int ones = 0;
  for (int i = 0; i < 100000; ++i) ones += static_cast<int>(rng.bits(1));
  EXPECT_NEAR(ones / 100000.0, 0.5, 0.01);
}

TEST(RandomSourceTest, BitsStayInRange) {
  RandomSource rng(2);
  for (int i = 0; i < 100000; ++i) EXPECT_LE(rng.bits(8), 255u);
  for (unsigned n = 1; n < 64; ++n) {
    EXPECT_LT(rng.bits(n), std::uint64_t{1} << n);
  }
}

TEST(RandomSourceTest, FixedSeedReplays) {
  RandomSource a(99);
  RandomSource b(99);
  for (int i = 0; i < 1000; ++i) {
    const unsigned n = 1 + static_cast<unsigned>(i % 64);
    EXPECT_EQ(a.bits(n), b.bits(n));
  }
}

TEST(RandomSourceTest, BadWidthIsUsageError) {
  RandomSource rng(3);
  EXPECT_THROW(rng.bits(0), UsageError);
  EXPECT_THROW(rng.bits(65), UsageError);
  EXPECT_NO_THROW(rng.bits(64));
  EXPECT_THROW(rng.below(0), UsageError);
}

TEST(RandomSourceTest, BelowIsUniform) {
  RandomSource rng(4);
  std::array<int, 7> hist{};
  for (int i = 0; i < 70000; ++i) ++hist[rng.below(7)];
  for (int c : hist) EXPECT_NEAR(c, 10000, 400);
}

TEST(RandomSourceTest, UnitIntervalIsOpenAtZero) {
  RandomSource rng(5);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.unit_open_closed();
    EXPECT_GT(u, 0.0);
    EXPECT_LE(u, 1.0);
  }
}

TEST(WayTableTest, StartsEmptyAtInitialValue) {
  WayTable t(3, 5, 100);
  EXPECT_EQ(t.capacity(), 15u);
  EXPECT_EQ(t.occupied(), 0u);
  for (std::size_t w = 0; w < 3; ++w) {
    for (std::size_t s = 0; s < 5; ++s) {
      EXPECT_TRUE(t.empty_slot(w, s));
      EXPECT_EQ(t.val(w, s), 100u);
    }
  }
  t.write(1, 2, 42, 7);
  EXPECT_EQ(t.occupied(), 1u);
  EXPECT_EQ(t.key(1, 2), 42u);
  EXPECT_EQ(t.val(1, 2), 7u);
}

}  // namespace
}  // namespace hh
