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

// Monte-Carlo checks of the recirculation bounds: threshold-crossing times
// of geometric sums, and total recirculations of a PRECISION instance.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "hh/core.hpp"
#include "hh/precision.hpp"

namespace hh {

/// Geo(p) on {1, 2, ...} with mean 1/p, by inverse CDF.
class GeometricSampler {
 public:
  explicit GeometricSampler(double p) : p_(p) {
    if (!(p > 0.0 && p <= 1.0)) {
      throw UsageError("geometric: p must be in (0, 1]");
    }
    log_q_ = std::log1p(-p);
  }

  std::uint64_t operator()(RandomSource& rng) const {
    if (p_ == 1.0) return 1;
    const double u = rng.unit_open_closed();
    const double x = std::ceil(std::log(u) / log_q_);
    if (x < 1.0) return 1;
    if (x >= 1.8e19) return std::numeric_limits<std::uint64_t>::max();
    return static_cast<std::uint64_t>(x);
  }

  double p() const noexcept { return p_; }

 private:
  double p_;
  double log_q_ = 0.0;
};

struct BoundCheckResult {
  std::string name;
  double empirical_mean = 0.0;
  /// Exact expectation (equality checks) or upper bound (bound checks).
  double analytic_value_or_bound = 0.0;
  std::uint64_t trials = 0;
  bool within_bound = false;
  /// (empirical - analytic) / analytic.
  double relative_gap = 0.0;
};

namespace detail {

inline double relative_gap(double empirical, double analytic) {
  return analytic == 0.0 ? 0.0 : (empirical - analytic) / analytic;
}

}  // namespace detail

/// Z = min{n : X_1 + ... + X_n >= T}, X_i ~ Geo(p) i.i.d. Expected value
/// p(T - 1) + 1. Passes when the empirical mean is within `tolerance`
/// (relative) of the formula. `analytic_scale` multiplies the formula and
/// exists only to exercise the failure path.
inline BoundCheckResult check_geometric_sum_lemma(
    double p, std::uint64_t threshold, std::uint64_t trials,
    std::uint64_t seed, double tolerance = 0.02, double analytic_scale = 1.0) {
  if (threshold == 0) throw UsageError("geometric lemma: T must be >= 1");
  if (trials == 0) throw UsageError("geometric lemma: trials must be >= 1");
  const GeometricSampler geo(p);
  RandomSource rng(SeedSequence(seed).next());
  long double total = 0.0L;
  for (std::uint64_t t = 0; t < trials; ++t) {
    std::uint64_t sum = 0;
    std::uint64_t n = 0;
    while (sum < threshold) {
      sum += geo(rng);
      ++n;
    }
    total += n;
  }
  BoundCheckResult r;
  r.name = "geometric-sum lemma (p=" + std::to_string(p) +
           ", T=" + std::to_string(threshold) + ")";
  r.trials = trials;
  r.empirical_mean = static_cast<double>(total / trials);
  r.analytic_value_or_bound =
      analytic_scale * (p * static_cast<double>(threshold - 1) + 1.0);
  r.relative_gap = detail::relative_gap(r.empirical_mean,
                                        r.analytic_value_or_bound);
  r.within_bound = std::fabs(r.relative_gap) <= tolerance;
  return r;
}

/// One draw of A = min{n : X_1 + ... + X_n >= T} with X_i ~ Geo(1/i).
inline std::uint64_t counter_growth_sample(std::uint64_t threshold,
                                           RandomSource& rng) {
  std::uint64_t sum = 0;
  std::uint64_t n = 0;
  while (sum < threshold) {
    ++n;
    sum += GeometricSampler(1.0 / static_cast<double>(n))(rng);
  }
  return n;
}

/// Mean of A against the bound 2 * sqrt(T).
inline BoundCheckResult check_counter_growth_lemma(std::uint64_t threshold,
                                                   std::uint64_t trials,
                                                   std::uint64_t seed,
                                                   double bound_scale = 1.0) {
  if (threshold == 0) throw UsageError("counter lemma: T must be >= 1");
  if (trials == 0) throw UsageError("counter lemma: trials must be >= 1");
  RandomSource rng(SeedSequence(seed).next());
  long double total = 0.0L;
  for (std::uint64_t t = 0; t < trials; ++t) {
    total += counter_growth_sample(threshold, rng);
  }
  BoundCheckResult r;
  r.name = "counter-growth lemma (T=" + std::to_string(threshold) + ")";
  r.trials = trials;
  r.empirical_mean = static_cast<double>(total / trials);
  r.analytic_value_or_bound =
      bound_scale * 2.0 * std::sqrt(static_cast<double>(threshold));
  r.relative_gap = detail::relative_gap(r.empirical_mean,
                                        r.analytic_value_or_bound);
  r.within_bound = r.empirical_mean <= r.analytic_value_or_bound;
  return r;
}

struct RecirculationRun {
  std::vector<std::uint64_t> per_seed;
  double mean = 0.0;
};

/// PRECISION (Exact mode, initial value 0, no delay) over N packets of
/// pairwise distinct flows, so that every packet is unmatched.
inline RecirculationRun measure_recirculations(std::uint64_t packets,
                                               std::size_t counters,
                                               std::size_t ways,
                                               std::uint64_t seeds,
                                               std::uint64_t base_seed) {
  if (counters == 0 || ways == 0 || counters % ways != 0) {
    throw UsageError("recirculation bound: counters must be a positive "
                     "multiple of ways");
  }
  if (seeds == 0) throw UsageError("recirculation bound: seeds must be >= 1");
  RecirculationRun run;
  long double total = 0.0L;
  for (std::uint64_t s = 0; s < seeds; ++s) {
    PrecisionConfig cfg;
    cfg.ways = ways;
    cfg.entries_per_way = counters / ways;
    cfg.prob_mode = ProbMode::Exact;
    cfg.initial_value = 0;
    cfg.delay = 0;
    cfg.seed = base_seed + s;
    Precision alg(cfg);
    for (std::uint64_t i = 0; i < packets; ++i) alg.process({i, i});
    run.per_seed.push_back(alg.stats().recirculations);
    total += alg.stats().recirculations;
  }
  run.mean = static_cast<double>(total / seeds);
  return run;
}

/// Mean recirculations against 2 * sqrt(N * C) * slack.
inline BoundCheckResult check_recirculation_bound(std::uint64_t packets,
                                                  std::size_t counters,
                                                  std::uint64_t seeds,
                                                  std::uint64_t base_seed,
                                                  std::size_t ways = 2,
                                                  double slack = 1.1,
                                                  double bound_scale = 1.0) {
  const RecirculationRun run =
      measure_recirculations(packets, counters, ways, seeds, base_seed);
  BoundCheckResult r;
  r.name = "recirculation bound (N=" + std::to_string(packets) +
           ", C=" + std::to_string(counters) + ", d=" + std::to_string(ways) +
           ")";
  r.trials = seeds;
  r.empirical_mean = run.mean;
  r.analytic_value_or_bound =
      bound_scale * slack * 2.0 *
      std::sqrt(static_cast<double>(packets) * static_cast<double>(counters));
  r.relative_gap = detail::relative_gap(r.empirical_mean,
                                        r.analytic_value_or_bound);
  r.within_bound = r.empirical_mean <= r.analytic_value_or_bound;
  return r;
}

}  // namespace hh
