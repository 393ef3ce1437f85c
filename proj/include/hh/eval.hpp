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
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "hh/algorithm.hpp"
#include "hh/core.hpp"
#include "hh/traces.hpp"

namespace hh {

/// Exact per-flow counts. Also usable as an algorithm (zero error).
class ExactOracle {
 public:
  ArrivalOutcome process(const Packet& p) {
    ArrivalOutcome out;
    Count& c = counts_[p.flow];
    out.matched = c > 0;
    out.estimate = ++c;
    return out;
  }

  Count estimate(FlowId flow) const {
    auto it = counts_.find(flow);
    return it == counts_.end() ? 0 : it->second;
  }

  std::vector<FlowCount> top(std::size_t k) const {
    std::vector<FlowCount> all;
    all.reserve(counts_.size());
    for (const auto& [f, c] : counts_) all.push_back({f, c});
    return rank_top(std::move(all), k);
  }

  std::size_t memory_counters() const noexcept { return counts_.size(); }

  const std::unordered_map<FlowId, Count>& counts() const noexcept {
    return counts_;
  }

  /// k-th largest count so far; 0 if fewer than k flows have appeared.
  Count kth_largest(std::size_t k) const {
    if (k == 0) throw UsageError("F_k: k must be >= 1");
    if (k > counts_.size()) return 0;
    std::vector<Count> values;
    values.reserve(counts_.size());
    for (const auto& [f, c] : counts_) values.push_back(c);
    std::nth_element(values.begin(), values.begin() + (k - 1), values.end(),
                     std::greater<>());
    return values[k - 1];
  }

 private:
  std::unordered_map<FlowId, Count> counts_;
};

/// Neumaier-compensated sum in extended precision.
class CompensatedSum {
 public:
  void add(long double x) noexcept {
    const long double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  long double value() const noexcept { return sum_ + comp_; }

 private:
  long double sum_ = 0.0L;
  long double comp_ = 0.0L;
};

struct ConvergencePoint {
  std::uint64_t packets = 0;
  double recall = 0.0;
};

struct EvalReport {
  std::uint64_t packets = 0;
  double mse = 0.0;
  std::size_t k = 0;
  double recall_at_k = 0.0;
  std::uint64_t recirc_count = 0;
  double recirc_ratio = 0.0;
  std::vector<ConvergencePoint> convergence;
  std::string config;
  std::uint64_t seed = 0;
};

/// |{e in candidates : f_e >= F_k}| / k. Counts by threshold, so any flow
/// tied at F_k qualifies.
template <typename FrequencyOf>
double recall_of(const std::vector<FlowCount>& candidates, Count f_k,
                 std::size_t k, FrequencyOf&& frequency_of) {
  if (k == 0) throw UsageError("recall: k must be >= 1");
  std::size_t hits = 0;
  for (const FlowCount& e : candidates) {
    if (frequency_of(e.flow) >= f_k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(k);
}

template <HeavyHitterAlgorithm A>
double recall_top_k(const A& alg, const TraceStats& stats, std::size_t k) {
  if (k == 0) throw UsageError("recall: k must be >= 1");
  return recall_of(alg.top(k), stats.kth_largest(k), k,
                   [&](FlowId f) { return stats.frequency(f); });
}

struct EvalOptions {
  /// 0 skips the recall computation.
  std::size_t k = 0;
  /// 0 disables the convergence curve.
  std::uint64_t sample_every = 0;
};

/// OnArrival evaluation: after each packet is processed, the algorithm's
/// estimate for that packet's flow is compared with the exact count
/// (which includes the packet).
template <HeavyHitterAlgorithm A>
EvalReport run_on_arrival(A& alg, const Trace& trace,
                          const EvalOptions& opts = {}) {
  EvalReport report;
  report.k = opts.k;
  ExactOracle oracle;
  CompensatedSum squared;
  std::uint64_t recirc = 0;
  std::uint64_t n = 0;

  auto sample = [&] {
    const Count f_k = oracle.kth_largest(opts.k);
    report.convergence.push_back(
        {n, recall_of(alg.top(opts.k), f_k, opts.k,
                      [&](FlowId f) { return oracle.estimate(f); })});
  };

  for (const Packet& p : trace) {
    const ArrivalOutcome out = alg.process(p);
    const Count truth = oracle.process(p).estimate;
    const long double err =
        static_cast<long double>(out.estimate) - static_cast<long double>(truth);
    squared.add(err * err);
    recirc += out.recirculated ? 1 : 0;
    ++n;
    if (opts.sample_every != 0 && opts.k != 0 && n % opts.sample_every == 0) {
      sample();
    }
  }
  if (opts.sample_every != 0 && opts.k != 0 &&
      (report.convergence.empty() || report.convergence.back().packets != n)) {
    sample();
  }

  report.packets = n;
  report.mse = n == 0 ? 0.0 : static_cast<double>(squared.value() / n);
  report.recirc_count = recirc;
  report.recirc_ratio =
      n == 0 ? 0.0 : static_cast<double>(recirc) / static_cast<double>(n);
  if (opts.k != 0) {
    report.recall_at_k = recall_of(alg.top(opts.k), oracle.kth_largest(opts.k),
                                   opts.k,
                                   [&](FlowId f) { return oracle.estimate(f); });
  }
  return report;
}

/// Recall against the prefix ground truth every `sample_every` packets; the
/// last point is always the full trace.
template <HeavyHitterAlgorithm A>
std::vector<ConvergencePoint> convergence_curve(A& alg, const Trace& trace,
                                                std::size_t k,
                                                std::uint64_t sample_every) {
  if (sample_every == 0) {
    throw UsageError("convergence: sample_every must be >= 1");
  }
  if (k == 0) throw UsageError("convergence: k must be >= 1");
  return run_on_arrival(alg, trace, {k, sample_every}).convergence;
}

/// First sample point whose recall reaches `fraction` of the curve's final
/// recall; 0 if the curve is empty.
inline std::uint64_t packets_to_reach(const std::vector<ConvergencePoint>& curve,
                                      double fraction) {
  if (curve.empty()) return 0;
  const double target = fraction * curve.back().recall;
  for (const auto& pt : curve) {
    if (pt.recall >= target) return pt.packets;
  }
  return curve.back().packets;
}

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t n = 0;
};

/// Mean and sample (n - 1) standard deviation.
inline Summary summarize(std::span<const double> xs) {
  Summary s;
  s.n = xs.size();
  if (xs.empty()) return s;
  CompensatedSum sum;
  for (double x : xs) sum.add(x);
  s.mean = static_cast<double>(sum.value() / xs.size());
  if (xs.size() > 1) {
    CompensatedSum sq;
    for (double x : xs) sq.add((x - s.mean) * (x - s.mean));
    s.stddev = std::sqrt(static_cast<double>(sq.value() / (xs.size() - 1)));
  }
  return s;
}

}  // namespace hh
