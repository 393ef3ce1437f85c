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
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "hh/core.hpp"

namespace hh {

struct ZipfSpec {
  double alpha = 1.0;
  std::uint64_t universe = 100000;
  std::uint64_t length = 1000000;
};

struct FileSpec {
  std::string path;
};

struct TraceSpec {
  std::variant<ZipfSpec, FileSpec> source = ZipfSpec{};
  std::uint64_t seed = 1;
};

/// Draws ranks 1..universe with P(r) proportional to r^-alpha by inverse CDF
/// over the cumulative weights. Rank r becomes FlowId r - 1.
class ZipfSampler {
 public:
  ZipfSampler(double alpha, std::uint64_t universe) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
      throw UsageError("zipf: alpha must be a finite value >= 0");
    }
    if (universe == 0) throw UsageError("zipf: universe must be >= 1");
    cdf_.resize(universe);
    long double acc = 0.0L;
    for (std::uint64_t r = 1; r <= universe; ++r) {
      acc += std::pow(static_cast<long double>(r),
                      -static_cast<long double>(alpha));
      cdf_[r - 1] = static_cast<double>(acc);
    }
    total_ = cdf_.back();
  }

  FlowId operator()(RandomSource& rng) const {
    // u in [0, total)
    const double u = (1.0 - rng.unit_open_closed()) * total_;
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    const auto idx = static_cast<FlowId>(it - cdf_.begin());
    return std::min<FlowId>(idx, cdf_.size() - 1);
  }

  /// Probability mass of rank r (1-based).
  double mass(std::uint64_t r) const {
    const double prev = r == 1 ? 0.0 : cdf_[r - 2];
    return (cdf_[r - 1] - prev) / total_;
  }

 private:
  std::vector<double> cdf_;
  double total_ = 0.0;
};

inline Trace generate_zipf(const ZipfSpec& spec, std::uint64_t seed) {
  if (spec.length == 0) throw UsageError("zipf: length must be >= 1");
  const ZipfSampler sampler(spec.alpha, spec.universe);
  RandomSource rng(SeedSequence(seed).next());
  Trace trace;
  trace.reserve(spec.length);
  for (std::uint64_t i = 0; i < spec.length; ++i) {
    trace.push_back({sampler(rng), i});
  }
  return trace;
}

/// One flow token per line, no header. Tokens become dense FlowIds in order
/// of first appearance.
inline Trace load_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open trace file");
  std::unordered_map<std::string, FlowId> ids;
  Trace trace;
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      throw IoError(path + ":" + std::to_string(line_no) + ": blank line");
    }
    auto [it, inserted] = ids.try_emplace(line, ids.size());
    trace.push_back({it->second, trace.size()});
  }
  if (in.bad()) {
    throw IoError(path + ":" + std::to_string(line_no + 1) + ": read error");
  }
  if (trace.empty()) throw IoError(path + ":1: empty trace file");
  return trace;
}

inline void save_csv(const Trace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path + ": cannot open for writing");
  std::string buf;
  buf.reserve(1 << 16);
  for (const Packet& p : trace) {
    buf += std::to_string(p.flow);
    buf += '\n';
    if (buf.size() > (1 << 15)) {
      out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  out.flush();
  if (!out) throw IoError(path + ": write failed");
}

inline Trace make_trace(const TraceSpec& spec) {
  if (const auto* z = std::get_if<ZipfSpec>(&spec.source)) {
    return generate_zipf(*z, spec.seed);
  }
  return load_csv(std::get<FileSpec>(spec.source).path);
}

/// Ground truth over a whole trace.
class TraceStats {
 public:
  TraceStats() = default;

  explicit TraceStats(std::unordered_map<FlowId, Count> freq)
      : freq_(std::move(freq)) {
    sorted_.reserve(freq_.size());
    for (const auto& [flow, c] : freq_) {
      sorted_.push_back(c);
      n_ += c;
    }
    std::sort(sorted_.begin(), sorted_.end(), std::greater<>());
  }

  Count packets() const noexcept { return n_; }
  std::size_t distinct() const noexcept { return freq_.size(); }

  Count frequency(FlowId flow) const {
    auto it = freq_.find(flow);
    return it == freq_.end() ? 0 : it->second;
  }

  /// Frequency of the k-th largest flow (1-based); 0 once k exceeds the
  /// number of distinct flows.
  Count kth_largest(std::size_t k) const {
    if (k == 0) throw UsageError("F_k: k must be >= 1");
    return k > sorted_.size() ? 0 : sorted_[k - 1];
  }

  const std::vector<Count>& sorted_frequencies() const noexcept {
    return sorted_;
  }
  const std::unordered_map<FlowId, Count>& frequencies() const noexcept {
    return freq_;
  }

 private:
  std::unordered_map<FlowId, Count> freq_;
  std::vector<Count> sorted_;
  Count n_ = 0;
};

inline TraceStats compute_stats(const Trace& trace) {
  std::unordered_map<FlowId, Count> freq;
  for (const Packet& p : trace) ++freq[p.flow];
  return TraceStats(std::move(freq));
}

inline std::string describe(const TraceSpec& spec) {
  std::ostringstream os;
  if (const auto* z = std::get_if<ZipfSpec>(&spec.source)) {
    os << "zipf;alpha=" << z->alpha << ";universe=" << z->universe
       << ";n=" << z->length;
  } else {
    os << "file;path=" << std::get<FileSpec>(spec.source).path;
  }
  return os.str();
}

}  // namespace hh
