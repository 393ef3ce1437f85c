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

// Experiment plumbing behind the hh_sim tool: algorithm specs, the
// (algorithm x memory x seed) matrix, and CSV emission.

#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "hh/algorithm.hpp"
#include "hh/core.hpp"
#include "hh/eval.hpp"
#include "hh/hashparallel.hpp"
#include "hh/hashpipe.hpp"
#include "hh/precision.hpp"
#include "hh/rap.hpp"
#include "hh/space_saving.hpp"
#include "hh/theory.hpp"
#include "hh/traces.hpp"

namespace hh {

inline constexpr std::string_view kAlgorithmNames[] = {
    "space-saving", "rap", "hashpipe", "hashparallel", "precision", "exact"};

inline std::string valid_algorithm_list() {
  std::string s;
  for (auto n : kAlgorithmNames) {
    if (!s.empty()) s += ", ";
    s += n;
  }
  return s;
}

/// One algorithm and its parameters, written `name[:key=value]...` with keys
/// d, mode, delay, init, bits. For rap, d=0 (the default) is the fully
/// associative variant.
struct AlgoSpec {
  std::string name = "precision";
  std::size_t ways = 2;
  ProbMode mode = ProbMode::PowerOfTwo;
  std::uint64_t delay = 0;
  Count initial_value = 0;
  unsigned lookup_bits = kDefaultLookupBits;

  bool fully_associative() const {
    return name == "space-saving" || name == "exact" ||
           (name == "rap" && ways == 0);
  }
  bool has_delay() const {
    return name == "precision" || name == "hashparallel";
  }

  /// Canonical label; parse_algo_spec(label()) round-trips.
  std::string label() const {
    std::string s = name;
    if (!fully_associative()) s += ":d=" + std::to_string(ways);
    if (name == "precision") {
      s += ":mode=" + std::string(to_string(mode));
      if (mode == ProbMode::NineEighths && lookup_bits != kDefaultLookupBits) {
        s += ":bits=" + std::to_string(lookup_bits);
      }
      s += ":init=" + std::to_string(initial_value);
    }
    if (has_delay()) s += ":delay=" + std::to_string(delay);
    return s;
  }
};

namespace detail {

inline std::uint64_t parse_u64(std::string_view text, std::string_view what) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw UsageError("invalid value '" + std::string(text) + "' for " +
                     std::string(what));
  }
  return v;
}

}  // namespace detail

inline AlgoSpec parse_algo_spec(std::string_view text) {
  AlgoSpec spec;
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t colon = text.find(':', start);
    parts.push_back(text.substr(start, colon - start));
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  spec.name = std::string(parts.front());
  if (std::find(std::begin(kAlgorithmNames), std::end(kAlgorithmNames),
                spec.name) == std::end(kAlgorithmNames)) {
    throw UsageError("unknown algorithm '" + spec.name +
                     "' (valid: " + valid_algorithm_list() + ")");
  }
  if (spec.name == "rap") spec.ways = 0;
  if (spec.fully_associative()) spec.ways = 0;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const auto eq = parts[i].find('=');
    if (eq == std::string_view::npos) {
      throw UsageError("algorithm option '" + std::string(parts[i]) +
                       "' must be key=value");
    }
    const auto key = parts[i].substr(0, eq);
    const auto value = parts[i].substr(eq + 1);
    if (key == "d") {
      spec.ways = detail::parse_u64(value, "d");
    } else if (key == "mode") {
      spec.mode = parse_prob_mode(value);
    } else if (key == "delay") {
      spec.delay = detail::parse_u64(value, "delay");
    } else if (key == "init") {
      spec.initial_value = detail::parse_u64(value, "init");
    } else if (key == "bits") {
      spec.lookup_bits =
          static_cast<unsigned>(detail::parse_u64(value, "bits"));
    } else {
      throw UsageError("unknown algorithm option '" + std::string(key) +
                       "' (valid: d, mode, delay, init, bits)");
    }
  }
  if (spec.name != "rap" && !spec.fully_associative() && spec.ways == 0) {
    throw UsageError(spec.name + ": d must be >= 1");
  }
  if (spec.name == "space-saving" || spec.name == "exact") spec.ways = 0;
  return spec;
}

/// Builds a fresh instance with `counters` total counters (d * width for
/// way-based tables).
inline std::unique_ptr<AnyAlgorithm> make_algorithm(const AlgoSpec& spec,
                                                    std::size_t counters,
                                                    std::uint64_t seed) {
  if (counters == 0) throw UsageError("counters must be >= 1");
  const std::uint64_t alg_seed = SeedSequence(seed ^ 0xa160ULL).next();
  if (spec.name == "exact") return make_any(ExactOracle{});
  if (spec.name == "space-saving") return make_any(SpaceSaving(counters));
  if (spec.name == "rap" && spec.ways == 0) {
    return make_any(RapFull(counters, alg_seed));
  }
  if (counters % spec.ways != 0) {
    throw UsageError("memory grid mismatch: " + std::to_string(counters) +
                     " counters cannot be split into " +
                     std::to_string(spec.ways) + " equal ways for " +
                     spec.label());
  }
  const std::size_t width = counters / spec.ways;
  if (spec.name == "rap") return make_any(RapWays(spec.ways, width, alg_seed));
  if (spec.name == "hashpipe") {
    return make_any(HashPipe(spec.ways, width, alg_seed));
  }
  if (spec.name == "hashparallel") {
    return make_any(HashParallel(spec.ways, width, spec.delay, alg_seed));
  }
  PrecisionConfig cfg;
  cfg.ways = spec.ways;
  cfg.entries_per_way = width;
  cfg.initial_value = spec.initial_value;
  cfg.prob_mode = spec.mode;
  cfg.delay = spec.delay;
  cfg.seed = alg_seed;
  cfg.lookup_bits = spec.lookup_bits;
  return make_any(Precision(cfg));
}

struct ExperimentConfig {
  TraceSpec trace;
  std::vector<AlgoSpec> algorithms;
  std::vector<std::size_t> counters = {4096};
  std::size_t k = 32;
  std::uint64_t base_seed = 1;
  std::uint64_t seeds = 1;
  std::string out_dir = ".";
  /// 0 = hardware concurrency.
  unsigned workers = 0;

  std::vector<std::uint64_t> seed_list() const {
    std::vector<std::uint64_t> s;
    for (std::uint64_t i = 0; i < seeds; ++i) s.push_back(base_seed + i);
    return s;
  }

  void validate() const {
    if (algorithms.empty()) throw UsageError("no algorithm given");
    if (counters.empty()) throw UsageError("no memory size given");
    if (k == 0) throw UsageError("k must be >= 1");
    if (seeds == 0) throw UsageError("seeds must be >= 1");
    if (const auto* z = std::get_if<ZipfSpec>(&trace.source)) {
      if (!(z->alpha >= 0.0)) throw UsageError("alpha must be >= 0");
      if (z->universe == 0) throw UsageError("universe must be >= 1");
      if (z->length == 0) throw UsageError("length must be >= 1");
    }
    for (const auto& a : algorithms) {
      for (std::size_t c : counters) {
        if (c == 0) throw UsageError("counters must be >= 1");
        if (!a.fully_associative() && c % a.ways != 0) {
          throw UsageError("memory grid mismatch: " + std::to_string(c) +
                           " counters cannot be split into " +
                           std::to_string(a.ways) + " equal ways for " +
                           a.label());
        }
      }
    }
  }
};

/// One line of result CSV. Summary rows carry means in the metric columns,
/// seed "summary", and sample standard deviations in the *_sd columns.
struct ResultRow {
  AlgoSpec algorithm;
  std::size_t counters = 0;
  std::string seed;
  double mse = 0.0;
  double recall = 0.0;
  double recirc_ratio = 0.0;
  std::size_t k = 0;
  std::string trace;
  std::optional<Summary> mse_sd;
  std::optional<Summary> recall_sd;
  std::optional<Summary> recirc_sd;
};

inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

inline constexpr std::string_view kResultHeader =
    "algorithm,d,counters,prob_mode,delay,initial_value,seed,mse,recall_k,"
    "recirc_ratio,k,lookup_bits,label,trace,mse_sd,recall_sd,recirc_sd";

inline std::string to_csv_line(const ResultRow& r) {
  const AlgoSpec& a = r.algorithm;
  const bool precision = a.name == "precision";
  std::string s;
  s += a.name;
  s += ',' + std::to_string(a.fully_associative() ? 0 : a.ways);
  s += ',' + std::to_string(r.counters);
  s += ',' + (precision ? std::string(to_string(a.mode)) : std::string("-"));
  s += ',' + std::to_string(a.has_delay() ? a.delay : 0);
  s += ',' + std::to_string(precision ? a.initial_value : 0);
  s += ',' + r.seed;
  s += ',' + format_double(r.mse);
  s += ',' + format_double(r.recall);
  s += ',' + format_double(r.recirc_ratio);
  s += ',' + std::to_string(r.k);
  s += ',' + std::to_string(a.lookup_bits);
  s += ',' + a.label();
  s += ',' + r.trace;
  s += ',' + (r.mse_sd ? format_double(r.mse_sd->stddev) : std::string());
  s += ',' + (r.recall_sd ? format_double(r.recall_sd->stddev) : std::string());
  s += ',' + (r.recirc_sd ? format_double(r.recirc_sd->stddev) : std::string());
  return s;
}

inline std::string to_csv(const std::vector<ResultRow>& rows) {
  std::string s(kResultHeader);
  s += '\n';
  for (const auto& r : rows) {
    s += to_csv_line(r);
    s += '\n';
  }
  return s;
}

inline void write_file(const std::filesystem::path& path,
                       std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw IoError(path.string() + ": write failed");
}

/// Runs fn(i) for i in [0, n) on at most `workers` threads. Each index is
/// claimed by exactly one thread; the first exception is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

/// Evaluates one (algorithm, memory, seed) cell on a prepared trace.
inline EvalReport evaluate_cell(const Trace& trace, const AlgoSpec& spec,
                                std::size_t counters, std::size_t k,
                                std::uint64_t seed,
                                std::uint64_t sample_every = 0) {
  auto alg = make_algorithm(spec, counters, seed);
  EvalReport r = run_on_arrival(*alg, trace, {k, sample_every});
  r.seed = seed;
  r.config = spec.label() + ";counters=" + std::to_string(counters);
  return r;
}

struct MatrixResult {
  /// Ordered by algorithm, then memory size, then seed.
  std::vector<ResultRow> rows;
  /// One summary row per (algorithm, memory size), same order.
  std::vector<ResultRow> summaries;
};

/// Every algorithm x memory size x seed. A Zipf trace is regenerated from
/// each seed; a file trace is loaded once and shared.
inline MatrixResult run_matrix(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto seeds = cfg.seed_list();
  const std::size_t na = cfg.algorithms.size();
  const std::size_t nc = cfg.counters.size();
  const std::size_t ns = seeds.size();
  std::vector<EvalReport> reports(na * nc * ns);
  auto at = [&](std::size_t a, std::size_t c, std::size_t s) -> EvalReport& {
    return reports[(a * nc + c) * ns + s];
  };

  std::optional<Trace> shared;
  if (std::holds_alternative<FileSpec>(cfg.trace.source)) {
    shared = make_trace(cfg.trace);
  }
  parallel_for(ns, cfg.workers, [&](std::size_t s) {
    Trace local;
    if (!shared) {
      TraceSpec spec = cfg.trace;
      spec.seed = seeds[s];
      local = make_trace(spec);
    }
    const Trace& trace = shared ? *shared : local;
    for (std::size_t a = 0; a < na; ++a) {
      for (std::size_t c = 0; c < nc; ++c) {
        at(a, c, s) = evaluate_cell(trace, cfg.algorithms[a], cfg.counters[c],
                                    cfg.k, seeds[s]);
      }
    }
  });

  MatrixResult out;
  const std::string trace_label = describe(cfg.trace);
  for (std::size_t a = 0; a < na; ++a) {
    for (std::size_t c = 0; c < nc; ++c) {
      std::vector<double> mse, recall, recirc;
      for (std::size_t s = 0; s < ns; ++s) {
        const EvalReport& r = at(a, c, s);
        ResultRow row;
        row.algorithm = cfg.algorithms[a];
        row.counters = cfg.counters[c];
        row.seed = std::to_string(seeds[s]);
        row.mse = r.mse;
        row.recall = r.recall_at_k;
        row.recirc_ratio = r.recirc_ratio;
        row.k = cfg.k;
        row.trace = trace_label;
        out.rows.push_back(row);
        mse.push_back(r.mse);
        recall.push_back(r.recall_at_k);
        recirc.push_back(r.recirc_ratio);
      }
      ResultRow sum;
      sum.algorithm = cfg.algorithms[a];
      sum.counters = cfg.counters[c];
      sum.seed = "summary";
      sum.mse_sd = summarize(mse);
      sum.recall_sd = summarize(recall);
      sum.recirc_sd = summarize(recirc);
      sum.mse = sum.mse_sd->mean;
      sum.recall = sum.recall_sd->mean;
      sum.recirc_ratio = sum.recirc_sd->mean;
      sum.k = cfg.k;
      sum.trace = trace_label;
      out.summaries.push_back(sum);
    }
  }
  return out;
}

/// Single algorithm at a single memory size: one row per seed plus a summary
/// row. Writes <out_dir>/run.csv and echoes the same bytes to `console`.
inline std::vector<ResultRow> cmd_run(const ExperimentConfig& cfg,
                                      std::ostream& console) {
  if (cfg.algorithms.size() != 1) {
    throw UsageError("run takes exactly one algorithm (use compare for more)");
  }
  if (cfg.counters.size() != 1) {
    throw UsageError("run takes exactly one memory size");
  }
  MatrixResult m = run_matrix(cfg);
  std::vector<ResultRow> rows = std::move(m.rows);
  rows.push_back(m.summaries.front());
  const std::string csv = to_csv(rows);
  write_file(std::filesystem::path(cfg.out_dir) / "run.csv", csv);
  console << csv;
  return rows;
}

/// Per-metric plot data: x = counters, one column (series) per algorithm,
/// values are the means over seeds.
inline std::string plot_data(const ExperimentConfig& cfg,
                             const std::vector<ResultRow>& summaries,
                             double ResultRow::*metric) {
  std::string s = "counters";
  for (const auto& a : cfg.algorithms) s += ',' + a.label();
  s += '\n';
  const std::size_t nc = cfg.counters.size();
  for (std::size_t c = 0; c < nc; ++c) {
    s += std::to_string(cfg.counters[c]);
    for (std::size_t a = 0; a < cfg.algorithms.size(); ++a) {
      s += ',' + format_double(summaries[a * nc + c].*metric);
    }
    s += '\n';
  }
  return s;
}

struct CompareOutput {
  std::vector<ResultRow> rows;
  std::vector<ResultRow> summaries;
  std::vector<std::filesystem::path> files;
};

/// Writes compare.csv (every cell plus summaries) and one plot-data file per
/// metric under out_dir.
inline CompareOutput cmd_compare(const ExperimentConfig& cfg,
                                 std::ostream& console) {
  MatrixResult m = run_matrix(cfg);
  CompareOutput out;
  out.rows = m.rows;
  out.summaries = m.summaries;
  const std::filesystem::path dir(cfg.out_dir);

  std::vector<ResultRow> all = m.rows;
  all.insert(all.end(), m.summaries.begin(), m.summaries.end());
  const std::string matrix_csv = to_csv(all);
  out.files.push_back(dir / "compare.csv");
  write_file(out.files.back(), matrix_csv);

  const std::pair<const char*, double ResultRow::*> metrics[] = {
      {"compare_mse.csv", &ResultRow::mse},
      {"compare_recall.csv", &ResultRow::recall},
      {"compare_recirc_ratio.csv", &ResultRow::recirc_ratio}};
  for (const auto& [file, metric] : metrics) {
    out.files.push_back(dir / file);
    write_file(out.files.back(), plot_data(cfg, m.summaries, metric));
  }
  console << to_csv(m.summaries);
  return out;
}

/// Writes the trace as CSV and prints a short ground-truth summary.
inline TraceStats cmd_generate(const TraceSpec& spec, const std::string& path,
                               std::ostream& console) {
  const Trace trace = make_trace(spec);
  save_csv(trace, path);
  const TraceStats stats = compute_stats(trace);
  console << "trace," << describe(spec) << ";seed=" << spec.seed << '\n'
          << "packets," << stats.packets() << '\n'
          << "distinct," << stats.distinct() << '\n';
  for (std::size_t k : {1, 10, 100}) {
    console << "F_" << k << ',' << stats.kth_largest(k) << '\n';
  }
  return stats;
}

struct BoundsConfig {
  std::uint64_t packets = 1000000;
  std::size_t counters = 1024;
  std::size_t ways = 2;
  std::uint64_t seeds = 20;
  std::uint64_t trials = 100000;
  std::uint64_t lemma_threshold = 10000;
  std::uint64_t base_seed = 1;
  std::string out_dir = ".";
  /// Scales every analytic value or bound; 1.0 outside failure-path tests.
  double bound_scale = 1.0;
};

inline std::vector<BoundCheckResult> run_bounds(const BoundsConfig& cfg) {
  std::vector<BoundCheckResult> results;
  results.push_back(check_geometric_sum_lemma(0.1, 100, cfg.trials,
                                              cfg.base_seed, 0.02,
                                              cfg.bound_scale));
  results.push_back(check_counter_growth_lemma(
      cfg.lemma_threshold, std::max<std::uint64_t>(1, cfg.trials / 10),
      cfg.base_seed + 1, cfg.bound_scale));
  results.push_back(check_recirculation_bound(cfg.packets, cfg.counters,
                                              cfg.seeds, cfg.base_seed,
                                              cfg.ways, 1.1, cfg.bound_scale));
  return results;
}

inline std::string bounds_csv(const std::vector<BoundCheckResult>& results) {
  std::string s =
      "check,empirical_mean,analytic_or_bound,trials,within_bound,"
      "relative_gap\n";
  for (const auto& r : results) {
    std::string name = r.name;
    std::replace(name.begin(), name.end(), ',', ';');
    s += name + ',' + format_double(r.empirical_mean) + ',' +
         format_double(r.analytic_value_or_bound) + ',' +
         std::to_string(r.trials) + ',' + (r.within_bound ? "pass" : "FAIL") +
         ',' + format_double(r.relative_gap) + '\n';
  }
  return s;
}

/// Returns true when every check passed.
inline bool cmd_bounds(const BoundsConfig& cfg, std::ostream& console) {
  const auto results = run_bounds(cfg);
  const std::string csv = bounds_csv(results);
  write_file(std::filesystem::path(cfg.out_dir) / "bounds.csv", csv);
  console << csv;
  return std::all_of(results.begin(), results.end(),
                     [](const BoundCheckResult& r) { return r.within_bound; });
}

}  // namespace hh
