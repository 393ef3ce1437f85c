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

// hh_sim command line: generate | run | compare | bounds.
//
// Exit codes: 0 success, 1 bound or assertion failure, 2 usage error,
// 3 I/O error.

#pragma once

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hh/experiment.hpp"
#include "json.hpp"

namespace hh::cli {

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kUsage = 2,
  kIo = 3,
};

inline constexpr const char* kOutDirEnv = "HH_OUT_DIR";

/// Fills `cfg` from a JSON config file. Keys: trace {kind, alpha, universe,
/// length | path}, algorithms [spec...], counters [n...], k, seed, seeds,
/// out_dir, workers.
inline void load_config_file(const std::string& path, ExperimentConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw IoError(path + ": cannot open config file");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError(path + ": invalid JSON: " + e.what());
  }
  try {
    if (j.contains("trace")) {
      const auto& t = j.at("trace");
      const std::string kind = t.value("kind", "zipf");
      if (kind == "zipf") {
        ZipfSpec z;
        z.alpha = t.value("alpha", z.alpha);
        z.universe = t.value("universe", z.universe);
        z.length = t.value("length", z.length);
        cfg.trace.source = z;
      } else if (kind == "file") {
        cfg.trace.source = FileSpec{t.at("path").get<std::string>()};
      } else {
        throw UsageError(path + ": trace.kind must be zipf or file");
      }
    }
    if (j.contains("algorithms")) {
      cfg.algorithms.clear();
      for (const auto& a : j.at("algorithms")) {
        cfg.algorithms.push_back(parse_algo_spec(a.get<std::string>()));
      }
    }
    if (j.contains("counters")) {
      cfg.counters = j.at("counters").get<std::vector<std::size_t>>();
    }
    cfg.k = j.value("k", cfg.k);
    cfg.base_seed = j.value("seed", cfg.base_seed);
    cfg.seeds = j.value("seeds", cfg.seeds);
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    cfg.workers = j.value("workers", cfg.workers);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(path + ": bad config value: " + e.what());
  }
}

/// Parses argv and dispatches. All output goes to `out`/`err`.
inline int run_cli(int argc, const char* const* argv, std::ostream& out,
                   std::ostream& err) {
  CLI::App app{"Heavy-hitter measurement toolkit: PRECISION and baselines"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  std::string out_dir;
  if (const char* env = std::getenv(kOutDirEnv)) out_dir = env;
  if (out_dir.empty()) out_dir = ".";
  app.add_option("--seed", seed, "Global base seed");
  app.add_option("--out-dir", out_dir,
                 std::string("Output directory (default $") + kOutDirEnv +
                     " or .)");

  // generate
  auto* gen = app.add_subcommand("generate", "Write a synthetic Zipf trace");
  ZipfSpec gen_spec;
  std::string gen_out;
  gen->add_option("--alpha", gen_spec.alpha, "Zipf skew (>= 0)");
  gen->add_option("--universe", gen_spec.universe, "Number of distinct ranks");
  gen->add_option("--length", gen_spec.length, "Packets");
  gen->add_option("--out", gen_out, "Trace CSV path")->required();

  // run / compare share their options.
  struct MatrixFlags {
    std::string config;
    std::vector<std::string> algs;
    std::vector<std::size_t> counters;
    std::size_t k = 0;
    std::uint64_t seeds = 0;
    std::string trace_file;
    double alpha = 0;
    std::uint64_t universe = 0;
    std::uint64_t length = 0;
    unsigned workers = 0;
    CLI::Option* o_alpha = nullptr;
    CLI::Option* o_universe = nullptr;
    CLI::Option* o_length = nullptr;
    CLI::Option* o_k = nullptr;
    CLI::Option* o_seeds = nullptr;
    CLI::Option* o_workers = nullptr;
  };
  auto add_matrix_flags = [](CLI::App* sub, MatrixFlags& f) {
    sub->add_option("--config", f.config, "JSON config file (flags override)");
    sub->add_option("--alg", f.algs,
                    "Algorithm spec name[:d=..][:mode=..][:delay=..][:init=..]"
                    "[:bits=..]; names: " +
                        valid_algorithm_list());
    sub->add_option("--counters", f.counters, "Total counters (memory)")
        ->delimiter(',');
    f.o_k = sub->add_option("--k", f.k, "Top-k size for recall");
    f.o_seeds = sub->add_option("--seeds", f.seeds, "Number of seeds");
    sub->add_option("--trace", f.trace_file, "Trace CSV (instead of Zipf)");
    f.o_alpha = sub->add_option("--alpha", f.alpha, "Zipf skew");
    f.o_universe = sub->add_option("--universe", f.universe, "Zipf universe");
    f.o_length = sub->add_option("--length", f.length, "Zipf packets");
    f.o_workers = sub->add_option("--workers", f.workers, "Worker threads");
  };
  auto* run = app.add_subcommand("run", "Evaluate one algorithm over seeds");
  MatrixFlags run_flags;
  add_matrix_flags(run, run_flags);
  auto* cmp = app.add_subcommand("compare",
                                 "Algorithms x memory sizes x seeds matrix");
  MatrixFlags cmp_flags;
  add_matrix_flags(cmp, cmp_flags);

  // bounds
  auto* bnd = app.add_subcommand("bounds", "Monte-Carlo recirculation checks");
  BoundsConfig bounds;
  bnd->add_option("--packets", bounds.packets, "Packets for the recirculation-bound check");
  bnd->add_option("--counters", bounds.counters, "Counters C");
  bnd->add_option("--ways", bounds.ways, "Ways d");
  bnd->add_option("--seeds", bounds.seeds, "Seeds for the recirculation-bound check");
  bnd->add_option("--trials", bounds.trials, "Monte-Carlo trials for lemmas");
  bnd->add_option("--lemma-t", bounds.lemma_threshold,
                  "Threshold T for the counter-growth lemma");
  bnd->add_option("--bound-scale", bounds.bound_scale)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kUsage;
  }

  auto build_matrix = [&](const MatrixFlags& f) {
    ExperimentConfig cfg;
    cfg.out_dir = out_dir;
    if (!f.config.empty()) load_config_file(f.config, cfg);
    if (app.get_option("--out-dir")->count() > 0) cfg.out_dir = out_dir;
    if (app.get_option("--seed")->count() > 0) cfg.base_seed = seed;
    if (!f.algs.empty()) {
      cfg.algorithms.clear();
      for (const auto& a : f.algs) cfg.algorithms.push_back(parse_algo_spec(a));
    }
    if (!f.counters.empty()) cfg.counters = f.counters;
    if (f.o_k->count() > 0) cfg.k = f.k;
    if (f.o_seeds->count() > 0) cfg.seeds = f.seeds;
    if (f.o_workers->count() > 0) cfg.workers = f.workers;
    if (!f.trace_file.empty()) {
      cfg.trace.source = FileSpec{f.trace_file};
    } else if (f.o_alpha->count() + f.o_universe->count() +
                   f.o_length->count() > 0) {
      ZipfSpec z = std::holds_alternative<ZipfSpec>(cfg.trace.source)
                       ? std::get<ZipfSpec>(cfg.trace.source)
                       : ZipfSpec{};
      if (f.o_alpha->count() > 0) z.alpha = f.alpha;
      if (f.o_universe->count() > 0) z.universe = f.universe;
      if (f.o_length->count() > 0) z.length = f.length;
      cfg.trace.source = z;
    }
    cfg.validate();
    return cfg;
  };

  try {
    if (gen->parsed()) {
      TraceSpec spec;
      spec.source = gen_spec;
      spec.seed = seed;
      if (!(gen_spec.alpha >= 0.0)) throw UsageError("alpha must be >= 0");
      if (gen_spec.universe == 0) throw UsageError("universe must be >= 1");
      if (gen_spec.length == 0) throw UsageError("length must be >= 1");
      cmd_generate(spec, gen_out, out);
      return kOk;
    }
    if (run->parsed()) {
      cmd_run(build_matrix(run_flags), out);
      return kOk;
    }
    if (cmp->parsed()) {
      cmd_compare(build_matrix(cmp_flags), out);
      return kOk;
    }
    if (bnd->parsed()) {
      bounds.base_seed = seed;
      bounds.out_dir = out_dir;
      if (bounds.counters == 0 || bounds.ways == 0 ||
          bounds.counters % bounds.ways != 0) {
        throw UsageError("bounds: --counters must be a positive multiple of "
                         "--ways");
      }
      if (bounds.packets == 0 || bounds.seeds == 0 || bounds.trials == 0 ||
          bounds.lemma_threshold == 0) {
        throw UsageError("bounds: sizes must be >= 1");
      }
      return cmd_bounds(bounds, out) ? kOk : kCheckFailed;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kCheckFailed;
  }
  return kUsage;
}

}  // namespace hh::cli
