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

// Feeds a Zipf trace through PRECISION and HashPipe with the same memory and
// prints the OnArrival error and top-32 recall of each.

#include <cstdio>

#include "hh/hh.hpp"

int main() {
  const hh::Trace trace = hh::generate_zipf({1.0, 100000, 1000000}, 7);

  hh::PrecisionConfig cfg;
  cfg.ways = 2;
  cfg.entries_per_way = 2048;
  cfg.prob_mode = hh::ProbMode::PowerOfTwo;
  cfg.seed = 7;
  hh::Precision precision(cfg);
  hh::HashPipe hashpipe(2, 2048, 7);

  const auto p = hh::run_on_arrival(precision, trace, {32, 0});
  const auto h = hh::run_on_arrival(hashpipe, trace, {32, 0});

  std::printf("%-10s %14s %10s %10s\n", "algorithm", "mse", "recall@32",
              "recirc");
  std::printf("%-10s %14.2f %10.3f %10.5f\n", "precision", p.mse,
              p.recall_at_k, p.recirc_ratio);
  std::printf("%-10s %14.2f %10.3f %10.5f\n", "hashpipe", h.mse,
              h.recall_at_k, h.recirc_ratio);
  std::printf("stages for d=2: %zu stacked, %zu naive\n",
              hh::stage_count(2, true), hh::stage_count(2, false));
  return 0;
}
