/*
 * Copyright 2026 The dynkc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dynkc/ladder.hpp"
#include "dynkc/stream.hpp"

namespace dynkc {

inline constexpr int kReportSchema = 1;

struct RunOptions {
  LadderOptions ladder;
  /// Oracle equivalence and invariant checks after every step, plus the
  /// brute-force bound while at most 12 points are active.
  bool verify = false;
  /// Adds wall-clock fields, which makes reports differ between runs.
  bool timing = false;
  /// LSH only: report the chosen scale for every k up to the active count.
  bool k_all = false;
};

struct StepRecord {
  std::uint64_t step = 0;
  UpdateKind kind = UpdateKind::Insert;
  PointId id = 0;
  std::size_t active = 0;
  std::optional<double> scale;
  std::size_t centers = 0;
  double cost_upper = 0.0;
  double opt_lower = 0.0;
  bool fallback = false;
  std::uint64_t queries = 0;
  std::uint64_t leader_changes = 0;
  std::uint64_t restarts = 0;
  std::uint64_t wasted_collisions = 0;
  std::optional<double> cost_true;
  std::optional<double> opt;
  /// k -> chosen scale, for k = 1..active (k_all mode).
  std::vector<double> k_all;
};

struct RunReport {
  std::string engine;
  std::size_t k = 0;
  double eps = 0.0;
  std::uint64_t seed = 0;
  std::string metric_header;
  std::vector<double> scales;
  std::vector<StepRecord> steps;

  std::uint64_t updates = 0;
  std::uint64_t total_queries = 0;
  double queries_per_update = 0.0;
  double leader_changes_per_update = 0.0;
  std::uint64_t restarts = 0;
  std::uint64_t wasted_collisions = 0;
  std::size_t size_rebuilds = 0;
  std::size_t checkpoint_rebuilds = 0;
  std::optional<double> wall_seconds;

  bool verified = false;
  std::uint64_t checks = 0;
  std::uint64_t violations = 0;
  std::string first_violation;
  /// LSH approximation misses (probabilistic bound), counted but not violations.
  std::uint64_t bound_misses = 0;
  std::vector<nlohmann::json> lsh_builds;
};

/// Replays the stream. Under verify, stops at the first violation (recorded in
/// the report) and throws ConfigError if more than 50 points become active.
RunReport run_stream(const Stream& stream, const RunOptions& opt);

nlohmann::json to_json(const RunReport& report);

struct BenchConfig {
  std::vector<std::string> engines{"lfmis"};
  std::vector<std::size_t> ns{256};
  std::vector<std::size_t> ks{8};
  std::vector<std::uint64_t> seeds{1};
  GeneratorKind generator = GeneratorKind::UniformChurn;
  MetricKind metric = MetricKind::Lp;
  std::size_t dim = 2;
  /// Stream length as a multiple of n.
  double length_factor = 4.0;
  double eps = 0.5;
  double lsh_c = 2.0;
  unsigned jobs = 0;  // 0: hardware concurrency
};

/// Plain `key: v1, v2, ...` lines; '#' starts a comment.
BenchConfig parse_bench_config(const std::string& text);

struct BenchRow {
  std::string engine;
  std::size_t n = 0;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::size_t m = 0;
  double queries_per_update = 0.0;
  double leader_changes_per_update = 0.0;
  std::uint64_t restarts = 0;
  std::uint64_t wasted_collisions = 0;
  double wall_ms = 0.0;
};

std::vector<BenchRow> run_bench(const BenchConfig& cfg);
std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace dynkc
