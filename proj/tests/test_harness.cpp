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


#include <catch_amalgamated.hpp>

#include <cmath>

#include "dynkc/harness.hpp"

using namespace dynkc;

namespace {

Stream small_stream(std::uint64_t seed, MetricKind metric = MetricKind::Lp, std::size_t n = 10) {
  StreamSpec spec;
  spec.n = n;
  spec.m = 4 * n;
  spec.seed = seed;
  spec.metric = metric;
  spec.dim = metric == MetricKind::Lp ? 2 : 12;
  spec.side = 40;
  return generate(spec);
}

RunOptions opts(EngineKind e, std::size_t k) {
  RunOptions o;
  o.ladder.engine = e;
  o.ladder.k = k;
  o.ladder.eps = 0.5;
  o.verify = true;
  return o;
}

}  // namespace

TEST_CASE("verification passes on small streams for every engine") {
  for (auto e : {EngineKind::Lfmis, EngineKind::Det, EngineKind::Lsh}) {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      const auto rep = run_stream(small_stream(seed), opts(e, 1 + seed % 3));
      INFO(to_string(e) << " seed " << seed << ": " << rep.first_violation);
      CHECK(rep.violations == 0);
      CHECK(rep.checks == rep.updates);
      for (const auto& s : rep.steps)
        if (s.active > 0) {
          REQUIRE(s.cost_true.has_value());
          REQUIRE(s.opt.has_value());
        }
    }
  }
}

TEST_CASE("aggregates are reductions of the step records") {
  const auto rep = run_stream(small_stream(2, MetricKind::Lp, 20), opts(EngineKind::Lfmis, 3));
  std::uint64_t q = 0;
  std::uint64_t lc = 0;
  for (const auto& s : rep.steps) {
    q += s.queries;
    lc += s.leader_changes;
  }
  CHECK(rep.total_queries == q);
  CHECK(rep.queries_per_update == Catch::Approx(static_cast<double>(q) / rep.updates));
  CHECK(rep.leader_changes_per_update == Catch::Approx(static_cast<double>(lc) / rep.updates));
  const auto j = to_json(rep);
  CHECK(j["schema"] == kReportSchema);
  CHECK(j["aggregate"]["total_queries"] == q);
  CHECK(j["steps"].size() == rep.updates);
  CHECK_FALSE(j["aggregate"].contains("wall_seconds"));
}

TEST_CASE("deterministic engine reports are byte-identical") {
  const auto s = small_stream(9, MetricKind::Lp, 30);
  auto o = opts(EngineKind::Det, 3);
  o.verify = false;
  CHECK(to_json(run_stream(s, o)).dump() == to_json(run_stream(s, o)).dump());
  auto r = opts(EngineKind::Lfmis, 3);
  r.verify = false;
  CHECK(to_json(run_stream(s, r)).dump() == to_json(run_stream(s, r)).dump());
}

TEST_CASE("k-all reports a scale for every k") {
  auto o = opts(EngineKind::Lsh, 2);
  o.k_all = true;
  const auto rep = run_stream(small_stream(4), o);
  for (const auto& s : rep.steps) {
    if (s.active == 0) continue;
    REQUIRE(s.k_all.size() == s.active);
    // the chosen scale does not grow with k
    for (std::size_t k = 1; k < s.k_all.size(); ++k)
      if (!std::isnan(s.k_all[k - 1])) REQUIRE(s.k_all[k] <= s.k_all[k - 1]);
    if (!s.fallback && s.k_all.size() >= 2) REQUIRE(s.k_all[1] == *s.scale);
  }
  CHECK_FALSE(rep.lsh_builds.empty());
  CHECK(to_json(rep)["lsh_builds"][0].contains("rho"));
}

TEST_CASE("verification refuses large active sets") {
  StreamSpec spec;
  spec.n = 60;
  spec.m = 70;
  CHECK_THROWS_AS(run_stream(generate(spec), opts(EngineKind::Lfmis, 2)), ConfigError);
}

TEST_CASE("malformed streams are rejected before any engine runs") {
  Stream s = small_stream(1);
  s.ops.push_back({UpdateKind::Delete, 999, {}});
  CHECK_THROWS_AS(run_stream(s, opts(EngineKind::Lfmis, 1)), StreamError);
}

TEST_CASE("bench configuration and CSV") {
  const auto cfg = parse_bench_config(
      "# sweep\nengine: lfmis, det\nn: 16, 32\nk: 2\nseeds: 1\nlength: 2\njobs: 2\n");
  CHECK(cfg.engines == std::vector<std::string>{"lfmis", "det"});
  CHECK(cfg.ns == std::vector<std::size_t>{16, 32});
  CHECK(cfg.length_factor == 2.0);
  const auto rows = run_bench(cfg);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].engine == "lfmis");
  CHECK(rows[0].m == 32);
  for (const auto& r : rows) CHECK(r.queries_per_update > 0.0);
  const auto csv = bench_csv(rows);
  CHECK(csv.rfind("# schema 1\nengine,n,k,seed,m,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);

  CHECK_THROWS_AS(parse_bench_config("colour: red\n"), ConfigError);
  CHECK_THROWS_AS(parse_bench_config("engine: quantum\n"), ConfigError);
  CHECK_THROWS_AS(parse_bench_config("n 5\n"), ConfigError);
}
