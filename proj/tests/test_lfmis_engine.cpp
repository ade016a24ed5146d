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

#include <map>

#include "dynkc/lfmis_engine.hpp"
#include "dynkc/oracles.hpp"
#include "support.hpp"

using namespace dynkc;

namespace {

constexpr PointId a = 0, b = 1, c = 2, d = 3;

// Points a=0, b=1, c=2, d=10 on a line at radius 1: only consecutive letters a-b-c are adjacent.
struct LineFixture {
  MetricSpace space{MetricConfig::lp(1, 2.0, 1.0, 10.0)};
  LfmisEngine engine;

  explicit LineFixture(std::size_t k)
      : engine(k, std::make_unique<ThresholdScanIndex>(space, 1.0), 1) {
    space.add(a, DenseVector{{0.0}});
    space.add(b, DenseVector{{1.0}});
    space.add(c, DenseVector{{2.0}});
    space.add(d, DenseVector{{10.0}});
  }
};

// rank values standing in for 0.1, 0.2, 0.3, 0.9
const std::map<PointId, std::uint64_t> kRank{{a, 100}, {b, 200}, {c, 300}, {d, 900}};

}  // namespace

TEST_CASE("construction") {
  MetricSpace space(MetricConfig::lp(1, 2.0, 1.0, 10.0));
  LfmisEngine engine(1, std::make_unique<ThresholdScanIndex>(space, 1.0), 0);
  CHECK(engine.top_set().empty());
  CHECK(engine.is_valid_solution());
  CHECK_THROWS_AS(LfmisEngine(0, std::make_unique<ThresholdScanIndex>(space, 1.0), 0), ConfigError);
}

TEST_CASE("path a-b-c with k = 1") {
  LineFixture f(1);
  f.engine.insert_with_rank(a, kRank.at(a));
  CHECK(f.engine.top_set() == std::vector<PointId>{a});
  CHECK_FALSE(f.engine.leader_of(a).has_value());
  f.engine.insert_with_rank(b, kRank.at(b));
  f.engine.insert_with_rank(c, kRank.at(c));
  CHECK(f.engine.top_set() == std::vector<PointId>{a, c});
  CHECK(f.engine.leader_of(b) == a);
  CHECK_FALSE(f.engine.is_valid_solution());

  f.engine.erase(a);
  CHECK(f.engine.top_set() == std::vector<PointId>{b});
  CHECK(f.engine.leader_of(c) == b);
  CHECK(f.engine.queued().empty());
  CHECK(f.engine.is_valid_solution());
  CHECK(f.engine.check_invariants().empty());
}

TEST_CASE("path a-b-c with k = 2 keeps the whole LFMIS") {
  LineFixture f(2);
  for (PointId v : {a, b, c}) f.engine.insert_with_rank(v, kRank.at(v));
  CHECK(f.engine.top_set() == std::vector<PointId>{a, c});
  CHECK(f.engine.leader_of(b) == a);
  CHECK(f.engine.is_valid_solution());
}

TEST_CASE("insert cases") {
  SECTION("lower-ranked neighbor takes over the set") {
    LineFixture f(1);
    f.engine.insert_with_rank(c, kRank.at(c));
    f.engine.insert_with_rank(b, kRank.at(b));
    CHECK(f.engine.top_set() == std::vector<PointId>{b});
    CHECK(f.engine.leader_of(c) == b);
    CHECK(f.engine.status_of(c) == VertexStatus::Follower);
  }
  SECTION("higher-ranked neighbor follows") {
    LineFixture f(1);
    f.engine.insert_with_rank(a, kRank.at(a));
    f.engine.insert_with_rank(b, kRank.at(b));
    CHECK(f.engine.top_set() == std::vector<PointId>{a});
    CHECK(f.engine.leader_of(b) == a);
  }
  SECTION("full set and late rank goes to the queue") {
    LineFixture f(1);
    for (PointId v : {a, b, c}) f.engine.insert_with_rank(v, kRank.at(v));
    const auto pushes = f.engine.counters().queue_pushes;
    f.engine.insert_with_rank(d, kRank.at(d));
    CHECK(f.engine.top_set() == std::vector<PointId>{a, c});
    CHECK(f.engine.queued() == std::vector<PointId>{d});
    CHECK(f.engine.status_of(d) == VertexStatus::Unclustered);
    CHECK(f.engine.counters().queue_pushes == pushes + 1);
  }
}

TEST_CASE("eviction keeps followers pointed at the inactive leader") {
  // k = 2; ALG = {a, c} with f following c; two isolated low-rank inserts push
  // ALG to k+2 and evict c.
  MetricSpace space(MetricConfig::lp(1, 2.0, 1.0, 100.0));
  LfmisEngine engine(2, std::make_unique<ThresholdScanIndex>(space, 1.0), 1);
  space.add(0, DenseVector{{0.0}});   // a 0.1
  space.add(2, DenseVector{{5.0}});   // c 0.3
  space.add(3, DenseVector{{6.0}});   // f 0.4
  space.add(4, DenseVector{{50.0}});  // e 0.05
  space.add(5, DenseVector{{80.0}});  // g 0.06
  engine.insert_with_rank(0, 100);
  engine.insert_with_rank(2, 300);
  engine.insert_with_rank(3, 400);
  REQUIRE(engine.leader_of(3) == 2);
  engine.insert_with_rank(4, 50);
  REQUIRE(engine.top_set() == std::vector<PointId>{4, 0, 2});
  engine.insert_with_rank(5, 60);
  CHECK(engine.top_set() == std::vector<PointId>{4, 5, 0});
  CHECK(engine.status_of(2) == VertexStatus::InactiveLeader);
  CHECK(engine.leader_of(3) == 2);
  CHECK(engine.queued() == std::vector<PointId>{2});
  CHECK(engine.check_invariants().empty());

  // deleting the queued inactive leader releases its follower into the queue
  engine.erase(2);
  CHECK(engine.queued() == std::vector<PointId>{3});
  CHECK_FALSE(engine.leader_of(3).has_value());
  CHECK(engine.check_invariants().empty());

  // freeing a slot in ALG re-inserts the queue head
  engine.erase(4);
  CHECK(engine.top_set() == std::vector<PointId>{5, 0, 3});
  CHECK(engine.queued().empty());
}

TEST_CASE("delete cases") {
  SECTION("follower removal touches nothing else") {
    LineFixture f(2);
    for (PointId v : {a, b, c}) f.engine.insert_with_rank(v, kRank.at(v));
    f.engine.erase(b);
    CHECK(f.engine.top_set() == std::vector<PointId>{a, c});
    CHECK(f.engine.followers_of(a).empty());
  }
  SECTION("sole leader with two followers") {
    // b at 1 has followers a' at 0 and c at 2 when it ranks first
    MetricSpace space(MetricConfig::lp(1, 2.0, 1.0, 10.0));
    LfmisEngine engine(1, std::make_unique<ThresholdScanIndex>(space, 1.0), 1);
    space.add(0, DenseVector{{0.0}});
    space.add(1, DenseVector{{1.0}});
    space.add(2, DenseVector{{2.0}});
    engine.insert_with_rank(1, 100);
    engine.insert_with_rank(0, 200);
    engine.insert_with_rank(2, 300);
    REQUIRE(engine.followers_of(1) == std::vector<PointId>{0, 2});
    engine.erase(1);
    CHECK(engine.top_set() == std::vector<PointId>{0, 2});
    CHECK(engine.counters().rank_order_violations == 0);
  }
  SECTION("unknown ids") {
    LineFixture f(1);
    CHECK_THROWS_AS(f.engine.erase(a), StreamError);
    f.engine.insert_with_rank(a, 1);
    CHECK_THROWS_AS(f.engine.insert_with_rank(a, 1), StreamError);
    CHECK_THROWS_AS(f.engine.leader_of(b), StreamError);
  }
}

namespace {

oracle::GraphSnapshot snapshot(const LfmisEngine& engine, std::function<bool(PointId, PointId)> edge) {
  oracle::GraphSnapshot snap;
  for (PointId v : engine.active_ids()) snap.vertices.push_back(engine.rank_of(v));
  snap.edge = std::move(edge);
  return snap;
}

void check_against_oracle(const LfmisEngine& engine, const std::function<bool(PointId, PointId)>& edge) {
  const auto expect = oracle::lfmis_bruteforce(snapshot(engine, edge), engine.k());
  REQUIRE(engine.top_set() == expect.top);
  REQUIRE(engine.is_valid_solution() == (expect.top.size() <= engine.k()));
  REQUIRE(engine.check_invariants().empty());
  if (engine.is_valid_solution()) {
    for (PointId v : engine.active_ids()) {
      if (engine.in_top_set(v)) continue;
      const auto l = engine.leader_of(v);
      REQUIRE(l.has_value());
      REQUIRE(engine.in_top_set(*l));
      REQUIRE(edge(v, *l));
    }
  }
  REQUIRE(engine.counters().rank_order_violations == 0);
}

}  // namespace

TEST_CASE("random graphs match the from-scratch LFMIS after every update") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    std::mt19937_64 rng(seed);
    const std::size_t k = 1 + seed % 5;
    const double density = 0.05 + 0.1 * static_cast<double>(seed % 6);
    auto edge = [seed, density](PointId u, PointId v) { return testing::hashed_edge(seed, u, v, density); };
    LfmisEngine engine(k, std::make_unique<PredicateIndex>(edge), seed);
    for (const auto& op : testing::random_ops(rng, 30, 250)) {
      engine.process_update(op.id, op.kind);
      check_against_oracle(engine, edge);
    }
  }
}

TEST_CASE("threshold graphs on grid points match the from-scratch LFMIS") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    std::mt19937_64 rng(seed * 31);
    const auto ops = testing::random_ops(rng, 25, 200);
    const auto payloads = testing::grid_payloads(rng, ops, 12);
    MetricSpace space(MetricConfig::lp(2, 2.0, 0.5, 20.0));
    const double r = 2.0 + static_cast<double>(seed % 4);
    LfmisEngine engine(1 + seed % 4, std::make_unique<ThresholdScanIndex>(space, r), seed);
    auto edge = [&space, r](PointId u, PointId v) { return space.distance_uncounted(u, v) <= r; };
    for (const auto& op : ops) {
      if (op.kind == UpdateKind::Insert) {
        space.add(op.id, payloads.at(op.id));
        engine.insert(op.id);
      } else {
        engine.erase(op.id);
        space.remove(op.id);
      }
      check_against_oracle(engine, edge);
    }
  }
}

TEST_CASE("counters are monotone and leader changes are counted per reassignment") {
  LineFixture f(1);
  f.engine.insert_with_rank(c, kRank.at(c));
  f.engine.insert_with_rank(b, kRank.at(b));  // c: unassigned -> b
  CHECK(f.engine.counters().leader_changes == 1);
  f.engine.erase(b);  // c released, re-inserted as leader
  CHECK(f.engine.counters().leader_changes == 2);
  CHECK(f.engine.counters().insert_calls == 3);
  CHECK(f.engine.counters().updates == 3);
}
