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

#include <random>

#include "dynkc/lfmis_engine.hpp"
#include "dynkc/lsh.hpp"
#include "dynkc/oracles.hpp"
#include "support.hpp"

using namespace dynkc;
using Catch::Approx;

TEST_CASE("parameter formulas") {
  const auto p = lsh_parameters(100, 0.1, 0.9, 0.5);
  CHECK(p.rho == Approx(0.1520).margin(5e-5));
  CHECK(p.t == 14);
  CHECK(p.s == 52);

  const auto tiny = lsh_parameters(2, 0.1, 0.9, 0.5);
  CHECK(tiny.t >= 2);
  CHECK(tiny.s >= 1);

  CHECK_THROWS_AS(lsh_parameters(100, 0.1, 0.5, 0.5), ConfigError);
  CHECK_THROWS_AS(lsh_parameters(100, 0.1, 0.9, 1.0), ConfigError);
  CHECK_THROWS_AS(lsh_parameters(1, 0.1, 0.9, 0.5), ConfigError);
  CHECK_THROWS_AS(lsh_parameters(100, 0.6, 0.9, 0.5), ConfigError);
}

TEST_CASE("minhash collision probability") {
  CHECK(minhash_collision_prob(ElementSet{{0, 1}}, ElementSet{{1, 2}}) == Approx(1.0 / 3.0));
  CHECK(minhash_collision_prob(ElementSet{{4, 5}}, ElementSet{{4, 5}}) == 1.0);
  CHECK(minhash_collision_prob(ElementSet{{1}}, ElementSet{{2}}) == 0.0);
  CHECK_THROWS_AS(minhash_collision_prob(ElementSet{{}}, ElementSet{{}}), ConfigError);
}

TEST_CASE("minhash empirical frequency matches the Jaccard similarity") {
  const auto cfg = MetricConfig::jaccard(30, 0.01, 1.0);
  std::mt19937_64 rng(17);
  HashFunctions fns(cfg, LshFamilyKind::MinHash, 10000, 0.0, 99);
  for (int pair = 0; pair < 20; ++pair) {
    std::vector<std::uint32_t> a;
    std::vector<std::uint32_t> b;
    for (std::uint32_t e = 0; e < 30; ++e) {
      if (rng() % 2) a.push_back(e);
      if (rng() % 2) b.push_back(e);
    }
    a.push_back(0);
    b.push_back(0);
    const auto A = ElementSet::from_unsorted(a);
    const auto B = ElementSet::from_unsorted(b);
    std::size_t hits = 0;
    for (std::size_t j = 0; j < fns.size(); ++j) hits += fns.component(A, j) == fns.component(B, j);
    const double freq = static_cast<double>(hits) / static_cast<double>(fns.size());
    REQUIRE(std::abs(freq - minhash_collision_prob(A, B)) <= 0.03);
  }
}

TEST_CASE("disjoint sets never share a minhash component") {
  const auto cfg = MetricConfig::jaccard(20, 0.01, 1.0);
  HashFunctions fns(cfg, LshFamilyKind::MinHash, 2000, 0.0, 5);
  const ElementSet a{{0, 1, 2, 3}};
  const ElementSet b{{4, 5, 6}};
  for (std::size_t j = 0; j < fns.size(); ++j) REQUIRE(fns.component(a, j) != fns.component(b, j));
}

TEST_CASE("p-stable calibration agrees with the closed forms") {
  LshOptions opt;
  opt.c = 2.0;
  opt.calibration_draws = 20000;
  for (double p : {1.0, 2.0}) {
    const auto cfg = MetricConfig::lp(3, p, 0.1, 100.0);
    const double r = 1.5;
    const auto [p1, p2] = family_probabilities(cfg, r, opt, 3);
    const double w = opt.width_factor * r;
    CHECK(p1 == Approx(pstable_collision_prob(p, r, w)).margin(0.02));
    CHECK(p2 == Approx(pstable_collision_prob(p, opt.c * r, w)).margin(0.02));
    CHECK(p1 > p2);
  }
  // Datar et al. closed form at w/u = 4 for the Gaussian case
  CHECK(pstable_collision_prob(2.0, 1.0, 4.0) == Approx(0.8005).margin(1e-3));
}

TEST_CASE("bit sampling and minhash probabilities are closed form") {
  LshOptions opt;
  opt.c = 2.0;
  const auto [h1, h2] = family_probabilities(MetricConfig::hamming(16, 1.0, 16.0), 2.0, opt, 0);
  CHECK(h1 == Approx(1.0 - 2.0 / 16.0));
  CHECK(h2 == Approx(1.0 - 4.0 / 16.0));
  const auto [j1, j2] = family_probabilities(MetricConfig::jaccard(10, 0.01, 1.0), 0.2, opt, 0);
  CHECK(j1 == Approx(0.8));
  CHECK(j2 == Approx(0.6));
  CHECK_THROWS_AS(family_probabilities(MetricConfig::jaccard(10, 0.01, 1.0), 0.5, opt, 0), ConfigError);
}

namespace {

MetricSpace& jaccard_space(std::unique_ptr<MetricSpace>& holder, std::mt19937_64& rng, std::size_t n,
                           std::uint32_t universe) {
  holder = std::make_unique<MetricSpace>(MetricConfig::jaccard(universe, 0.01, 1.0));
  for (PointId i = 0; i < n; ++i) {
    std::vector<std::uint32_t> e;
    for (std::uint32_t x = 0; x < universe; ++x)
      if (rng() % 4 == 0) e.push_back(x);
    holder->add(i, ElementSet::from_unsorted(e));
  }
  return *holder;
}

}  // namespace

TEST_CASE("bucket index basics") {
  std::unique_ptr<MetricSpace> holder;
  std::mt19937_64 rng(3);
  auto& space = jaccard_space(holder, rng, 10, 24);
  space.add(100, std::get<ElementSet>(space.payload(0)));  // duplicate of point 0
  LshOptions opt;
  BucketIndex index(space, 0.2, 16, opt, 42);

  CHECK_FALSE(index.query_top(0).has_value());
  CHECK(index.query_all(0).empty());

  std::map<PointId, Rank> ranks{{0, Rank{5, 0}}};
  index.insert(0, ranks[0]);
  CHECK(index.collide(0, 100));
  CHECK(index.bucket_keys(0) == index.bucket_keys(100));
  CHECK(index.query_top(100) == PointId{0});
  CHECK(index.query_all(100) == std::vector<PointId>{0});

  // insert everything, then query_all is rank ordered and filtered at c r
  for (PointId v = 1; v < 10; ++v) {
    ranks[v] = Rank{100 - v, v};
    index.insert(v, ranks[v]);
  }
  for (PointId v : {PointId{0}, PointId{3}, PointId{100}}) {
    const auto all = index.query_all(v);
    for (std::size_t i = 1; i < all.size(); ++i) CHECK(ranks[all[i - 1]] < ranks[all[i]]);
    for (PointId u : all) {
      CHECK(space.distance_uncounted(u, v) <= index.far_radius());
      CHECK(index.collide(u, v));
    }
    // every in-range colliding member is reported
    for (PointId u = 0; u < 10; ++u) {
      if (u == v) continue;
      const bool expect = index.collide(u, v) && space.distance_uncounted(u, v) <= index.far_radius();
      CHECK(expect == (std::find(all.begin(), all.end(), u) != all.end()));
    }
  }

  // erase everything; all buckets are released
  for (PointId v = 0; v < 10; ++v) index.erase(v);
  CHECK(index.size() == 0);
  CHECK_FALSE(index.query_top(100).has_value());
  CHECK_THROWS(index.erase(3));
}

TEST_CASE("far colliding candidates are skipped and counted") {
  // Hamming at r = 1, c = 2 on 8 bits: the two points are 4 apart, beyond c r.
  MetricSpace space(MetricConfig::hamming(8, 1.0, 8.0));
  space.add(0, BitVector{{0, 0, 0, 0, 0, 0, 0, 0}});
  space.add(1, BitVector{{0, 0, 0, 0, 1, 1, 1, 1}});
  LshOptions opt;
  opt.c = 2.0;
  // Search for a draw in which they still share a bucket.
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    BucketIndex index(space, 1.0, 2, opt, seed);
    if (!index.collide(0, 1)) continue;
    index.insert(1, Rank{1, 1});
    CHECK_FALSE(index.query_top(0).has_value());
    CHECK(index.wasted_collisions() == 1);
    CHECK_FALSE(index.adjacent(0, 1));
    return;
  }
  FAIL("no seed produced a collision");
}

TEST_CASE("engine on the bucket index equals the LFMIS of the realized graph") {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    std::mt19937_64 rng(seed);
    auto space = std::make_unique<MetricSpace>(MetricConfig::jaccard(16, 0.01, 1.0));
    const auto ops = testing::random_ops(rng, 20, 120);
    std::map<PointId, Payload> payloads;
    for (const auto& op : ops) {
      if (op.kind != UpdateKind::Insert) continue;
      std::vector<std::uint32_t> e;
      for (std::uint32_t x = 0; x < 16; ++x)
        if (rng() % 3 == 0) e.push_back(x);
      payloads[op.id] = ElementSet::from_unsorted(e);
    }
    LshOptions opt;
    opt.c = 2.0;
    auto owned = std::make_unique<BucketIndex>(*space, 0.15, 32, opt, seed * 7);
    BucketIndex* index = owned.get();
    LfmisEngine engine(1 + seed % 3, std::move(owned), seed);
    for (const auto& op : ops) {
      if (op.kind == UpdateKind::Insert) {
        space->add(op.id, payloads.at(op.id));
        engine.insert(op.id);
      } else {
        engine.erase(op.id);
        space->remove(op.id);
      }
      oracle::GraphSnapshot snap;
      for (PointId v : engine.active_ids()) snap.vertices.push_back(engine.rank_of(v));
      // realized graph from the drawn keys, evaluated independently of the index queries
      snap.edge = [&](PointId u, PointId v) {
        const auto& a = index->bucket_keys(u);
        const auto& b = index->bucket_keys(v);
        bool shared = false;
        for (std::size_t i = 0; i < a.size(); ++i) shared = shared || a[i] == b[i];
        return shared && space->distance_uncounted(u, v) <= 2.0 * 0.15;
      };
      const auto expect = oracle::lfmis_bruteforce(snap, engine.k());
      REQUIRE(engine.top_set() == expect.top);
      REQUIRE(engine.check_invariants().empty());
      REQUIRE(engine.counters().rank_order_violations == 0);
    }
  }
}
