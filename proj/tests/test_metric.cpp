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

#include "dynkc/metric.hpp"

using namespace dynkc;
using Catch::Approx;

TEST_CASE("built-in distances on small payloads") {
  const auto l2 = MetricConfig::lp(2, 2.0, 1.0, 10.0);
  CHECK(raw_distance(DenseVector{{0, 0}}, DenseVector{{3, 4}}, l2) == 5.0);

  const auto ham = MetricConfig::hamming(4, 1.0, 4.0);
  CHECK(raw_distance(BitVector{{0, 1, 0, 1}}, BitVector{{0, 1, 1, 0}}, ham) == 2.0);

  const auto jac = MetricConfig::jaccard(3, 0.1, 1.0);
  CHECK(raw_distance(ElementSet{{0, 1}}, ElementSet{{1, 2}}, jac) == Approx(2.0 / 3.0));
  CHECK(raw_distance(ElementSet{{}}, ElementSet{{}}, jac) == 0.0);
  CHECK(raw_distance(ElementSet{{0}}, ElementSet{{}}, jac) == 1.0);

  const auto l1 = MetricConfig::lp(2, 1.0, 1.0, 10.0);
  CHECK(raw_distance(DenseVector{{0, 0}}, DenseVector{{3, 4}}, l1) == 7.0);
  const auto l3 = MetricConfig::lp(2, 3.0, 1.0, 10.0);
  CHECK(raw_distance(DenseVector{{0, 0}}, DenseVector{{1, 1}}, l3) == Approx(std::cbrt(2.0)));
}

TEST_CASE("payload mismatches are configuration errors") {
  const auto l2 = MetricConfig::lp(2, 2.0, 1.0, 10.0);
  CHECK_THROWS_AS(raw_distance(DenseVector{{0, 0}}, DenseVector{{3}}, l2), ConfigError);
  CHECK_THROWS_AS(raw_distance(DenseVector{{0, 0}}, BitVector{{0, 1}}, l2), ConfigError);
  const auto jac = MetricConfig::jaccard(3, 0.1, 1.0);
  CHECK_THROWS_AS(raw_distance(ElementSet{{0, 5}}, ElementSet{{1}}, jac), ConfigError);
  CHECK_THROWS_AS(MetricConfig::lp(2, 2.0, 2.0, 1.0), ConfigError);
  CHECK_THROWS_AS(MetricConfig::lp(2, 0.5, 1.0, 2.0), ConfigError);
}

TEST_CASE("scale grid") {
  CHECK(scale_grid(1.0, 1.0, 0.5) == std::vector<double>{1.0});
  CHECK(scale_grid(1.0, 10.0, 1.0) ==
        std::vector<double>{1, 1.5, 2.25, 3.375, 5.0625, 7.59375, 11.390625});
  CHECK(scale_grid(2.0, 8.0, 2.0) == std::vector<double>{2, 4, 8});
  CHECK_THROWS_AS(scale_grid(1.0, 2.0, 0.0), ConfigError);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> lo(0.01, 5.0);
  std::uniform_real_distribution<double> span(1.0, 1000.0);
  std::uniform_real_distribution<double> eps(0.05, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double r_min = lo(rng);
    const double r_max = r_min * span(rng);
    const double e = eps(rng);
    const auto grid = scale_grid(r_min, r_max, e);
    REQUIRE(grid.front() == r_min);
    REQUIRE(grid.back() >= r_max);
    if (grid.size() > 1) REQUIRE(grid[grid.size() - 2] < r_max);
    for (std::size_t i = 1; i < grid.size(); ++i) REQUIRE(grid[i] == grid[i - 1] * (1.0 + e / 2.0));
    const double expected = std::ceil(std::log(r_max / r_min) / std::log(1.0 + e / 2.0)) + 1.0;
    REQUIRE(std::abs(static_cast<double>(grid.size()) - expected) <= 1.0);
  }
}

namespace {

Payload random_payload(const MetricConfig& cfg, std::mt19937_64& rng) {
  switch (cfg.kind) {
    case MetricKind::Lp: {
      std::uniform_real_distribution<double> u(-10, 10);
      DenseVector v;
      for (std::size_t i = 0; i < cfg.dim; ++i) v.values.push_back(u(rng));
      return v;
    }
    case MetricKind::Hamming: {
      BitVector v;
      for (std::size_t i = 0; i < cfg.dim; ++i) v.bits.push_back(static_cast<std::uint8_t>(rng() & 1));
      return v;
    }
    case MetricKind::Jaccard: {
      std::vector<std::uint32_t> e;
      for (std::uint32_t i = 0; i < cfg.dim; ++i)
        if (rng() % 3 == 0) e.push_back(i);
      return ElementSet{e};
    }
    case MetricKind::Matrix: break;
  }
  return MatrixRow{rng() % cfg.matrix->size()};
}

}  // namespace

TEST_CASE("metric axioms on random triples") {
  std::vector<MetricConfig> configs{
      MetricConfig::lp(3, 2.0, 0.1, 100.0), MetricConfig::lp(3, 1.0, 0.1, 100.0),
      MetricConfig::lp(3, 1.5, 0.1, 100.0), MetricConfig::hamming(16, 1.0, 16.0),
      MetricConfig::jaccard(12, 0.01, 1.0)};
  std::mt19937_64 rng(11);
  for (const auto& cfg : configs) {
    for (int trial = 0; trial < 10000; ++trial) {
      const Payload a = random_payload(cfg, rng);
      const Payload b = random_payload(cfg, rng);
      const Payload c = random_payload(cfg, rng);
      const double ab = raw_distance(a, b, cfg);
      REQUIRE(ab == raw_distance(b, a, cfg));
      REQUIRE(raw_distance(a, a, cfg) == 0.0);
      REQUIRE(ab >= 0.0);
      REQUIRE(raw_distance(a, c, cfg) <= ab + raw_distance(b, c, cfg) + 1e-9);
    }
  }
}

TEST_CASE("query counter tracks every counted distance") {
  MetricSpace space(MetricConfig::lp(1, 2.0, 1.0, 100.0));
  for (PointId i = 0; i < 10; ++i) space.add(i, DenseVector{{static_cast<double>(i)}});
  space.counter().reset();
  std::uint64_t issued = 0;
  for (PointId i = 0; i < 10; ++i) {
    for (PointId j = 0; j < i; ++j) {
      space.distance(i, j);
      ++issued;
    }
    space.counter().snapshot();
  }
  space.distance_uncounted(0, 9);
  CHECK(space.queries() == issued);
  CHECK(space.counter().snapshots().size() == 10);
  CHECK(std::is_sorted(space.counter().snapshots().begin(), space.counter().snapshots().end()));
}

TEST_CASE("metric space rejects double inserts and unknown deletes") {
  MetricSpace space(MetricConfig::lp(1, 2.0, 1.0, 100.0));
  space.add(1, DenseVector{{0.0}});
  CHECK_THROWS_AS(space.add(1, DenseVector{{1.0}}), StreamError);
  CHECK_THROWS_AS(space.remove(2), StreamError);
  CHECK_THROWS_AS(space.add(3, DenseVector{{1.0, 2.0}}), ConfigError);
  space.remove(1);
  CHECK(space.size() == 0);
}

TEST_CASE("distance matrix validation") {
  CHECK_NOTHROW(DistanceMatrix(2, {0, 1, 1, 0}).validate(true));
  CHECK_THROWS_AS(DistanceMatrix(2, {0, 1, 2, 0}).validate(false), ConfigError);
  CHECK_THROWS_AS(DistanceMatrix(2, {1, 1, 1, 0}).validate(false), ConfigError);
  // 0-1 and 1-2 are close but 0-2 is far: fine unless strict
  const DistanceMatrix bad(3, {0, 1, 5, 1, 0, 1, 5, 1, 0});
  CHECK_NOTHROW(bad.validate(false));
  CHECK_THROWS_AS(bad.validate(true), ConfigError);
  CHECK_THROWS_AS(DistanceMatrix(2, {0, 1, 1}), ConfigError);
}
