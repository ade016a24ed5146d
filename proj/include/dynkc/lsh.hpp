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
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "dynkc/metric.hpp"
#include "dynkc/neighbor_index.hpp"

namespace dynkc {

enum class LshFamilyKind : std::uint8_t { MinHash, BitSampling, PStable };

std::string to_string(LshFamilyKind kind);

/// Hash family matched to the metric: MinHash for Jaccard, bit sampling for
/// Hamming, p-stable projections for lp.
LshFamilyKind family_for(const MetricConfig& cfg);

struct LshParams {
  double p1 = 0.0;
  double p2 = 0.0;
  double rho = 0.0;
  std::size_t s = 0;  // number of tables
  std::size_t t = 0;  // components per table key
};

/// rho = ln p1 / ln p2, t = ceil(2 ln n / ln(1/p2)), s = ceil(ln(n^2/delta) n^(2 rho) / p1).
/// Throws ConfigError unless 0 < p2 < p1 <= 1, n >= 2 and 0 < delta < 1/2.
LshParams lsh_parameters(std::size_t n_bound, double delta, double p1, double p2);

/// Exact MinHash collision probability |A n B| / |A u B|. Throws on an empty union.
double minhash_collision_prob(const ElementSet& a, const ElementSet& b);

/// Closed-form collision probability of floor((a.x + b)/w) at distance u for
/// Gaussian (p = 2) or Cauchy (p = 1) projections.
double pstable_collision_prob(double p, double u, double w);

struct LshBuildInfo {
  LshFamilyKind family = LshFamilyKind::MinHash;
  double r = 0.0;
  double c = 1.0;
  double width = 0.0;  // p-stable bucket width, 0 otherwise
  LshParams params;
  std::size_t n_bound = 0;
  std::uint64_t seed = 0;
};

struct LshOptions {
  double c = 2.0;
  double delta = 0.1;
  /// p-stable bucket width as a multiple of r.
  double width_factor = 4.0;
  /// Calibration pairs per distance when p1/p2 are measured empirically.
  std::size_t calibration_draws = 4000;
};

/// Collision probabilities for a family at scale (r, cr). Closed form for MinHash
/// and bit sampling, measured on seeded calibration pairs for p-stable.
std::pair<double, double> family_probabilities(const MetricConfig& cfg, double r, const LshOptions& opt,
                                               std::uint64_t seed);

/// s * t component hash functions of one family, drawn from a seed.
class HashFunctions {
 public:
  HashFunctions(const MetricConfig& cfg, LshFamilyKind family, std::size_t count, double width,
                std::uint64_t seed);

  std::size_t size() const { return count_; }
  std::uint64_t component(const Payload& x, std::size_t j) const;

 private:
  LshFamilyKind family_;
  std::size_t count_;
  std::size_t dim_;
  double width_;
  std::vector<std::uint64_t> salts_;      // MinHash
  std::vector<std::uint32_t> coords_;     // bit sampling
  std::vector<double> proj_;              // p-stable, count x dim
  std::vector<double> offsets_;           // p-stable
};

/// NeighborIndex over the sandwiched graph: u ~ v iff their t-tuple keys agree in
/// at least one of s tables and d(u, v) <= c r. Buckets are rank-ordered sets.
class BucketIndex final : public NeighborIndex {
 public:
  BucketIndex(const MetricSpace& space, double r, std::size_t n_bound, const LshOptions& opt,
              std::uint64_t seed);

  void insert(PointId v, Rank rank) override;
  void erase(PointId v) override;
  bool contains(PointId v) const override { return ranks_.contains(v); }
  std::size_t size() const override { return ranks_.size(); }
  std::optional<PointId> query_top(PointId v) override;
  std::vector<PointId> query_all(PointId v) override;
  bool adjacent(PointId u, PointId v) const override;
  void forget(PointId v) override { keys_.erase(v); }
  std::uint64_t distance_queries() const override { return queries_; }

  /// Table keys of an active point (64-bit fingerprints of the t-tuples).
  const std::vector<std::uint64_t>& bucket_keys(PointId v) const;
  /// True if u and v share a key in some table, regardless of distance.
  bool collide(PointId u, PointId v) const;

  const LshBuildInfo& info() const { return info_; }
  std::uint64_t wasted_collisions() const { return wasted_; }
  double radius() const { return r_; }
  double far_radius() const { return c_ * r_; }

 private:
  const MetricSpace& space_;
  double r_;
  double c_;
  LshBuildInfo info_;
  HashFunctions functions_;
  std::vector<std::unordered_map<std::uint64_t, std::set<Rank>>> tables_;
  std::unordered_map<PointId, Rank> ranks_;
  mutable std::unordered_map<PointId, std::vector<std::uint64_t>> keys_;
  std::uint64_t queries_ = 0;
  std::uint64_t wasted_ = 0;
};

}  // namespace dynkc
