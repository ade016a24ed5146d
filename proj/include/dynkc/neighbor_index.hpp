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
#include <functional>
#include <optional>
#include <set>
#include <unordered_map>
#include <vector>

#include "dynkc/metric.hpp"
#include "dynkc/types.hpp"

namespace dynkc {

/// A maintained vertex set L with rank-ordered neighbor queries against it.
/// The neighbor relation is the graph the engine runs on.
class NeighborIndex {
 public:
  virtual ~NeighborIndex() = default;

  virtual void insert(PointId v, Rank rank) = 0;
  virtual void erase(PointId v) = 0;
  virtual bool contains(PointId v) const = 0;
  virtual std::size_t size() const = 0;

  /// Lowest-rank neighbor of `v` in L, if any.
  virtual std::optional<PointId> query_top(PointId v) = 0;
  /// All neighbors of `v` in L, strictly increasing by rank.
  virtual std::vector<PointId> query_all(PointId v) = 0;

  /// Edge predicate of the served graph. Not counted as engine work.
  virtual bool adjacent(PointId u, PointId v) const = 0;

  /// `v` left the underlying graph; drop any per-vertex caches.
  virtual void forget(PointId /*v*/) {}

  /// Distance evaluations issued on behalf of queries.
  virtual std::uint64_t distance_queries() const = 0;
};

/// Exact threshold graph over a general metric: scans L in rank order with
/// lazily computed distances, stopping at the first hit for query_top.
class ThresholdScanIndex final : public NeighborIndex {
 public:
  ThresholdScanIndex(const MetricSpace& space, double radius);

  void insert(PointId v, Rank rank) override;
  void erase(PointId v) override;
  bool contains(PointId v) const override { return ranks_.contains(v); }
  std::size_t size() const override { return members_.size(); }
  std::optional<PointId> query_top(PointId v) override;
  std::vector<PointId> query_all(PointId v) override;
  bool adjacent(PointId u, PointId v) const override;
  std::uint64_t distance_queries() const override { return queries_; }

  double radius() const { return radius_; }

 private:
  const MetricSpace& space_;
  double radius_;
  std::set<Rank> members_;
  std::unordered_map<PointId, Rank> ranks_;
  std::uint64_t queries_ = 0;
};

/// Graph given by an explicit edge predicate. Each predicate call counts as one query.
class PredicateIndex final : public NeighborIndex {
 public:
  using EdgeFn = std::function<bool(PointId, PointId)>;
  explicit PredicateIndex(EdgeFn edge);

  void insert(PointId v, Rank rank) override;
  void erase(PointId v) override;
  bool contains(PointId v) const override { return ranks_.contains(v); }
  std::size_t size() const override { return members_.size(); }
  std::optional<PointId> query_top(PointId v) override;
  std::vector<PointId> query_all(PointId v) override;
  bool adjacent(PointId u, PointId v) const override { return edge_(u, v); }
  std::uint64_t distance_queries() const override { return queries_; }

 private:
  EdgeFn edge_;
  std::set<Rank> members_;
  std::unordered_map<PointId, Rank> ranks_;
  std::uint64_t queries_ = 0;
};

}  // namespace dynkc
