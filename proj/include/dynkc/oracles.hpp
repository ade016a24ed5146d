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

#include <cstddef>
#include <functional>
#include <map>
#include <vector>

#include "dynkc/metric.hpp"
#include "dynkc/types.hpp"

namespace dynkc::oracle {

/// Immutable vertex set with ranks and an edge predicate.
struct GraphSnapshot {
  std::vector<Rank> vertices;  // any order
  std::function<bool(PointId, PointId)> edge;
};

struct LfmisResult {
  std::vector<PointId> top;  // first min(k+1, |mis|) MIS vertices by rank
  std::vector<PointId> mis;  // the whole LFMIS by rank
  std::map<PointId, PointId> eliminator;
  std::map<PointId, PointId> leader;  // eliminators of non-MIS vertices
};

/// Greedy LFMIS from scratch. `k` controls the prefix length of `top` (k+1).
LfmisResult lfmis_bruteforce(const GraphSnapshot& snap, std::size_t k);

/// Number of vertices whose eliminator differs between two snapshots that differ
/// by exactly one vertex. A vertex present in only one snapshot counts as changed.
std::size_t eliminator_change_count(const GraphSnapshot& prev, const GraphSnapshot& next);

/// Active points with payloads, detached from any engine.
struct PointSnapshot {
  MetricConfig config;
  std::vector<PointId> ids;
  std::vector<Payload> payloads;

  std::size_t size() const { return ids.size(); }
  double distance(std::size_t i, std::size_t j) const;
};

PointSnapshot snapshot_of(const MetricSpace& space);

/// Threshold graph G_r over a point snapshot with the given ranks.
GraphSnapshot threshold_graph(const PointSnapshot& points, const std::map<PointId, Rank>& ranks,
                              double r);

struct KCentersResult {
  double cost = 0.0;
  std::vector<PointId> centers;
};

/// Exact optimum over center sets drawn from the points. Throws ConfigError when
/// n > 15 and C(n, k) > 10^6.
KCentersResult kcenters_bruteforce(const PointSnapshot& points, std::size_t k);

/// Farthest-point traversal starting from the lowest id. Throws on empty input.
KCentersResult gonzalez(const PointSnapshot& points, std::size_t k);

/// max over points of the distance to their assigned center.
double assignment_cost(const PointSnapshot& points, const std::map<PointId, PointId>& assignment);

}  // namespace dynkc::oracle
