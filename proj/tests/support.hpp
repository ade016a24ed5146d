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

// Shared helpers for the unit tests: seeded op sequences and small metric fixtures.

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "dynkc/lfmis_engine.hpp"
#include "dynkc/metric.hpp"
#include "dynkc/oracles.hpp"
#include "dynkc/types.hpp"

namespace dynkc::testing {

struct Op {
  UpdateKind kind;
  PointId id;
};

/// Random well-formed op sequence over fresh ids: inserts while the active set is
/// small, biased deletes once it nears `max_active`.
inline std::vector<Op> random_ops(std::mt19937_64& rng, std::size_t max_active, std::size_t length) {
  std::vector<Op> ops;
  std::vector<PointId> active;
  PointId next = 0;
  for (std::size_t step = 0; step < length; ++step) {
    const double fill = static_cast<double>(active.size()) / static_cast<double>(max_active);
    const bool do_insert =
        active.empty() || (active.size() < max_active && std::uniform_real_distribution<double>(0, 1)(rng) > fill * 0.6);
    if (do_insert) {
      ops.push_back({UpdateKind::Insert, next});
      active.push_back(next++);
    } else {
      const std::size_t i = rng() % active.size();
      ops.push_back({UpdateKind::Delete, active[i]});
      active[i] = active.back();
      active.pop_back();
    }
  }
  return ops;
}

/// Integer-grid points in the plane, keyed by id, generated on demand.
inline std::map<PointId, Payload> grid_payloads(std::mt19937_64& rng, const std::vector<Op>& ops,
                                               int side) {
  std::map<PointId, Payload> out;
  std::uniform_int_distribution<int> coord(0, side);
  for (const Op& op : ops) {
    if (op.kind != UpdateKind::Insert) continue;
    out[op.id] = DenseVector{{static_cast<double>(coord(rng)), static_cast<double>(coord(rng))}};
  }
  return out;
}

/// Symmetric pseudo-random edge relation with density `p`.
inline bool hashed_edge(std::uint64_t seed, PointId u, PointId v, double p) {
  if (u == v) return false;
  const PointId lo = std::min(u, v);
  const PointId hi = std::max(u, v);
  const std::uint64_t h = mix64(seed ^ mix64(lo * 0x9e3779b97f4a7c15ULL + hi));
  return static_cast<double>(h >> 11) * 0x1.0p-53 < p;
}

/// True iff the engine's top set equals the from-scratch LFMIS prefix of G_r
/// under the engine's own ranks.
inline bool matches_threshold_oracle(const LfmisEngine& engine, const oracle::PointSnapshot& points, double r) {
  std::map<PointId, Rank> ranks;
  for (PointId v : points.ids) ranks[v] = engine.rank_of(v);
  const auto g = oracle::threshold_graph(points, ranks, r);
  return engine.top_set() == oracle::lfmis_bruteforce(g, engine.k()).top;
}

}  // namespace dynkc::testing
