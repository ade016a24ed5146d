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
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "dynkc/neighbor_index.hpp"
#include "dynkc/types.hpp"

namespace dynkc {

enum class VertexStatus : std::uint8_t { ActiveLeader, InactiveLeader, Follower, Unclustered };

std::string to_string(VertexStatus status);

struct EngineCounters {
  std::uint64_t updates = 0;
  std::uint64_t leader_changes = 0;
  std::uint64_t queue_pushes = 0;
  std::uint64_t adjacency_queries = 0;
  std::uint64_t insert_calls = 0;
  /// Successive Insert calls inside one update whose ranks did not increase.
  /// Always zero for a correct engine; kept as instrumentation.
  std::uint64_t rank_order_violations = 0;
};

/// Maintains the first k+1 vertices of the lexicographically-first maximal
/// independent set of the graph served by a NeighborIndex, under a random ranking.
class LfmisEngine {
 public:
  LfmisEngine(std::size_t k, std::unique_ptr<NeighborIndex> index, std::uint64_t seed);

  LfmisEngine(const LfmisEngine&) = delete;
  LfmisEngine& operator=(const LfmisEngine&) = delete;

  /// Inserts with a rank drawn from the engine's generator.
  void insert(PointId v);
  /// Inserts with an explicit rank value; tests use this to pin the ranking.
  void insert_with_rank(PointId v, std::uint64_t rank_value);
  void erase(PointId v);
  void process_update(PointId v, UpdateKind op);

  std::size_t k() const { return k_; }
  std::size_t active_count() const { return vertices_.size(); }
  bool contains(PointId v) const { return vertices_.contains(v); }

  /// ALG in increasing rank order.
  std::vector<PointId> top_set() const;
  std::size_t top_size() const { return alg_.size(); }
  bool in_top_set(PointId v) const;
  /// Empty for leaders and queued vertices. Throws StreamError for unknown ids.
  std::optional<PointId> leader_of(PointId v) const;
  VertexStatus status_of(PointId v) const;
  Rank rank_of(PointId v) const;
  /// Followers of `v`, sorted by id.
  std::vector<PointId> followers_of(PointId v) const;
  /// Queue contents in rank order.
  std::vector<PointId> queued() const;
  /// Sorted ids of all active vertices.
  std::vector<PointId> active_ids() const;

  bool is_valid_solution() const { return alg_.size() <= k_; }

  EngineCounters counters() const;
  const NeighborIndex& index() const { return *index_; }
  NeighborIndex& index() { return *index_; }

  /// Checks the structural invariants between updates; returns a description of
  /// the first violation, or an empty string.
  std::string check_invariants() const;

 private:
  struct VertexRecord {
    Rank rank;
    VertexStatus status = VertexStatus::Unclustered;
    std::optional<PointId> leader;
    std::vector<PointId> followers;
    std::size_t follower_slot = 0;  // position inside the leader's follower vector
    bool queued = false;
  };

  void add_vertex(PointId v, Rank rank);
  void insert_vertex(PointId v);
  void delete_vertex(PointId v);
  void drain();

  void push_queue(PointId v);
  void add_to_alg(PointId v);
  void remove_from_alg(PointId v);
  void follow(PointId v, PointId leader);
  void detach(PointId v);
  void release_followers(PointId v);

  VertexRecord& record(PointId v);
  const VertexRecord& record(PointId v) const;

  std::size_t k_;
  std::unique_ptr<NeighborIndex> index_;
  std::mt19937_64 rng_;
  std::set<Rank> alg_;
  std::set<Rank> queue_;
  std::unordered_map<PointId, VertexRecord> vertices_;
  EngineCounters counters_;
  std::optional<Rank> last_inserted_;
};

}  // namespace dynkc
