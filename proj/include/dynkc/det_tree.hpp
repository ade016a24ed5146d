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
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "dynkc/metric.hpp"
#include "dynkc/types.hpp"

namespace dynkc {

struct TreeCounters {
  std::uint64_t propagate_calls = 0;
  std::uint64_t node_visits = 0;
  std::uint64_t queue_pushes = 0;
};

/// Per-node summary for debug dumps.
struct NodeSummary {
  int level = 0;
  std::uint64_t index = 0;
  std::size_t s_size = 0;
  std::size_t u_size = 0;
  std::size_t q_size = 0;
  bool halted = false;
};

/// Deterministic single-scale structure: a binary tree over insertion order in
/// which uncovered points (pairwise more than r apart) move upward, and each
/// node keeps at most 2k+2 points. Leaves sit at level 0; node (L, x) spans
/// leaves [x 2^L, (x+1) 2^L).
class PropagationTree {
 public:
  PropagationTree(const MetricSpace& space, double r, std::size_t k);

  PropagationTree(const PropagationTree&) = delete;
  PropagationTree& operator=(const PropagationTree&) = delete;

  /// Appends a new rightmost leaf for `p` and propagates it upward.
  void insert(PointId p);
  void erase(PointId p);

  bool contains(PointId p) const { return points_.contains(p); }
  std::size_t size() const { return points_.size(); }
  std::uint64_t leaves() const { return next_leaf_; }
  int root_level() const { return root_level_; }
  std::size_t k() const { return k_; }
  double radius() const { return r_; }

  /// True iff no node is halted, i.e. no node holds k+1 or more uncovered points.
  bool is_valid() const { return overfull_ == 0; }
  /// Uncovered points of the root, sorted by id.
  std::vector<PointId> centers() const;
  /// Endpoint of the pointer chain from `p` to the root. Requires is_valid().
  PointId leader_of(PointId p) const;
  /// Number of chain hops that moved to a different point (each at most r).
  int chain_hops(PointId p) const;

  /// Checks the structural invariants at every node; returns the first
  /// violation found, or an empty string.
  std::string check_invariants() const;

  /// (level, index) -> (S, U) as point-id sets, for persistence checks across updates.
  using Membership = std::map<std::pair<int, std::uint64_t>, std::pair<std::set<PointId>, std::set<PointId>>>;
  Membership membership() const;

  std::vector<NodeSummary> dump() const;
  const TreeCounters& counters() const { return counters_; }

 private:
  struct Node {
    std::vector<PointId> point;         // by slot
    std::vector<std::uint8_t> used;     // by slot
    std::vector<std::uint8_t> uncovered;
    std::vector<std::set<std::uint32_t>> unc;  // uncovered neighbor slots
    std::vector<std::set<std::uint32_t>> cov;  // covered neighbor slots
    std::unordered_map<PointId, std::uint32_t> slot_of;
    std::deque<std::uint32_t> free_slots;
    std::uint32_t next_fresh = 0;
    std::size_t s_size = 0;
    std::size_t u_size = 0;
    std::deque<PointId> queue;
  };

  struct PointInfo {
    std::uint64_t leaf = 0;
    int top_level = -1;
    std::optional<int> queued_level;
  };

  static std::uint64_t key(int level, std::uint64_t index) {
    return (static_cast<std::uint64_t>(level) << 57) | index;
  }
  Node& node(int level, std::uint64_t index);
  const Node* find_node(int level, std::uint64_t index) const;
  std::size_t u_size(int level, std::uint64_t index) const;
  bool halted(int level, std::uint64_t index) const;

  std::uint32_t allocate_slot(Node& n);
  void set_uncovered(Node& n, std::uint32_t slot, bool value);
  void enqueue(Node& n, int level, PointId p);

  void propagate(PointId p, int level, std::uint64_t index);
  void lift_root();
  void drain(int level, std::uint64_t index);

  const MetricSpace& space_;
  double r_;
  std::size_t k_;
  std::size_t capacity_;
  std::uint64_t next_leaf_ = 0;
  int root_level_ = 0;
  std::size_t overfull_ = 0;
  std::unordered_map<std::uint64_t, Node> nodes_;
  std::unordered_map<PointId, PointInfo> points_;
  TreeCounters counters_;
  mutable std::unordered_map<PointId, PointId> leader_memo_;
};

/// PropagationTree plus the periodic rebuild that keeps its depth near
/// log(n (1 + eps)). The default rebuild runs in the background, feeding a
/// fresh tree a few active points per update; the stop-the-world variant
/// rebuilds from scratch at each checkpoint.
class DetTree {
 public:
  DetTree(const MetricSpace& space, double r, std::size_t k, double eps, bool stop_the_world = false);

  void insert(PointId p);
  void erase(PointId p);

  bool is_valid() const { return current_->is_valid(); }
  std::vector<PointId> centers() const { return current_->centers(); }
  PointId leader_of(PointId p) const { return current_->leader_of(p); }
  int root_level() const { return current_->root_level(); }
  std::size_t active_count() const { return active_.size(); }
  const std::set<PointId>& active() const { return active_; }

  std::string check_invariants() const { return current_->check_invariants(); }
  const PropagationTree& tree() const { return *current_; }

  std::uint64_t rebuilds() const { return rebuilds_; }
  /// True if the last update swapped in a rebuilt tree.
  bool rebuilt_last_update() const { return rebuilt_last_; }
  TreeCounters counters() const;

 private:
  void after_update();
  void start_window();

  const MetricSpace& space_;
  double r_;
  std::size_t k_;
  double eps_;
  bool stop_the_world_;
  std::unique_ptr<PropagationTree> current_;
  std::unique_ptr<PropagationTree> background_;
  std::deque<PointId> pending_;
  std::set<PointId> pending_set_;
  std::set<PointId> active_;
  std::uint64_t window_ = 1;
  std::uint64_t feed_ = 1;
  std::uint64_t since_rebuild_ = 0;
  std::uint64_t rebuilds_ = 0;
  bool rebuilt_last_ = false;
  TreeCounters retired_;
};

}  // namespace dynkc
