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


#include "dynkc/lfmis_engine.hpp"

#include <algorithm>

namespace dynkc {

std::string to_string(VertexStatus status) {
  switch (status) {
    case VertexStatus::ActiveLeader: return "active-leader";
    case VertexStatus::InactiveLeader: return "inactive-leader";
    case VertexStatus::Follower: return "follower";
    case VertexStatus::Unclustered: return "unclustered";
  }
  return "unknown";
}

LfmisEngine::LfmisEngine(std::size_t k, std::unique_ptr<NeighborIndex> index, std::uint64_t seed)
    : k_(k), index_(std::move(index)), rng_(seed) {
  if (k_ == 0) throw ConfigError("engine: k must be at least 1");
  if (!index_) throw ConfigError("engine: missing neighbor index");
}

void LfmisEngine::process_update(PointId v, UpdateKind op) {
  if (op == UpdateKind::Insert) {
    insert(v);
  } else {
    erase(v);
  }
}

void LfmisEngine::insert(PointId v) { insert_with_rank(v, rng_()); }

void LfmisEngine::insert_with_rank(PointId v, std::uint64_t rank_value) {
  if (vertices_.contains(v)) throw StreamError("engine: point " + std::to_string(v) + " already active");
  ++counters_.updates;
  last_inserted_.reset();
  add_vertex(v, Rank{rank_value, v});
  insert_vertex(v);
  drain();
}

void LfmisEngine::erase(PointId v) {
  if (!vertices_.contains(v)) throw StreamError("engine: point " + std::to_string(v) + " is not active");
  ++counters_.updates;
  last_inserted_.reset();
  delete_vertex(v);
  drain();
}

void LfmisEngine::add_vertex(PointId v, Rank rank) {
  VertexRecord rec;
  rec.rank = rank;
  vertices_.emplace(v, std::move(rec));
}

void LfmisEngine::drain() {
  while (!queue_.empty()) {
    const Rank head = *queue_.begin();
    if (alg_.size() > k_ && !(head < *alg_.rbegin())) break;
    queue_.erase(queue_.begin());
    record(head.id).queued = false;
    insert_vertex(head.id);
  }
}

void LfmisEngine::insert_vertex(PointId v) {
  ++counters_.insert_calls;
  VertexRecord& rec = record(v);
  if (last_inserted_ && !(*last_inserted_ < rec.rank)) ++counters_.rank_order_violations;
  last_inserted_ = rec.rank;

  if (alg_.size() == k_ + 1 && *alg_.rbegin() < rec.rank) {
    push_queue(v);
    return;
  }
  const std::optional<PointId> top = index_->query_top(v);
  if (!top) {
    add_to_alg(v);
    if (alg_.size() == k_ + 2) {
      const PointId evicted = alg_.rbegin()->id;
      remove_from_alg(evicted);
      record(evicted).status = VertexStatus::InactiveLeader;
      push_queue(evicted);
    }
    return;
  }
  if (record(*top).rank < rec.rank) {
    release_followers(v);
    follow(v, *top);
    return;
  }
  // Every neighbor of v in ALG ranks after v: v eliminates all of them.
  for (PointId u : index_->query_all(v)) {
    release_followers(u);
    remove_from_alg(u);
    follow(u, v);
  }
  add_to_alg(v);
}

void LfmisEngine::delete_vertex(PointId v) {
  VertexRecord& rec = record(v);
  switch (rec.status) {
    case VertexStatus::Follower:
      detach(v);
      break;
    case VertexStatus::InactiveLeader:
    case VertexStatus::Unclustered:
      if (rec.queued) {
        queue_.erase(rec.rank);
        rec.queued = false;
      }
      release_followers(v);
      break;
    case VertexStatus::ActiveLeader:
      release_followers(v);
      remove_from_alg(v);
      break;
  }
  index_->forget(v);
  vertices_.erase(v);
}

void LfmisEngine::push_queue(PointId v) {
  VertexRecord& rec = record(v);
  if (rec.status != VertexStatus::InactiveLeader && !rec.followers.empty()) {
    throw std::logic_error("engine: queued non-leader " + std::to_string(v) + " has followers");
  }
  queue_.insert(rec.rank);
  rec.queued = true;
  ++counters_.queue_pushes;
}

void LfmisEngine::add_to_alg(PointId v) {
  VertexRecord& rec = record(v);
  alg_.insert(rec.rank);
  index_->insert(v, rec.rank);
  rec.status = VertexStatus::ActiveLeader;
}

void LfmisEngine::remove_from_alg(PointId v) {
  const VertexRecord& rec = record(v);
  alg_.erase(rec.rank);
  index_->erase(v);
}

void LfmisEngine::follow(PointId v, PointId leader) {
  VertexRecord& rec = record(v);
  VertexRecord& lead = record(leader);
  rec.status = VertexStatus::Follower;
  rec.leader = leader;
  rec.follower_slot = lead.followers.size();
  lead.followers.push_back(v);
  ++counters_.leader_changes;
}

void LfmisEngine::detach(PointId v) {
  VertexRecord& rec = record(v);
  VertexRecord& lead = record(*rec.leader);
  const std::size_t slot = rec.follower_slot;
  const PointId moved = lead.followers.back();
  lead.followers[slot] = moved;
  record(moved).follower_slot = slot;
  lead.followers.pop_back();
  rec.leader.reset();
}

void LfmisEngine::release_followers(PointId v) {
  std::vector<PointId> released;
  released.swap(record(v).followers);
  for (PointId f : released) {
    VertexRecord& rec = record(f);
    rec.leader.reset();
    rec.status = VertexStatus::Unclustered;
    ++counters_.leader_changes;
    push_queue(f);
  }
}

LfmisEngine::VertexRecord& LfmisEngine::record(PointId v) {
  auto it = vertices_.find(v);
  if (it == vertices_.end()) throw StreamError("engine: point " + std::to_string(v) + " is not active");
  return it->second;
}

const LfmisEngine::VertexRecord& LfmisEngine::record(PointId v) const {
  auto it = vertices_.find(v);
  if (it == vertices_.end()) throw StreamError("engine: point " + std::to_string(v) + " is not active");
  return it->second;
}

std::vector<PointId> LfmisEngine::top_set() const {
  std::vector<PointId> out;
  out.reserve(alg_.size());
  for (const Rank& r : alg_) out.push_back(r.id);
  return out;
}

bool LfmisEngine::in_top_set(PointId v) const {
  auto it = vertices_.find(v);
  return it != vertices_.end() && it->second.status == VertexStatus::ActiveLeader;
}

std::optional<PointId> LfmisEngine::leader_of(PointId v) const { return record(v).leader; }

VertexStatus LfmisEngine::status_of(PointId v) const { return record(v).status; }

Rank LfmisEngine::rank_of(PointId v) const { return record(v).rank; }

std::vector<PointId> LfmisEngine::followers_of(PointId v) const {
  std::vector<PointId> out = record(v).followers;
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<PointId> LfmisEngine::queued() const {
  std::vector<PointId> out;
  out.reserve(queue_.size());
  for (const Rank& r : queue_) out.push_back(r.id);
  return out;
}

std::vector<PointId> LfmisEngine::active_ids() const {
  std::vector<PointId> out;
  out.reserve(vertices_.size());
  for (const auto& [id, _] : vertices_) out.push_back(id);
  std::sort(out.begin(), out.end());
  return out;
}

EngineCounters LfmisEngine::counters() const {
  EngineCounters c = counters_;
  c.adjacency_queries = index_->distance_queries();
  return c;
}

std::string LfmisEngine::check_invariants() const {
  if (alg_.size() > k_ + 1) return "ALG holds " + std::to_string(alg_.size()) + " > k+1 vertices";
  if (!queue_.empty()) {
    if (alg_.size() != k_ + 1) return "queue nonempty while |ALG| <= k";
    if (*queue_.begin() < *alg_.rbegin()) return "queue head ranks before the last ALG vertex";
  }
  if (index_->size() != alg_.size()) return "neighbor index out of sync with ALG";
  for (auto a = alg_.begin(); a != alg_.end(); ++a) {
    for (auto b = std::next(a); b != alg_.end(); ++b) {
      if (index_->adjacent(a->id, b->id)) {
        return "ALG vertices " + std::to_string(a->id) + " and " + std::to_string(b->id) + " are adjacent";
      }
    }
  }
  for (const auto& [id, rec] : vertices_) {
    const std::string who = "vertex " + std::to_string(id) + ": ";
    switch (rec.status) {
      case VertexStatus::ActiveLeader:
        if (rec.leader) return who + "active leader with a leader";
        if (!alg_.contains(rec.rank)) return who + "active leader missing from ALG";
        break;
      case VertexStatus::Follower: {
        if (!rec.leader) return who + "follower without leader";
        const VertexRecord& lead = record(*rec.leader);
        if (!(lead.rank < rec.rank)) return who + "leader does not rank first";
        if (!index_->adjacent(id, *rec.leader)) return who + "leader is not a neighbor";
        if (rec.follower_slot >= lead.followers.size() || lead.followers[rec.follower_slot] != id) {
          return who + "missing from its leader's follower set";
        }
        if (!rec.followers.empty()) return who + "follower with followers";
        break;
      }
      case VertexStatus::InactiveLeader:
      case VertexStatus::Unclustered:
        if (!rec.queued) return who + to_string(rec.status) + " outside the queue";
        if (rec.leader) return who + "queued vertex with a leader";
        if (rec.status == VertexStatus::Unclustered && !rec.followers.empty()) {
          return who + "unclustered vertex with followers";
        }
        break;
    }
    for (PointId f : rec.followers) {
      auto it = vertices_.find(f);
      if (it == vertices_.end() || it->second.leader != id) return who + "stale follower entry";
    }
  }
  return {};
}

}  // namespace dynkc
