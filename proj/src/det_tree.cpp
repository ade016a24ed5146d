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


#include "dynkc/det_tree.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dynkc {

PropagationTree::PropagationTree(const MetricSpace& space, double r, std::size_t k)
    : space_(space), r_(r), k_(k), capacity_(2 * k + 2) {
  if (k == 0) throw ConfigError("k must be at least 1");
  if (!(r >= 0.0)) throw ConfigError("radius must be non-negative");
}

PropagationTree::Node& PropagationTree::node(int level, std::uint64_t index) {
  auto [it, fresh] = nodes_.try_emplace(key(level, index));
  if (fresh) {
    Node& n = it->second;
    n.point.assign(capacity_, 0);
    n.used.assign(capacity_, 0);
    n.uncovered.assign(capacity_, 0);
    n.unc.resize(capacity_);
    n.cov.resize(capacity_);
  }
  return it->second;
}

const PropagationTree::Node* PropagationTree::find_node(int level, std::uint64_t index) const {
  const auto it = nodes_.find(key(level, index));
  return it == nodes_.end() ? nullptr : &it->second;
}

std::size_t PropagationTree::u_size(int level, std::uint64_t index) const {
  const Node* n = find_node(level, index);
  return n ? n->u_size : 0;
}

bool PropagationTree::halted(int level, std::uint64_t index) const {
  if (u_size(level, index) >= k_ + 1) return true;
  if (level == 0) return false;
  return u_size(level - 1, 2 * index) >= k_ + 1 || u_size(level - 1, 2 * index + 1) >= k_ + 1;
}

std::uint32_t PropagationTree::allocate_slot(Node& n) {
  if (!n.free_slots.empty()) {
    const auto s = n.free_slots.front();
    n.free_slots.pop_front();
    return s;
  }
  if (n.next_fresh >= capacity_) throw std::logic_error("node holds more than 2k+2 points");
  return n.next_fresh++;
}

void PropagationTree::set_uncovered(Node& n, std::uint32_t slot, bool value) {
  if (static_cast<bool>(n.uncovered[slot]) == value) return;
  n.uncovered[slot] = value;
  if (value) {
    if (++n.u_size == k_ + 1) ++overfull_;
  } else {
    if (n.u_size-- == k_ + 1) --overfull_;
  }
}

void PropagationTree::enqueue(Node& n, int level, PointId p) {
  n.queue.push_back(p);
  points_.at(p).queued_level = level;
  ++counters_.queue_pushes;
}

void PropagationTree::propagate(PointId p, int level, std::uint64_t index) {
  ++counters_.propagate_calls;
  for (;;) {
    ++counters_.node_visits;
    Node& n = node(level, index);
    if (n.u_size >= k_ + 1) {
      enqueue(n, level, p);
      return;
    }
    const auto slot = allocate_slot(n);
    n.point[slot] = p;
    n.used[slot] = 1;
    n.slot_of[p] = slot;
    ++n.s_size;
    points_.at(p).top_level = level;

    auto& mine_unc = n.unc[slot];
    auto& mine_cov = n.cov[slot];
    mine_unc.clear();
    mine_cov.clear();
    for (std::uint32_t j = 0; j < n.next_fresh; ++j) {
      if (j == slot || !n.used[j]) continue;
      if (space_.distance(p, n.point[j]) > r_) continue;
      (n.uncovered[j] ? mine_unc : mine_cov).insert(j);
    }
    if (mine_unc.empty()) {
      set_uncovered(n, slot, true);
      for (auto j : mine_cov) n.unc[j].insert(slot);
      if (level == root_level_) return;
      ++level;
      index >>= 1;
      continue;
    }
    for (auto j : mine_unc) n.cov[j].insert(slot);
    for (auto j : mine_cov) n.cov[j].insert(slot);
    return;
  }
}

void PropagationTree::lift_root() {
  const int old_level = root_level_;
  ++root_level_;
  const Node* old_root = find_node(old_level, 0);
  if (!old_root) return;
  std::vector<PointId> lifted;
  for (std::uint32_t j = 0; j < old_root->next_fresh; ++j)
    if (old_root->used[j] && old_root->uncovered[j]) lifted.push_back(old_root->point[j]);
  Node& top = node(root_level_, 0);
  for (std::size_t i = 0; i < lifted.size(); ++i) {
    if (i < k_ + 1)
      propagate(lifted[i], root_level_, 0);
    else
      enqueue(top, root_level_, lifted[i]);
  }
}

void PropagationTree::insert(PointId p) {
  if (points_.contains(p)) throw StreamError("point " + std::to_string(p) + " already in the tree");
  leader_memo_.clear();
  const std::uint64_t leaf = next_leaf_++;
  while ((std::uint64_t{1} << root_level_) < next_leaf_) lift_root();
  points_[p] = PointInfo{leaf, -1, std::nullopt};
  propagate(p, 0, leaf);
}

void PropagationTree::drain(int level, std::uint64_t index) {
  Node* n = nodes_.contains(key(level, index)) ? &nodes_.at(key(level, index)) : nullptr;
  if (!n) return;
  while (!n->queue.empty() && !halted(level, index)) {
    const PointId z = n->queue.front();
    n->queue.pop_front();
    points_.at(z).queued_level.reset();
    propagate(z, level, index);
  }
}

void PropagationTree::erase(PointId q) {
  const auto it = points_.find(q);
  if (it == points_.end()) throw StreamError("point " + std::to_string(q) + " not in the tree");
  leader_memo_.clear();
  const PointInfo info = it->second;
  const std::uint64_t leaf = info.leaf;

  if (info.queued_level) {
    Node& qn = node(*info.queued_level, leaf >> *info.queued_level);
    qn.queue.erase(std::find(qn.queue.begin(), qn.queue.end(), q));
  }

  for (int level = info.top_level; level >= 0; --level) {
    ++counters_.node_visits;
    const std::uint64_t index = leaf >> level;
    Node& n = node(level, index);
    const std::uint32_t slot = n.slot_of.at(q);
    if (n.uncovered[slot]) {
      set_uncovered(n, slot, false);
      const std::vector<std::uint32_t> neighbors(n.cov[slot].begin(), n.cov[slot].end());
      for (auto j : neighbors) {
        n.unc[j].erase(slot);
        if (!n.unc[j].empty()) continue;
        set_uncovered(n, j, true);
        for (auto z : n.cov[j]) {
          n.cov[z].erase(j);
          n.unc[z].insert(j);
        }
        if (level == root_level_) continue;
        const PointId p = n.point[j];
        if (n.u_size <= k_ + 1)
          propagate(p, level + 1, index >> 1);
        else
          enqueue(node(level + 1, index >> 1), level + 1, p);
      }
    } else {
      for (auto j : n.unc[slot]) n.cov[j].erase(slot);
      for (auto j : n.cov[slot]) n.cov[j].erase(slot);
    }
    n.unc[slot].clear();
    n.cov[slot].clear();
    n.used[slot] = 0;
    n.slot_of.erase(q);
    --n.s_size;
    n.free_slots.push_back(slot);
  }
  points_.erase(q);

  for (int level = 0; level <= root_level_; ++level) {
    const std::uint64_t index = leaf >> level;
    if (level > 0) {
      drain(level - 1, 2 * index);
      drain(level - 1, 2 * index + 1);
    }
    drain(level, index);
  }
}

std::vector<PointId> PropagationTree::centers() const {
  std::vector<PointId> out;
  if (const Node* root = find_node(root_level_, 0)) {
    for (std::uint32_t j = 0; j < root->next_fresh; ++j)
      if (root->used[j] && root->uncovered[j]) out.push_back(root->point[j]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

PointId PropagationTree::leader_of(PointId p) const {
  if (!is_valid()) throw std::logic_error("leader_of on a tree with a halted node");
  const auto info = points_.find(p);
  if (info == points_.end()) throw StreamError("point " + std::to_string(p) + " not in the tree");
  if (const auto m = leader_memo_.find(p); m != leader_memo_.end()) return m->second;
  PointId cur = p;
  for (int level = 0; level <= root_level_; ++level) {
    const Node* n = find_node(level, info->second.leaf >> level);
    if (!n || !n->slot_of.contains(cur)) throw std::logic_error("pointer chain left the tree");
    const auto s = n->slot_of.at(cur);
    if (!n->uncovered[s]) cur = n->point[*n->unc[s].begin()];
  }
  leader_memo_[p] = cur;
  return cur;
}

int PropagationTree::chain_hops(PointId p) const {
  const auto info = points_.find(p);
  if (info == points_.end()) throw StreamError("point " + std::to_string(p) + " not in the tree");
  PointId cur = p;
  int hops = 0;
  for (int level = 0; level <= root_level_; ++level) {
    const Node* n = find_node(level, info->second.leaf >> level);
    if (!n || !n->slot_of.contains(cur)) throw std::logic_error("pointer chain left the tree");
    const auto s = n->slot_of.at(cur);
    if (!n->uncovered[s]) {
      cur = n->point[*n->unc[s].begin()];
      ++hops;
    }
  }
  return hops;
}

std::string PropagationTree::check_invariants() const {
  std::size_t overfull = 0;
  for (const auto& [k, n] : nodes_) {
    const int level = static_cast<int>(k >> 57);
    const std::uint64_t index = k & ((std::uint64_t{1} << 57) - 1);
    const auto where = [&] { return "node (" + std::to_string(level) + ", " + std::to_string(index) + "): "; };
    if (level > root_level_ || (level == root_level_ && index != 0)) {
      if (n.s_size || !n.queue.empty()) return where() + "populated node outside the tree";
      continue;
    }
    if (n.next_fresh > capacity_) return where() + "identifier beyond 2k+2";
    std::size_t s = 0;
    std::size_t u = 0;
    for (std::uint32_t i = 0; i < n.next_fresh; ++i) {
      if (!n.used[i]) {
        if (!n.unc[i].empty() || !n.cov[i].empty()) return where() + "free slot with neighbors";
        continue;
      }
      ++s;
      u += n.uncovered[i];
      const PointId pi = n.point[i];
      if (!points_.contains(pi)) return where() + "inactive point " + std::to_string(pi);
      if (n.slot_of.at(pi) != i) return where() + "slot map mismatch";
      if ((points_.at(pi).leaf >> level) != index) return where() + "point outside its subtree";
      for (std::uint32_t j = 0; j < n.next_fresh; ++j) {
        if (j == i || !n.used[j]) continue;
        const bool close = space_.distance_uncounted(pi, n.point[j]) <= r_;
        const bool in_unc = n.unc[i].contains(j);
        const bool in_cov = n.cov[i].contains(j);
        if (close != (in_unc || in_cov)) return where() + "neighbor list disagrees with distances";
        if (close && (n.uncovered[j] ? !in_unc : !in_cov)) return where() + "neighbor filed under the wrong status";
        if (close && n.uncovered[i] && n.uncovered[j]) return where() + "two uncovered points within r";
      }
      if (!n.uncovered[i] && n.unc[i].empty()) return where() + "covered point with no uncovered neighbor";
    }
    if (s != n.s_size || s != n.slot_of.size()) return where() + "S size mismatch";
    if (u != n.u_size) return where() + "U size mismatch";
    if (s > capacity_) return where() + "S larger than 2k+2";
    if (u >= k_ + 1) ++overfull;
    if (!n.queue.empty() && !halted(level, index)) return where() + "non-empty queue at a node that is not halted";
    for (PointId z : n.queue) {
      const auto& info = points_.at(z);
      if (info.queued_level != level || (info.leaf >> level) != index) return where() + "queue entry mismatch";
      if (n.slot_of.contains(z)) return where() + "queued point also in S";
      if (info.top_level != level - 1) return where() + "queued point not at the child level";
    }
  }
  if (overfull != overfull_) return "overfull counter mismatch";
  for (const auto& [p, info] : points_) {
    for (int level = 0; level <= info.top_level; ++level) {
      const Node* n = find_node(level, info.leaf >> level);
      if (!n || !n->slot_of.contains(p)) return "point " + std::to_string(p) + " missing below its top level";
    }
  }
  if (is_valid()) {
    // with every queue empty, S at an inner node is the union of its children's U
    for (const auto& [k, n] : nodes_) {
      const int level = static_cast<int>(k >> 57);
      const std::uint64_t index = k & ((std::uint64_t{1} << 57) - 1);
      if (level == 0 || level > root_level_) continue;
      std::set<PointId> expect;
      for (std::uint64_t c : {2 * index, 2 * index + 1}) {
        if (const Node* ch = find_node(level - 1, c))
          for (std::uint32_t j = 0; j < ch->next_fresh; ++j)
            if (ch->used[j] && ch->uncovered[j]) expect.insert(ch->point[j]);
      }
      std::set<PointId> have;
      for (const auto& [p, slot] : n.slot_of) have.insert(p);
      if (have != expect) return "S differs from the children's U at a valid tree";
    }
  }
  return {};
}

PropagationTree::Membership PropagationTree::membership() const {
  Membership out;
  for (const auto& [k, n] : nodes_) {
    if (n.s_size == 0) continue;
    auto& [s, u] = out[{static_cast<int>(k >> 57), k & ((std::uint64_t{1} << 57) - 1)}];
    for (const auto& [p, slot] : n.slot_of) {
      s.insert(p);
      if (n.uncovered[slot]) u.insert(p);
    }
  }
  return out;
}

std::vector<NodeSummary> PropagationTree::dump() const {
  std::vector<NodeSummary> out;
  for (const auto& [k, n] : nodes_) {
    if (n.s_size == 0 && n.queue.empty()) continue;
    NodeSummary s;
    s.level = static_cast<int>(k >> 57);
    s.index = k & ((std::uint64_t{1} << 57) - 1);
    s.s_size = n.s_size;
    s.u_size = n.u_size;
    s.q_size = n.queue.size();
    s.halted = halted(s.level, s.index);
    out.push_back(s);
  }
  std::sort(out.begin(), out.end(), [](const NodeSummary& a, const NodeSummary& b) {
    return a.level != b.level ? a.level > b.level : a.index < b.index;
  });
  return out;
}

DetTree::DetTree(const MetricSpace& space, double r, std::size_t k, double eps, bool stop_the_world)
    : space_(space), r_(r), k_(k), eps_(eps), stop_the_world_(stop_the_world),
      current_(std::make_unique<PropagationTree>(space, r, k)) {
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  start_window();
}

void DetTree::start_window() {
  const double n = static_cast<double>(active_.size());
  const double span = stop_the_world_ ? eps_ * n : eps_ * n / 2.0;
  window_ = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::floor(span)));
  since_rebuild_ = 0;
  if (stop_the_world_) return;
  background_ = std::make_unique<PropagationTree>(space_, r_, k_);
  pending_.assign(active_.begin(), active_.end());
  pending_set_ = active_;
  feed_ = (active_.size() + window_ + window_ - 1) / window_;
}

void DetTree::insert(PointId p) {
  if (active_.contains(p)) throw StreamError("point " + std::to_string(p) + " already active");
  current_->insert(p);
  active_.insert(p);
  if (!stop_the_world_) {
    pending_.push_back(p);
    pending_set_.insert(p);
  }
  after_update();
}

void DetTree::erase(PointId p) {
  if (!active_.contains(p)) throw StreamError("point " + std::to_string(p) + " not active");
  current_->erase(p);
  active_.erase(p);
  if (!stop_the_world_) {
    if (pending_set_.erase(p))
      pending_.erase(std::find(pending_.begin(), pending_.end(), p));
    else
      background_->erase(p);
  }
  after_update();
}

void DetTree::after_update() {
  rebuilt_last_ = false;
  if (!stop_the_world_) {
    for (std::uint64_t i = 0; i < feed_ && !pending_.empty(); ++i) {
      background_->insert(pending_.front());
      pending_set_.erase(pending_.front());
      pending_.pop_front();
    }
  }
  if (++since_rebuild_ < window_) return;

  const auto& c = current_->counters();
  retired_.propagate_calls += c.propagate_calls;
  retired_.node_visits += c.node_visits;
  retired_.queue_pushes += c.queue_pushes;
  if (stop_the_world_) {
    current_ = std::make_unique<PropagationTree>(space_, r_, k_);
    for (PointId p : active_) current_->insert(p);
  } else {
    while (!pending_.empty()) {
      background_->insert(pending_.front());
      pending_.pop_front();
    }
    pending_set_.clear();
    current_ = std::move(background_);
  }
  ++rebuilds_;
  rebuilt_last_ = true;
  start_window();
}

TreeCounters DetTree::counters() const {
  TreeCounters out = retired_;
  const auto& c = current_->counters();
  out.propagate_calls += c.propagate_calls;
  out.node_visits += c.node_visits;
  out.queue_pushes += c.queue_pushes;
  if (background_) {
    const auto& b = background_->counters();
    out.propagate_calls += b.propagate_calls;
    out.node_visits += b.node_visits;
    out.queue_pushes += b.queue_pushes;
  }
  return out;
}

}  // namespace dynkc
