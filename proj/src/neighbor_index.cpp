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


#include "dynkc/neighbor_index.hpp"

#include <string>

namespace dynkc {

namespace {

void insert_member(std::set<Rank>& members, std::unordered_map<PointId, Rank>& ranks, PointId v,
                   Rank rank) {
  if (!ranks.try_emplace(v, rank).second) {
    throw std::logic_error("neighbor index: vertex " + std::to_string(v) + " already present");
  }
  members.insert(rank);
}

void erase_member(std::set<Rank>& members, std::unordered_map<PointId, Rank>& ranks, PointId v) {
  auto it = ranks.find(v);
  if (it == ranks.end()) {
    throw std::logic_error("neighbor index: vertex " + std::to_string(v) + " not present");
  }
  members.erase(it->second);
  ranks.erase(it);
}

}  // namespace

ThresholdScanIndex::ThresholdScanIndex(const MetricSpace& space, double radius)
    : space_(space), radius_(radius) {}

void ThresholdScanIndex::insert(PointId v, Rank rank) { insert_member(members_, ranks_, v, rank); }

void ThresholdScanIndex::erase(PointId v) { erase_member(members_, ranks_, v); }

std::optional<PointId> ThresholdScanIndex::query_top(PointId v) {
  for (const Rank& u : members_) {
    if (u.id == v) continue;
    ++queries_;
    if (space_.distance(v, u.id) <= radius_) return u.id;
  }
  return std::nullopt;
}

std::vector<PointId> ThresholdScanIndex::query_all(PointId v) {
  std::vector<PointId> out;
  for (const Rank& u : members_) {
    if (u.id == v) continue;
    ++queries_;
    if (space_.distance(v, u.id) <= radius_) out.push_back(u.id);
  }
  return out;
}

bool ThresholdScanIndex::adjacent(PointId u, PointId v) const {
  return u != v && space_.distance_uncounted(u, v) <= radius_;
}

PredicateIndex::PredicateIndex(EdgeFn edge) : edge_(std::move(edge)) {}

void PredicateIndex::insert(PointId v, Rank rank) { insert_member(members_, ranks_, v, rank); }

void PredicateIndex::erase(PointId v) { erase_member(members_, ranks_, v); }

std::optional<PointId> PredicateIndex::query_top(PointId v) {
  for (const Rank& u : members_) {
    if (u.id == v) continue;
    ++queries_;
    if (edge_(v, u.id)) return u.id;
  }
  return std::nullopt;
}

std::vector<PointId> PredicateIndex::query_all(PointId v) {
  std::vector<PointId> out;
  for (const Rank& u : members_) {
    if (u.id == v) continue;
    ++queries_;
    if (edge_(v, u.id)) out.push_back(u.id);
  }
  return out;
}

}  // namespace dynkc
