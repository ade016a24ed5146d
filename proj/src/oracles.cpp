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


#include "dynkc/oracles.hpp"

#include <algorithm>
#include <limits>
#include <set>

namespace dynkc::oracle {

namespace {

struct RankedVertex {
  std::uint64_t value;
  PointId id;
};

bool ranks_before(const RankedVertex& a, const RankedVertex& b) {
  return a.value != b.value ? a.value < b.value : a.id < b.id;
}

}  // namespace

LfmisResult lfmis_bruteforce(const GraphSnapshot& snap, std::size_t k) {
  std::vector<RankedVertex> order;
  order.reserve(snap.vertices.size());
  for (const Rank& r : snap.vertices) order.push_back({r.value, r.id});
  std::sort(order.begin(), order.end(), ranks_before);

  const std::size_t n = order.size();
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      adj[i][j] = adj[j][i] = snap.edge(order[i].id, order[j].id);

  LfmisResult out;
  std::vector<bool> alive(n, true);
  std::vector<std::size_t> killer(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!alive[i]) continue;
    out.mis.push_back(order[i].id);
    killer[i] = i;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (alive[j] && adj[i][j]) {
        alive[j] = false;
        killer[j] = i;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const PointId e = order[killer[i]].id;
    out.eliminator[order[i].id] = e;
    if (killer[i] != i) out.leader[order[i].id] = e;
  }
  const std::size_t prefix = std::min(out.mis.size(), k + 1);
  out.top.assign(out.mis.begin(), out.mis.begin() + static_cast<std::ptrdiff_t>(prefix));
  return out;
}

std::size_t eliminator_change_count(const GraphSnapshot& prev, const GraphSnapshot& next) {
  std::set<PointId> a;
  std::set<PointId> b;
  for (const Rank& r : prev.vertices) a.insert(r.id);
  for (const Rank& r : next.vertices) b.insert(r.id);
  std::vector<PointId> sym;
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(sym));
  if (sym.size() != 1) throw ConfigError("eliminator_change_count: snapshots must differ by one vertex");

  const LfmisResult before = lfmis_bruteforce(prev, 0);
  const LfmisResult after = lfmis_bruteforce(next, 0);
  std::size_t changed = 0;
  std::set<PointId> all = a;
  all.insert(b.begin(), b.end());
  for (PointId v : all) {
    auto x = before.eliminator.find(v);
    auto y = after.eliminator.find(v);
    if (x == before.eliminator.end() || y == after.eliminator.end() || x->second != y->second) {
      ++changed;
    }
  }
  return changed;
}

double PointSnapshot::distance(std::size_t i, std::size_t j) const {
  return raw_distance(payloads[i], payloads[j], config);
}

PointSnapshot snapshot_of(const MetricSpace& space) {
  PointSnapshot snap{space.config(), space.ids(), {}};
  snap.payloads.reserve(snap.ids.size());
  for (PointId id : snap.ids) snap.payloads.push_back(space.payload(id));
  return snap;
}

GraphSnapshot threshold_graph(const PointSnapshot& points, const std::map<PointId, Rank>& ranks,
                              double r) {
  GraphSnapshot g;
  std::map<PointId, std::size_t> pos;
  for (std::size_t i = 0; i < points.ids.size(); ++i) {
    pos[points.ids[i]] = i;
    g.vertices.push_back(ranks.at(points.ids[i]));
  }
  g.edge = [&points, pos = std::move(pos), r](PointId u, PointId v) {
    return points.distance(pos.at(u), pos.at(v)) <= r;
  };
  return g;
}

namespace {

std::vector<std::vector<double>> distance_table(const PointSnapshot& points) {
  const std::size_t n = points.size();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d[i][j] = d[j][i] = points.distance(i, j);
  return d;
}

double binomial(std::size_t n, std::size_t k) {
  double c = 1.0;
  for (std::size_t i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return c;
}

}  // namespace

KCentersResult kcenters_bruteforce(const PointSnapshot& points, std::size_t k) {
  const std::size_t n = points.size();
  if (n == 0) return {};
  if (k >= n) return {0.0, points.ids};
  if (n > 15 && binomial(n, k) > 1e6) {
    throw ConfigError("kcenters_bruteforce: instance too large (n=" + std::to_string(n) + ")");
  }
  const auto d = distance_table(points);

  KCentersResult best{std::numeric_limits<double>::infinity(), {}};
  std::vector<std::size_t> pick(k);
  for (std::size_t i = 0; i < k; ++i) pick[i] = i;
  while (true) {
    double cost = 0.0;
    for (std::size_t p = 0; p < n && cost < best.cost; ++p) {
      double nearest = std::numeric_limits<double>::infinity();
      for (std::size_t c : pick) nearest = std::min(nearest, d[p][c]);
      cost = std::max(cost, nearest);
    }
    if (cost < best.cost) {
      best.cost = cost;
      best.centers.clear();
      for (std::size_t c : pick) best.centers.push_back(points.ids[c]);
    }
    // next k-combination in lexicographic order
    std::size_t i = k;
    while (i > 0 && pick[i - 1] == n - k + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
  return best;
}

KCentersResult gonzalez(const PointSnapshot& points, std::size_t k) {
  const std::size_t n = points.size();
  if (n == 0) throw ConfigError("gonzalez: empty snapshot");
  std::size_t first = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (points.ids[i] < points.ids[first]) first = i;

  KCentersResult out;
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::size_t next = first;
  while (true) {
    out.centers.push_back(points.ids[next]);
    for (std::size_t i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], points.distance(i, next));
    std::size_t far = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (nearest[i] > nearest[far]) far = i;
    out.cost = nearest[far];
    if (out.centers.size() >= k || out.cost == 0.0) break;
    next = far;
  }
  return out;
}

double assignment_cost(const PointSnapshot& points, const std::map<PointId, PointId>& assignment) {
  std::map<PointId, std::size_t> pos;
  for (std::size_t i = 0; i < points.ids.size(); ++i) pos[points.ids[i]] = i;
  double cost = 0.0;
  for (std::size_t i = 0; i < points.ids.size(); ++i) {
    auto it = assignment.find(points.ids[i]);
    if (it == assignment.end()) {
      throw ConfigError("assignment_cost: point " + std::to_string(points.ids[i]) + " unassigned");
    }
    cost = std::max(cost, points.distance(i, pos.at(it->second)));
  }
  return cost;
}

}  // namespace dynkc::oracle
