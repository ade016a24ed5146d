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


#include "dynkc/ladder.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "dynkc/neighbor_index.hpp"

namespace dynkc {

std::string to_string(EngineKind kind) {
  switch (kind) {
    case EngineKind::Lfmis: return "lfmis";
    case EngineKind::Lsh: return "lsh";
    case EngineKind::Det: return "det";
  }
  return "?";
}

EngineKind engine_from_string(const std::string& name) {
  if (name == "lfmis") return EngineKind::Lfmis;
  if (name == "lsh") return EngineKind::Lsh;
  if (name == "det") return EngineKind::Det;
  throw ConfigError("unknown engine '" + name + "'");
}

ScaleCounters& ScaleCounters::operator+=(const ScaleCounters& o) {
  adjacency_queries += o.adjacency_queries;
  queue_pushes += o.queue_pushes;
  leader_changes += o.leader_changes;
  propagate_calls += o.propagate_calls;
  node_visits += o.node_visits;
  wasted_collisions += o.wasted_collisions;
  return *this;
}

namespace {

// Top-(k+1) engine, or for the LSH backend a top-n engine whose validity is |LFMIS| <= k.
class LfmisScale final : public ScaleEngine {
 public:
  LfmisScale(std::unique_ptr<NeighborIndex> index, std::size_t k, bool whole_mis, double factor,
             std::uint64_t seed)
      : k_(k), factor_(factor), buckets_(dynamic_cast<BucketIndex*>(index.get())),
        engine_(whole_mis ? std::numeric_limits<std::size_t>::max() / 4 : k, std::move(index), seed) {}

  void insert(PointId p) override { engine_.insert(p); }
  void erase(PointId p) override { engine_.erase(p); }
  bool is_valid() const override { return engine_.top_size() <= k_; }
  std::vector<PointId> centers() const override {
    auto out = engine_.top_set();
    std::sort(out.begin(), out.end());
    return out;
  }
  PointId leader_of(PointId p) const override { return engine_.leader_of(p).value_or(p); }
  std::vector<PointId> cluster_of(PointId center) const override {
    auto out = engine_.followers_of(center);
    out.insert(std::lower_bound(out.begin(), out.end(), center), center);
    return out;
  }
  double cost_factor() const override { return factor_; }
  ScaleCounters counters() const override {
    const auto c = engine_.counters();
    ScaleCounters out;
    out.adjacency_queries = c.adjacency_queries;
    out.queue_pushes = c.queue_pushes;
    out.leader_changes = c.leader_changes;
    if (buckets_) out.wasted_collisions = buckets_->wasted_collisions();
    return out;
  }
  std::string check_invariants() const override { return engine_.check_invariants(); }
  const LfmisEngine* lfmis() const override { return &engine_; }

 private:
  std::size_t k_;
  double factor_;
  const BucketIndex* buckets_;
  LfmisEngine engine_;
};

class DetScale final : public ScaleEngine {
 public:
  DetScale(const MetricSpace& space, double r, std::size_t k, double eps, bool stop_the_world)
      : tree_(space, r, k, eps, stop_the_world) {}

  void insert(PointId p) override { tree_.insert(p); }
  void erase(PointId p) override { tree_.erase(p); }
  bool is_valid() const override { return tree_.is_valid(); }
  std::vector<PointId> centers() const override { return tree_.centers(); }
  PointId leader_of(PointId p) const override { return tree_.leader_of(p); }
  std::vector<PointId> cluster_of(PointId center) const override {
    std::vector<PointId> out;
    for (PointId p : tree_.active())
      if (tree_.leader_of(p) == center) out.push_back(p);
    return out;
  }
  double cost_factor() const override { return std::max(1, tree_.root_level()); }
  ScaleCounters counters() const override {
    const auto c = tree_.counters();
    ScaleCounters out;
    out.queue_pushes = c.queue_pushes;
    out.propagate_calls = c.propagate_calls;
    out.node_visits = c.node_visits;
    return out;
  }
  std::string check_invariants() const override { return tree_.check_invariants(); }
  const DetTree* det() const override { return &tree_; }

 private:
  DetTree tree_;
};

}  // namespace

ThresholdLadder::ThresholdLadder(const MetricSpace& space, std::vector<double> scales, const LadderOptions& opt,
                                 std::uint64_t seed, std::size_t n_bound)
    : scales_(std::move(scales)), n_bound_(n_bound) {
  if (scales_.empty()) throw ConfigError("empty scale grid");
  for (std::size_t i = 0; i < scales_.size(); ++i) {
    const double r = scales_[i];
    const std::uint64_t rank_seed = derive_seed(seed, SeedDomain::Rank, i);
    switch (opt.engine) {
      case EngineKind::Lfmis:
        engines_.push_back(std::make_unique<LfmisScale>(std::make_unique<ThresholdScanIndex>(space, r), opt.k,
                                                        false, 1.0, rank_seed));
        break;
      case EngineKind::Lsh:
        engines_.push_back(std::make_unique<LfmisScale>(
            std::make_unique<BucketIndex>(space, r, n_bound, opt.lsh, derive_seed(seed, SeedDomain::Lsh, i)),
            opt.k, true, opt.lsh.c, rank_seed));
        break;
      case EngineKind::Det:
        engines_.push_back(std::make_unique<DetScale>(space, r, opt.k, opt.eps, opt.det_stop_the_world));
        break;
    }
  }
}

void ThresholdLadder::insert(PointId p) {
  for (auto& e : engines_) e->insert(p);
}

void ThresholdLadder::erase(PointId p) {
  for (auto& e : engines_) e->erase(p);
}

std::optional<std::size_t> ThresholdLadder::first_valid() const {
  for (std::size_t i = 0; i < engines_.size(); ++i)
    if (engines_[i]->is_valid()) return i;
  return std::nullopt;
}

ScaleCounters ThresholdLadder::counters() const {
  ScaleCounters out;
  for (const auto& e : engines_) out += e->counters();
  return out;
}

std::string ThresholdLadder::check_invariants() const {
  for (std::size_t i = 0; i < engines_.size(); ++i) {
    auto msg = engines_[i]->check_invariants();
    if (!msg.empty()) return "scale " + std::to_string(scales_[i]) + ": " + msg;
  }
  return {};
}

std::vector<double> ladder_scales(const MetricConfig& cfg, const LadderOptions& opt) {
  if (!(opt.eps > 0.0)) throw ConfigError("eps must be positive");
  if (opt.engine == EngineKind::Lsh && cfg.kind == MetricKind::Jaccard) {
    const double cap = 1.0 / (2.0 * opt.lsh.c);
    auto grid = scale_grid(cfg.r_min, std::max(cfg.r_min, std::min(cfg.r_max, cap)), opt.eps);
    while (!grid.empty() && opt.lsh.c * grid.back() >= 1.0) grid.pop_back();
    if (grid.empty()) throw ConfigError("no Jaccard scale r with c r < 1");
    return grid;
  }
  return scale_grid(cfg, opt.eps);
}

DynamicKCenters::DynamicKCenters(const MetricConfig& cfg, const LadderOptions& opt)
    : opt_(opt), space_(std::make_unique<MetricSpace>(cfg)), scales_(ladder_scales(cfg, opt)) {
  if (opt.k == 0) throw ConfigError("k must be at least 1");
  if (opt.restart_budget_factor < 0.0) throw ConfigError("restart budget factor must be non-negative");
  if (opt.restart_budget_factor > 0.0 && opt.restart_budget_factor < 1.0)
    throw ConfigError("restart budget factor must be at least 1");
  if (opt.engine == EngineKind::Lsh && opt.lsh_n_bound == 1) throw ConfigError("LSH n bound must be at least 2");
  if (opt_.restart_baseline <= 0.0)
    opt_.restart_baseline = 16.0 * static_cast<double>(opt.k + 1) * static_cast<double>(scales_.size());
  rebuild(derive_seed(opt.seed, SeedDomain::Restart, 0), lsh_bound_for(0));
  next_checkpoint_ = 1;
}

std::size_t DynamicKCenters::lsh_bound_for(std::size_t active) const {
  if (opt_.lsh_n_bound >= 2) return opt_.lsh_n_bound;
  return std::bit_ceil(std::max<std::size_t>(2, active));
}

void DynamicKCenters::rebuild(std::uint64_t epoch_seed, std::size_t n_bound) {
  if (ladder_) retired_ += ladder_->counters();
  ladder_ = std::make_unique<ThresholdLadder>(*space_, scales_, opt_, epoch_seed, n_bound);
  for (PointId p : space_->ids()) ladder_->insert(p);
}

void DynamicKCenters::insert(PointId p, Payload payload) {
  if (space_->contains(p)) throw StreamError("insert of active id " + std::to_string(p));
  space_->add(p, std::move(payload));
  ladder_->insert(p);
  after_update();
}

void DynamicKCenters::erase(PointId p) {
  if (!space_->contains(p)) throw StreamError("delete of inactive id " + std::to_string(p));
  ladder_->erase(p);
  space_->remove(p);
  after_update();
}

void DynamicKCenters::after_update() {
  ++steps_;
  cached_.reset();
  const std::size_t active = space_->size();

  if (opt_.engine == EngineKind::Lsh && opt_.lsh_n_bound == 0) {
    if (active > ladder_->n_bound()) {
      ++size_rebuilds_;
      rebuild(derive_seed(opt_.seed, SeedDomain::Restart, ++epoch_), lsh_bound_for(active));
      next_checkpoint_ = steps_ + std::max<std::size_t>(1, (active + 1) / 2);
    } else if (steps_ >= next_checkpoint_) {
      ++checkpoint_rebuilds_;
      rebuild(derive_seed(opt_.seed, SeedDomain::Restart, ++epoch_), lsh_bound_for(active));
      next_checkpoint_ = steps_ + std::max<std::size_t>(1, (active + 1) / 2);
    }
  }

  if (opt_.restart_budget_factor > 0.0 && restarts_ < opt_.max_restarts) {
    const double budget = opt_.restart_budget_factor * static_cast<double>(steps_) * opt_.restart_baseline;
    if (static_cast<double>(ladder_->counters().work()) > budget) {
      ++restarts_;
      restart_steps_.push_back(steps_);
      rebuild(derive_seed(opt_.seed, SeedDomain::Restart, ++epoch_), ladder_->n_bound());
    }
  }
}

const Solution& DynamicKCenters::solution() {
  if (cached_) return *cached_;
  if (space_->size() == 0) throw EmptyError("no active points");
  Solution s;
  if (const auto i = ladder_->first_valid()) {
    const auto& e = ladder_->engine(*i);
    s.scale_index = *i;
    s.scale = ladder_->scale(*i);
    s.centers = e.centers();
    s.cost_upper = e.cost_factor() * s.scale;
    s.opt_lower = *i > 0 ? ladder_->scale(*i - 1) / 2.0 : 0.0;
  } else {
    s.fallback = true;
    s.scale_index = ladder_->size() - 1;
    s.scale = ladder_->scale(s.scale_index);
    s.centers = {space_->ids().front()};
    s.cost_upper = space_->config().r_max;
    s.opt_lower = s.scale / 2.0;
  }
  if (s.opt_lower > 0.0) s.approx_factor_bound = s.cost_upper / s.opt_lower;
  cached_ = std::move(s);
  return *cached_;
}

PointId DynamicKCenters::membership(PointId p) {
  if (!space_->contains(p)) throw StreamError("membership of inactive id " + std::to_string(p));
  const auto& s = solution();
  if (s.fallback) return s.centers.front();
  return ladder_->engine(s.scale_index).leader_of(p);
}

std::vector<PointId> DynamicKCenters::enumerate_cluster(PointId p) {
  const PointId c = membership(p);
  const auto& s = solution();
  if (s.fallback) return space_->ids();
  return ladder_->engine(s.scale_index).cluster_of(c);
}

ScaleCounters DynamicKCenters::counters() const {
  ScaleCounters out = retired_;
  out += ladder_->counters();
  return out;
}

}  // namespace dynkc
