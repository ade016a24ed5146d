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
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dynkc/det_tree.hpp"
#include "dynkc/lfmis_engine.hpp"
#include "dynkc/lsh.hpp"
#include "dynkc/metric.hpp"

namespace dynkc {

enum class EngineKind { Lfmis, Lsh, Det };
std::string to_string(EngineKind kind);
EngineKind engine_from_string(const std::string& name);

/// Raised when a solution is requested with no active points.
class EmptyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScaleCounters {
  std::uint64_t adjacency_queries = 0;
  std::uint64_t queue_pushes = 0;
  std::uint64_t leader_changes = 0;
  std::uint64_t propagate_calls = 0;
  std::uint64_t node_visits = 0;
  std::uint64_t wasted_collisions = 0;

  /// Work units used by the restart budget.
  std::uint64_t work() const { return adjacency_queries + queue_pushes + node_visits; }
  ScaleCounters& operator+=(const ScaleCounters& o);
};

/// One per-scale engine behind a common face.
class ScaleEngine {
 public:
  virtual ~ScaleEngine() = default;
  virtual void insert(PointId p) = 0;
  virtual void erase(PointId p) = 0;
  virtual bool is_valid() const = 0;
  /// Independent set the solution is read from (the whole set for top-n engines).
  virtual std::vector<PointId> centers() const = 0;
  virtual PointId leader_of(PointId p) const = 0;
  virtual std::vector<PointId> cluster_of(PointId center) const = 0;
  /// Worst-case distance from a point to its reported leader, as a multiple of r.
  virtual double cost_factor() const = 0;
  virtual ScaleCounters counters() const = 0;
  virtual std::string check_invariants() const = 0;
  virtual const LfmisEngine* lfmis() const { return nullptr; }
  virtual const DetTree* det() const { return nullptr; }
};

struct LadderOptions {
  std::size_t k = 1;
  double eps = 0.5;
  EngineKind engine = EngineKind::Lfmis;
  std::uint64_t seed = 1;
  LshOptions lsh;
  /// Parameter n for the LSH tables; 0 lets the doubling schedule choose.
  std::size_t lsh_n_bound = 0;
  bool det_stop_the_world = false;
  /// Restart when work since the last (re)start exceeds factor * t * baseline at step t. 0 disables.
  double restart_budget_factor = 0.0;
  double restart_baseline = 0.0;
  std::size_t max_restarts = 16;
};

struct Solution {
  double scale = 0.0;
  std::size_t scale_index = 0;
  std::vector<PointId> centers;
  double cost_upper = 0.0;
  /// 0 when no certificate exists below the chosen scale.
  double opt_lower = 0.0;
  /// cost_upper / opt_lower, or +inf without a certificate.
  double approx_factor_bound = std::numeric_limits<double>::infinity();
  /// True when no scale was valid and a single arbitrary center was returned.
  bool fallback = false;
};

/// One engine per grid scale over a shared metric space.
class ThresholdLadder {
 public:
  ThresholdLadder(const MetricSpace& space, std::vector<double> scales, const LadderOptions& opt,
                  std::uint64_t seed, std::size_t n_bound);

  void insert(PointId p);
  void erase(PointId p);

  std::size_t size() const { return engines_.size(); }
  double scale(std::size_t i) const { return scales_[i]; }
  const std::vector<double>& scales() const { return scales_; }
  ScaleEngine& engine(std::size_t i) { return *engines_[i]; }
  const ScaleEngine& engine(std::size_t i) const { return *engines_[i]; }
  /// Smallest valid scale, if any.
  std::optional<std::size_t> first_valid() const;
  ScaleCounters counters() const;
  std::string check_invariants() const;
  std::size_t n_bound() const { return n_bound_; }

 private:
  std::vector<double> scales_;
  std::vector<std::unique_ptr<ScaleEngine>> engines_;
  std::size_t n_bound_;
};

/// Grid for the given engine: the LSH variant on Jaccard stops at 1/(2c).
std::vector<double> ladder_scales(const MetricConfig& cfg, const LadderOptions& opt);

/// Fully dynamic k-centers: owns the points, fans updates out to the ladder, and
/// wraps it with the restart budget and, for LSH, the doubling schedule.
class DynamicKCenters {
 public:
  DynamicKCenters(const MetricConfig& cfg, const LadderOptions& opt);

  void insert(PointId p, Payload payload);
  void erase(PointId p);

  /// Chosen scale and centers for the current step. Throws EmptyError with no points.
  const Solution& solution();
  PointId membership(PointId p);
  std::vector<PointId> enumerate_cluster(PointId p);

  const MetricSpace& space() const { return *space_; }
  const ThresholdLadder& ladder() const { return *ladder_; }
  const LadderOptions& options() const { return opt_; }
  std::uint64_t steps() const { return steps_; }

  std::size_t restarts() const { return restarts_; }
  std::vector<std::uint64_t> restart_steps() const { return restart_steps_; }
  std::size_t size_rebuilds() const { return size_rebuilds_; }
  std::size_t checkpoint_rebuilds() const { return checkpoint_rebuilds_; }
  /// Counters summed over every ladder instance built so far.
  ScaleCounters counters() const;
  std::string check_invariants() const { return ladder_->check_invariants(); }

 private:
  void rebuild(std::uint64_t epoch_seed, std::size_t n_bound);
  void after_update();
  std::size_t lsh_bound_for(std::size_t active) const;

  LadderOptions opt_;
  std::unique_ptr<MetricSpace> space_;
  std::vector<double> scales_;
  std::unique_ptr<ThresholdLadder> ladder_;
  std::uint64_t steps_ = 0;
  std::uint64_t epoch_ = 0;
  ScaleCounters retired_;

  std::size_t restarts_ = 0;
  std::vector<std::uint64_t> restart_steps_;
  std::size_t size_rebuilds_ = 0;
  std::size_t checkpoint_rebuilds_ = 0;
  std::uint64_t next_checkpoint_ = 0;

  std::optional<Solution> cached_;
};

}  // namespace dynkc
