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

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "dynkc/types.hpp"

namespace dynkc {

struct DenseVector {
  std::vector<double> values;
  friend bool operator==(const DenseVector&, const DenseVector&) = default;
};

/// One byte per bit, each 0 or 1.
struct BitVector {
  std::vector<std::uint8_t> bits;
  friend bool operator==(const BitVector&, const BitVector&) = default;
};

/// Sorted, duplicate-free element ids.
struct ElementSet {
  std::vector<std::uint32_t> elements;
  friend bool operator==(const ElementSet&, const ElementSet&) = default;
  static ElementSet from_unsorted(std::vector<std::uint32_t> elements);
};

struct MatrixRow {
  std::size_t index = 0;
  friend bool operator==(const MatrixRow&, const MatrixRow&) = default;
};

using Payload = std::variant<DenseVector, BitVector, ElementSet, MatrixRow>;

enum class MetricKind : std::uint8_t { Lp, Hamming, Jaccard, Matrix };

std::string to_string(MetricKind kind);

/// Dense symmetric n x n distance table.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  DistanceMatrix(std::size_t n, std::vector<double> values);

  /// Reads whitespace-separated reals; checks squareness, zero diagonal and symmetry.
  /// With `strict`, also checks the triangle inequality (O(n^3)).
  static DistanceMatrix load(const std::string& path, bool strict = false);

  std::size_t size() const { return n_; }
  double at(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }

  /// Throws ConfigError on asymmetry or a nonzero diagonal.
  void validate(bool strict) const;

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

struct MetricConfig {
  MetricKind kind = MetricKind::Lp;
  /// Vector dimension (Lp, Hamming) or universe size (Jaccard). Zero for Matrix.
  std::size_t dim = 0;
  double p = 2.0;
  double r_min = 1.0;
  double r_max = 1.0;
  std::shared_ptr<const DistanceMatrix> matrix;
  std::string matrix_path;

  double aspect_ratio() const { return r_max / r_min; }

  /// Throws ConfigError unless 0 < r_min <= r_max and the kind's parameters are sane.
  void validate() const;

  /// Throws ConfigError if `payload` does not match this metric's variant and dimension.
  void check_payload(const Payload& payload) const;

  static MetricConfig lp(std::size_t dim, double p, double r_min, double r_max);
  static MetricConfig hamming(std::size_t bits, double r_min, double r_max);
  static MetricConfig jaccard(std::size_t universe, double r_min, double r_max);
  static MetricConfig explicit_matrix(std::shared_ptr<const DistanceMatrix> m, double r_min,
                                      double r_max);
};

/// Uncounted distance between two payloads under `cfg`.
double raw_distance(const Payload& a, const Payload& b, const MetricConfig& cfg);

/// Monotone count of distance evaluations, with optional per-update snapshots.
class QueryCounter {
 public:
  void add(std::uint64_t n = 1) { total_.fetch_add(n, std::memory_order_relaxed); }
  std::uint64_t total() const { return total_.load(std::memory_order_relaxed); }
  void snapshot() { snapshots_.push_back(total()); }
  const std::vector<std::uint64_t>& snapshots() const { return snapshots_; }
  /// Only legal before the first update of a stream.
  void reset();

 private:
  std::atomic<std::uint64_t> total_{0};
  std::vector<std::uint64_t> snapshots_;
};

/// Counted distance over payloads.
class MetricOracle {
 public:
  explicit MetricOracle(MetricConfig cfg);

  const MetricConfig& config() const { return cfg_; }
  double operator()(const Payload& a, const Payload& b) const;
  QueryCounter& counter() const { return counter_; }

 private:
  MetricConfig cfg_;
  mutable QueryCounter counter_;
};

/// Payloads of the active points plus the counted metric over them.
class MetricSpace {
 public:
  explicit MetricSpace(MetricConfig cfg);

  const MetricConfig& config() const { return oracle_.config(); }

  void add(PointId id, Payload payload);
  void remove(PointId id);
  bool contains(PointId id) const { return points_.contains(id); }
  const Payload& payload(PointId id) const;
  std::size_t size() const { return points_.size(); }
  /// Sorted ids of the active points.
  std::vector<PointId> ids() const;

  /// Counted distance between two active points.
  double distance(PointId a, PointId b) const;
  /// Distance that does not touch the query counter (oracles, verification).
  double distance_uncounted(PointId a, PointId b) const;

  std::uint64_t queries() const { return oracle_.counter().total(); }
  QueryCounter& counter() const { return oracle_.counter(); }

 private:
  MetricOracle oracle_;
  std::unordered_map<PointId, Payload> points_;
};

/// Geometric grid r_min, r_min*q, r_min*q^2, ... with q = 1 + eps/2, ending at the
/// first value >= r_max.
std::vector<double> scale_grid(double r_min, double r_max, double eps);
std::vector<double> scale_grid(const MetricConfig& cfg, double eps);

}  // namespace dynkc
