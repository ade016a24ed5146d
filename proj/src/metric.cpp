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


#include "dynkc/metric.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace dynkc {

ElementSet ElementSet::from_unsorted(std::vector<std::uint32_t> elements) {
  std::sort(elements.begin(), elements.end());
  elements.erase(std::unique(elements.begin(), elements.end()), elements.end());
  return ElementSet{std::move(elements)};
}

std::string to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::Lp: return "lp";
    case MetricKind::Hamming: return "hamming";
    case MetricKind::Jaccard: return "jaccard";
    case MetricKind::Matrix: return "matrix";
  }
  return "unknown";
}

DistanceMatrix::DistanceMatrix(std::size_t n, std::vector<double> values)
    : n_(n), values_(std::move(values)) {
  if (values_.size() != n_ * n_) {
    throw ConfigError("distance matrix: expected " + std::to_string(n_ * n_) + " entries, got " +
                      std::to_string(values_.size()));
  }
}

DistanceMatrix DistanceMatrix::load(const std::string& path, bool strict) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open distance matrix file: " + path);
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::size_t row_len = 0;
    double v = 0;
    while (ls >> v) {
      values.push_back(v);
      ++row_len;
    }
    if (!ls.eof()) throw ConfigError("distance matrix: non-numeric entry in " + path);
    if (row_len == 0) continue;
    if (cols == 0) cols = row_len;
    if (row_len != cols) throw ConfigError("distance matrix: ragged rows in " + path);
    ++rows;
  }
  if (rows != cols) throw ConfigError("distance matrix: not square in " + path);
  DistanceMatrix m(rows, std::move(values));
  m.validate(strict);
  return m;
}

void DistanceMatrix::validate(bool strict) const {
  for (std::size_t i = 0; i < n_; ++i) {
    if (at(i, i) != 0.0) throw ConfigError("distance matrix: nonzero diagonal at " + std::to_string(i));
    for (std::size_t j = i + 1; j < n_; ++j) {
      if (at(i, j) != at(j, i)) {
        throw ConfigError("distance matrix: asymmetric at (" + std::to_string(i) + "," +
                          std::to_string(j) + ")");
      }
      if (at(i, j) < 0.0) throw ConfigError("distance matrix: negative entry");
    }
  }
  if (!strict) return;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j)
      for (std::size_t l = 0; l < n_; ++l)
        if (at(i, l) > at(i, j) + at(j, l) + 1e-12 * (1.0 + at(i, l))) {
          throw ConfigError("distance matrix: triangle inequality fails at (" + std::to_string(i) +
                            "," + std::to_string(j) + "," + std::to_string(l) + ")");
        }
}

void MetricConfig::validate() const {
  if (!(r_min > 0.0) || !(r_min <= r_max) || !std::isfinite(r_max)) {
    throw ConfigError("metric: require 0 < rmin <= rmax");
  }
  switch (kind) {
    case MetricKind::Lp:
      if (dim == 0) throw ConfigError("lp metric: dim must be positive");
      if (!(p >= 1.0)) throw ConfigError("lp metric: p must be >= 1");
      break;
    case MetricKind::Hamming:
      if (dim == 0) throw ConfigError("hamming metric: dim must be positive");
      break;
    case MetricKind::Jaccard:
      if (dim == 0) throw ConfigError("jaccard metric: universe must be positive");
      break;
    case MetricKind::Matrix:
      if (!matrix) throw ConfigError("matrix metric: no matrix loaded");
      break;
  }
}

void MetricConfig::check_payload(const Payload& payload) const {
  switch (kind) {
    case MetricKind::Lp: {
      const auto* v = std::get_if<DenseVector>(&payload);
      if (!v) throw ConfigError("payload is not a dense vector");
      if (v->values.size() != dim) {
        throw ConfigError("dense vector has dimension " + std::to_string(v->values.size()) +
                          ", expected " + std::to_string(dim));
      }
      break;
    }
    case MetricKind::Hamming: {
      const auto* v = std::get_if<BitVector>(&payload);
      if (!v) throw ConfigError("payload is not a bit vector");
      if (v->bits.size() != dim) {
        throw ConfigError("bit vector has length " + std::to_string(v->bits.size()) +
                          ", expected " + std::to_string(dim));
      }
      break;
    }
    case MetricKind::Jaccard: {
      const auto* v = std::get_if<ElementSet>(&payload);
      if (!v) throw ConfigError("payload is not an element set");
      if (!v->elements.empty() && v->elements.back() >= dim) {
        throw ConfigError("set element " + std::to_string(v->elements.back()) +
                          " outside universe of size " + std::to_string(dim));
      }
      break;
    }
    case MetricKind::Matrix: {
      const auto* v = std::get_if<MatrixRow>(&payload);
      if (!v) throw ConfigError("payload is not a matrix row");
      if (!matrix || v->index >= matrix->size()) {
        throw ConfigError("matrix row " + std::to_string(v->index) + " out of range");
      }
      break;
    }
  }
}

MetricConfig MetricConfig::lp(std::size_t dim, double p, double r_min, double r_max) {
  MetricConfig cfg;
  cfg.kind = MetricKind::Lp;
  cfg.dim = dim;
  cfg.p = p;
  cfg.r_min = r_min;
  cfg.r_max = r_max;
  cfg.validate();
  return cfg;
}

MetricConfig MetricConfig::hamming(std::size_t bits, double r_min, double r_max) {
  MetricConfig cfg;
  cfg.kind = MetricKind::Hamming;
  cfg.dim = bits;
  cfg.r_min = r_min;
  cfg.r_max = r_max;
  cfg.validate();
  return cfg;
}

MetricConfig MetricConfig::jaccard(std::size_t universe, double r_min, double r_max) {
  MetricConfig cfg;
  cfg.kind = MetricKind::Jaccard;
  cfg.dim = universe;
  cfg.r_min = r_min;
  cfg.r_max = r_max;
  cfg.validate();
  return cfg;
}

MetricConfig MetricConfig::explicit_matrix(std::shared_ptr<const DistanceMatrix> m, double r_min,
                                           double r_max) {
  MetricConfig cfg;
  cfg.kind = MetricKind::Matrix;
  cfg.matrix = std::move(m);
  cfg.r_min = r_min;
  cfg.r_max = r_max;
  cfg.validate();
  return cfg;
}

namespace {

double lp_distance(const std::vector<double>& a, const std::vector<double>& b, double p) {
  if (p == 2.0) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
  }
  if (p == 1.0) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s;
  }
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::pow(std::abs(a[i] - b[i]), p);
  return std::pow(s, 1.0 / p);
}

double jaccard_distance(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t common = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++common;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  const std::size_t uni = a.size() + b.size() - common;
  return 1.0 - static_cast<double>(common) / static_cast<double>(uni);
}

}  // namespace

double raw_distance(const Payload& a, const Payload& b, const MetricConfig& cfg) {
  cfg.check_payload(a);
  cfg.check_payload(b);
  switch (cfg.kind) {
    case MetricKind::Lp:
      return lp_distance(std::get<DenseVector>(a).values, std::get<DenseVector>(b).values, cfg.p);
    case MetricKind::Hamming: {
      const auto& x = std::get<BitVector>(a).bits;
      const auto& y = std::get<BitVector>(b).bits;
      std::size_t diff = 0;
      for (std::size_t i = 0; i < x.size(); ++i) diff += (x[i] != y[i]);
      return static_cast<double>(diff);
    }
    case MetricKind::Jaccard:
      return jaccard_distance(std::get<ElementSet>(a).elements, std::get<ElementSet>(b).elements);
    case MetricKind::Matrix:
      return cfg.matrix->at(std::get<MatrixRow>(a).index, std::get<MatrixRow>(b).index);
  }
  return 0.0;
}

void QueryCounter::reset() {
  total_.store(0, std::memory_order_relaxed);
  snapshots_.clear();
}

MetricOracle::MetricOracle(MetricConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

double MetricOracle::operator()(const Payload& a, const Payload& b) const {
  counter_.add();
  return raw_distance(a, b, cfg_);
}

MetricSpace::MetricSpace(MetricConfig cfg) : oracle_(std::move(cfg)) {}

void MetricSpace::add(PointId id, Payload payload) {
  config().check_payload(payload);
  auto [it, inserted] = points_.try_emplace(id, std::move(payload));
  if (!inserted) throw StreamError("point " + std::to_string(id) + " is already active");
}

void MetricSpace::remove(PointId id) {
  if (points_.erase(id) == 0) throw StreamError("point " + std::to_string(id) + " is not active");
}

const Payload& MetricSpace::payload(PointId id) const {
  auto it = points_.find(id);
  if (it == points_.end()) throw StreamError("point " + std::to_string(id) + " is not active");
  return it->second;
}

std::vector<PointId> MetricSpace::ids() const {
  std::vector<PointId> out;
  out.reserve(points_.size());
  for (const auto& [id, _] : points_) out.push_back(id);
  std::sort(out.begin(), out.end());
  return out;
}

double MetricSpace::distance(PointId a, PointId b) const {
  return oracle_(payload(a), payload(b));
}

double MetricSpace::distance_uncounted(PointId a, PointId b) const {
  return raw_distance(payload(a), payload(b), config());
}

std::vector<double> scale_grid(double r_min, double r_max, double eps) {
  if (!(eps > 0.0)) throw ConfigError("scale grid: eps must be positive");
  if (!(r_min > 0.0) || !(r_min <= r_max)) throw ConfigError("scale grid: require 0 < rmin <= rmax");
  const double ratio = 1.0 + eps / 2.0;
  std::vector<double> grid{r_min};
  while (grid.back() < r_max) grid.push_back(grid.back() * ratio);
  return grid;
}

std::vector<double> scale_grid(const MetricConfig& cfg, double eps) {
  return scale_grid(cfg.r_min, cfg.r_max, eps);
}

}  // namespace dynkc
