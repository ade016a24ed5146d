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


#include "dynkc/lsh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <random>
#include <unordered_set>

namespace dynkc {

std::string to_string(LshFamilyKind kind) {
  switch (kind) {
    case LshFamilyKind::MinHash: return "minhash";
    case LshFamilyKind::BitSampling: return "bit-sampling";
    case LshFamilyKind::PStable: return "p-stable";
  }
  return "unknown";
}

LshFamilyKind family_for(const MetricConfig& cfg) {
  switch (cfg.kind) {
    case MetricKind::Jaccard: return LshFamilyKind::MinHash;
    case MetricKind::Hamming: return LshFamilyKind::BitSampling;
    case MetricKind::Lp:
      if (cfg.p > 2.0) throw ConfigError("lsh: p-stable projections need 1 <= p <= 2");
      return LshFamilyKind::PStable;
    case MetricKind::Matrix: break;
  }
  throw ConfigError("lsh: no hash family for an explicit distance matrix");
}

LshParams lsh_parameters(std::size_t n_bound, double delta, double p1, double p2) {
  if (n_bound < 2) throw ConfigError("lsh: n_bound must be at least 2");
  if (!(delta > 0.0 && delta < 0.5)) throw ConfigError("lsh: delta must lie in (0, 1/2)");
  if (!(p2 > 0.0 && p2 < 1.0)) throw ConfigError("lsh: p2 must lie in (0, 1)");
  if (!(p1 > p2 && p1 <= 1.0)) throw ConfigError("lsh: need p2 < p1 <= 1");
  const double n = static_cast<double>(n_bound);
  LshParams out;
  out.p1 = p1;
  out.p2 = p2;
  out.rho = std::log(p1) / std::log(p2);
  out.t = static_cast<std::size_t>(std::ceil(2.0 * std::log(n) / std::log(1.0 / p2)));
  out.s = static_cast<std::size_t>(std::ceil(std::log(n * n / delta) * std::pow(n, 2.0 * out.rho) / p1));
  out.t = std::max<std::size_t>(out.t, 1);
  out.s = std::max<std::size_t>(out.s, 1);
  return out;
}

double minhash_collision_prob(const ElementSet& a, const ElementSet& b) {
  std::vector<std::uint32_t> common;
  std::set_intersection(a.elements.begin(), a.elements.end(), b.elements.begin(), b.elements.end(),
                        std::back_inserter(common));
  const std::size_t uni = a.elements.size() + b.elements.size() - common.size();
  if (uni == 0) throw ConfigError("minhash_collision_prob: both sets are empty");
  return static_cast<double>(common.size()) / static_cast<double>(uni);
}

double pstable_collision_prob(double p, double u, double w) {
  if (u <= 0.0) return 1.0;
  const double x = w / u;
  if (p == 2.0) {
    const double tail = 0.5 * std::erfc(x / std::numbers::sqrt2);
    return 1.0 - 2.0 * tail - 2.0 / (std::sqrt(2.0 * std::numbers::pi) * x) * (1.0 - std::exp(-x * x / 2.0));
  }
  if (p == 1.0) {
    return 2.0 * std::atan(x) / std::numbers::pi - std::log(1.0 + x * x) / (std::numbers::pi * x);
  }
  throw ConfigError("pstable_collision_prob: closed form only for p = 1 or p = 2");
}

namespace {

/// Symmetric alpha-stable sample (Chambers-Mallows-Stuck), with the exact
/// Gaussian and Cauchy special cases.
double stable_sample(double alpha, std::mt19937_64& rng) {
  if (alpha == 2.0) return std::normal_distribution<double>(0.0, 1.0)(rng);
  if (alpha == 1.0) return std::cauchy_distribution<double>(0.0, 1.0)(rng);
  const double theta = std::uniform_real_distribution<double>(-std::numbers::pi / 2, std::numbers::pi / 2)(rng);
  const double w = std::exponential_distribution<double>(1.0)(rng);
  return std::sin(alpha * theta) / std::pow(std::cos(theta), 1.0 / alpha) *
         std::pow(std::cos((1.0 - alpha) * theta) / w, (1.0 - alpha) / alpha);
}

}  // namespace

HashFunctions::HashFunctions(const MetricConfig& cfg, LshFamilyKind family, std::size_t count,
                             double width, std::uint64_t seed)
    : family_(family), count_(count), dim_(cfg.dim), width_(width) {
  std::mt19937_64 rng(seed);
  switch (family_) {
    case LshFamilyKind::MinHash:
      salts_.resize(count_);
      for (auto& s : salts_) s = rng();
      break;
    case LshFamilyKind::BitSampling:
      coords_.resize(count_);
      for (auto& c : coords_) c = static_cast<std::uint32_t>(std::uniform_int_distribution<std::size_t>(0, dim_ - 1)(rng));
      break;
    case LshFamilyKind::PStable:
      proj_.resize(count_ * dim_);
      offsets_.resize(count_);
      for (std::size_t j = 0; j < count_; ++j) {
        for (std::size_t i = 0; i < dim_; ++i) proj_[j * dim_ + i] = stable_sample(cfg.p, rng);
        offsets_[j] = std::uniform_real_distribution<double>(0.0, width_)(rng);
      }
      break;
  }
}

std::uint64_t HashFunctions::component(const Payload& x, std::size_t j) const {
  switch (family_) {
    case LshFamilyKind::MinHash: {
      std::uint64_t best = ~std::uint64_t{0};
      for (std::uint32_t e : std::get<ElementSet>(x).elements) best = std::min(best, mix64(e ^ salts_[j]));
      return best;
    }
    case LshFamilyKind::BitSampling:
      return std::get<BitVector>(x).bits[coords_[j]];
    case LshFamilyKind::PStable: {
      const auto& v = std::get<DenseVector>(x).values;
      double dot = offsets_[j];
      for (std::size_t i = 0; i < dim_; ++i) dot += proj_[j * dim_ + i] * v[i];
      return static_cast<std::uint64_t>(static_cast<std::int64_t>(std::floor(dot / width_)));
    }
  }
  return 0;
}

std::pair<double, double> family_probabilities(const MetricConfig& cfg, double r, const LshOptions& opt,
                                               std::uint64_t seed) {
  const double far = opt.c * r;
  switch (family_for(cfg)) {
    case LshFamilyKind::MinHash:
      if (!(far < 1.0)) throw ConfigError("lsh: MinHash needs c r < 1");
      return {1.0 - r, 1.0 - far};
    case LshFamilyKind::BitSampling: {
      const double d = static_cast<double>(cfg.dim);
      if (!(far < d)) throw ConfigError("lsh: bit sampling needs c r < dimension");
      return {1.0 - r / d, 1.0 - far / d};
    }
    case LshFamilyKind::PStable: break;
  }
  // Collision probability depends only on the lp distance, so pairs x, x + u*e
  // with a unit direction e are representative. Each draw uses a fresh function.
  const double width = opt.width_factor * r;
  std::mt19937_64 rng(seed);
  const std::size_t draws = opt.calibration_draws;
  HashFunctions fns(cfg, LshFamilyKind::PStable, draws, width, rng());
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto measure = [&](double u) {
    std::size_t hits = 0;
    for (std::size_t j = 0; j < draws; ++j) {
      DenseVector x;
      DenseVector e;
      double norm = 0.0;
      for (std::size_t i = 0; i < cfg.dim; ++i) {
        x.values.push_back(gauss(rng) * 10.0 * r);
        e.values.push_back(gauss(rng));
        norm += std::pow(std::abs(e.values.back()), cfg.p);
      }
      norm = std::pow(norm, 1.0 / cfg.p);
      DenseVector y = x;
      for (std::size_t i = 0; i < cfg.dim; ++i) y.values[i] += u * e.values[i] / norm;
      hits += fns.component(x, j) == fns.component(y, j);
    }
    return static_cast<double>(hits) / static_cast<double>(draws);
  };
  return {measure(r), measure(far)};
}

namespace {

std::vector<std::uint64_t> table_keys(const HashFunctions& fns, const Payload& x, std::size_t s, std::size_t t) {
  std::vector<std::uint64_t> keys(s);
  for (std::size_t i = 0; i < s; ++i) {
    std::uint64_t h = mix64(i + 0x51ed2701f3a5c7b9ULL);
    for (std::size_t j = 0; j < t; ++j) h = mix64(h ^ fns.component(x, i * t + j));
    keys[i] = h;
  }
  return keys;
}

LshBuildInfo make_info(const MetricConfig& cfg, double r, std::size_t n_bound, const LshOptions& opt,
                       std::uint64_t seed) {
  LshBuildInfo info;
  info.family = family_for(cfg);
  info.r = r;
  info.c = opt.c;
  info.width = info.family == LshFamilyKind::PStable ? opt.width_factor * r : 0.0;
  info.n_bound = n_bound;
  info.seed = seed;
  const auto [p1, p2] = family_probabilities(cfg, r, opt, derive_seed(seed, SeedDomain::Calibration, 0));
  info.params = lsh_parameters(n_bound, opt.delta, p1, p2);
  return info;
}

}  // namespace

BucketIndex::BucketIndex(const MetricSpace& space, double r, std::size_t n_bound, const LshOptions& opt,
                         std::uint64_t seed)
    : space_(space),
      r_(r),
      c_(opt.c),
      info_(make_info(space.config(), r, n_bound, opt, seed)),
      functions_(space.config(), info_.family, info_.params.s * info_.params.t, info_.width,
                 derive_seed(seed, SeedDomain::Lsh, 0)),
      tables_(info_.params.s) {
  if (!(opt.c >= 1.0)) throw ConfigError("lsh: c must be at least 1");
}

const std::vector<std::uint64_t>& BucketIndex::bucket_keys(PointId v) const {
  auto it = keys_.find(v);
  if (it != keys_.end()) return it->second;
  auto keys = table_keys(functions_, space_.payload(v), info_.params.s, info_.params.t);
  return keys_.emplace(v, std::move(keys)).first->second;
}

bool BucketIndex::collide(PointId u, PointId v) const {
  const auto& a = bucket_keys(u);
  const auto& b = bucket_keys(v);
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] == b[i]) return true;
  return false;
}

void BucketIndex::insert(PointId v, Rank rank) {
  if (!ranks_.try_emplace(v, rank).second) {
    throw std::logic_error("bucket index: vertex " + std::to_string(v) + " already present");
  }
  const auto& keys = bucket_keys(v);
  for (std::size_t i = 0; i < tables_.size(); ++i) tables_[i][keys[i]].insert(rank);
}

void BucketIndex::erase(PointId v) {
  auto it = ranks_.find(v);
  if (it == ranks_.end()) throw std::logic_error("bucket index: vertex " + std::to_string(v) + " not present");
  const auto& keys = bucket_keys(v);
  for (std::size_t i = 0; i < tables_.size(); ++i) {
    auto bucket = tables_[i].find(keys[i]);
    bucket->second.erase(it->second);
    if (bucket->second.empty()) tables_[i].erase(bucket);
  }
  ranks_.erase(it);
}

namespace {

struct Cursor {
  std::set<Rank>::const_iterator it;
  std::set<Rank>::const_iterator end;
};

struct CursorAfter {
  bool operator()(const Cursor& a, const Cursor& b) const { return *b.it < *a.it; }
};

}  // namespace

std::optional<PointId> BucketIndex::query_top(PointId v) {
  const auto& keys = bucket_keys(v);
  std::priority_queue<Cursor, std::vector<Cursor>, CursorAfter> heap;
  for (std::size_t i = 0; i < tables_.size(); ++i) {
    auto bucket = tables_[i].find(keys[i]);
    if (bucket != tables_[i].end()) heap.push({bucket->second.begin(), bucket->second.end()});
  }
  std::unordered_set<PointId> seen;
  const double far = c_ * r_;
  while (!heap.empty()) {
    Cursor cur = heap.top();
    heap.pop();
    const PointId u = cur.it->id;
    if (++cur.it != cur.end) heap.push(cur);
    if (u == v || !seen.insert(u).second) continue;
    ++queries_;
    if (space_.distance(v, u) <= far) return u;
    ++wasted_;
  }
  return std::nullopt;
}

std::vector<PointId> BucketIndex::query_all(PointId v) {
  const auto& keys = bucket_keys(v);
  std::vector<Rank> found;
  std::unordered_set<PointId> seen;
  const double far = c_ * r_;
  for (std::size_t i = 0; i < tables_.size(); ++i) {
    auto bucket = tables_[i].find(keys[i]);
    if (bucket == tables_[i].end()) continue;
    for (const Rank& u : bucket->second) {
      if (u.id == v || !seen.insert(u.id).second) continue;
      ++queries_;
      if (space_.distance(v, u.id) <= far) {
        found.push_back(u);
      } else {
        ++wasted_;
      }
    }
  }
  std::sort(found.begin(), found.end());
  std::vector<PointId> out;
  out.reserve(found.size());
  for (const Rank& u : found) out.push_back(u.id);
  return out;
}

bool BucketIndex::adjacent(PointId u, PointId v) const {
  return u != v && collide(u, v) && space_.distance_uncounted(u, v) <= c_ * r_;
}

}  // namespace dynkc
