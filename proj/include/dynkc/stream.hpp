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
#include <iosfwd>
#include <string>
#include <vector>

#include "dynkc/metric.hpp"
#include "dynkc/types.hpp"

namespace dynkc {

struct StreamOp {
  UpdateKind kind = UpdateKind::Insert;
  PointId id = 0;
  Payload payload;  // unused for deletions
};

struct Stream {
  MetricConfig config;
  std::vector<StreamOp> ops;
};

/// Reads the line format:
///   H lp dim=<d> p=<p> rmin=<f> rmax=<f>
///   H hamming bits=<b> rmin=<f> rmax=<f>
///   H jaccard universe=<u> rmin=<f> rmax=<f>
///   H matrix file=<path> [rmin=<f> rmax=<f>]
///   + <id> <payload...>
///   - <id>
/// Blank lines and lines starting with '#' are skipped. Relative matrix paths
/// resolve against `base_dir`. Throws StreamError with the line number.
Stream parse_stream(std::istream& in, const std::string& base_dir = "");
Stream load_stream(const std::string& path);

std::string header_line(const MetricConfig& cfg);
void write_stream(std::ostream& out, const Stream& stream);
void save_stream(const std::string& path, const Stream& stream);

/// Throws StreamError on a double insert, a dangling delete, or a bad payload.
void validate_stream(const Stream& stream);
/// Largest number of simultaneously active points.
std::size_t max_active(const Stream& stream);

enum class GeneratorKind { UniformChurn, SlidingWindow, PlantedClusters, AdversarialClusterDeletion };
std::string to_string(GeneratorKind kind);
GeneratorKind generator_from_string(const std::string& name);

struct StreamSpec {
  GeneratorKind kind = GeneratorKind::UniformChurn;
  /// Bound on simultaneously active points (total points for the adversarial kind).
  std::size_t n = 64;
  /// Stream length; 0 means 4n.
  std::size_t m = 0;
  /// Clusters for the planted and adversarial kinds.
  std::size_t k = 4;
  std::uint64_t seed = 1;
  MetricKind metric = MetricKind::Lp;
  /// Dimension, bit count or universe size.
  std::size_t dim = 2;
  double p = 2.0;
  /// Coordinate range [0, side] for lp points.
  std::uint32_t side = 1000;
  /// Sliding-window length; 0 means n.
  std::size_t window = 0;
};

/// Deterministic given the spec. The header's r_min sits strictly below every
/// nonzero distance the generator can produce.
Stream generate(const StreamSpec& spec);

}  // namespace dynkc
