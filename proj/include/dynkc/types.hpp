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

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace dynkc {

using PointId = std::uint64_t;

/// Raised for malformed metric or engine configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for ill-formed update streams (double insert, unknown delete, parse errors).
class StreamError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class UpdateKind : std::uint8_t { Insert, Delete };

/// Random priority of a vertex. Ordered by value, ties broken by id, so the
/// order over live vertices is always total.
struct Rank {
  std::uint64_t value = 0;
  PointId id = 0;

  friend constexpr auto operator<=>(const Rank&, const Rank&) = default;
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed domains for counter-based splitting of one master seed.
enum class SeedDomain : std::uint64_t {
  Rank = 1,
  Lsh = 2,
  Restart = 3,
  Calibration = 4,
  Generator = 5,
};

/// Derives an independent child seed from (master, domain, index).
constexpr std::uint64_t derive_seed(std::uint64_t master, SeedDomain domain,
                                    std::uint64_t index) noexcept {
  std::uint64_t h = mix64(master);
  h = mix64(h ^ (static_cast<std::uint64_t>(domain) * 0xd6e8feb86659fd93ULL));
  return mix64(h ^ (index * 0xa0761d6478bd642fULL));
}

}  // namespace dynkc
