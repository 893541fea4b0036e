// Copyright 2026 The smisel Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

// Deterministic randomness helpers. mt19937_64 output is pinned by the
// standard; the distributions below are hand-rolled because the std::
// distribution algorithms are implementation-defined and we promise
// bit-identical runs for a given seed.

namespace smisel {

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform_u01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Unbiased uniform integer in [0, n). Rejection sampling.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - max % n;
  std::uint64_t v = rng();
  while (v >= limit) v = rng();
  return v % n;
}

/// Standard normal draw (Box-Muller, cosine branch only).
inline double normal_sample(Rng& rng) {
  double u1 = uniform_u01(rng);
  while (u1 == 0.0) u1 = uniform_u01(rng);
  const double u2 = uniform_u01(rng);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

/// splitmix64 mix step; used to derive independent per-round seeds.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// First `k` entries of a seeded uniform permutation of `pool`
/// (partial Fisher-Yates). `pool` is taken by value on purpose.
inline std::vector<std::size_t> sample_without_replacement(
    Rng& rng, std::vector<std::size_t> pool, std::size_t k) {
  if (k > pool.size()) k = pool.size();
  for (std::size_t t = 0; t < k; ++t) {
    const std::size_t j = t + uniform_index(rng, pool.size() - t);
    std::swap(pool[t], pool[j]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace smisel
