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

#include <cstdint>
#include <string_view>
#include <vector>

#include "smisel/smi.hpp"

namespace smisel {

// Cardinality-constrained greedy maximizers over any incremental
// objective. Ties always break toward the smallest candidate index, so
// naive and lazy greedy produce identical selections on submodular
// objectives and runs are reproducible across worker counts.

struct GreedyResult {
  std::vector<std::size_t> selected;  // in selection order
  std::vector<double> gains;          // committed marginal gains, per step
  std::uint64_t evals = 0;            // marginal-gain evaluations performed
};

/// Evaluates every remaining candidate each step. Gain evaluations may
/// be spread over `jobs` threads; the winner is reduced by
/// (gain, -index) and does not depend on the thread count.
GreedyResult naive_greedy(IncrementalObjective& f,
                          std::vector<std::size_t> candidates,
                          std::size_t budget, int jobs = 1);

/// Priority-queue greedy with stale upper bounds; entries record the
/// commit count at which they were scored and are re-evaluated on pop
/// when stale. Output-identical to naive_greedy on submodular
/// objectives, with evals <= naive's.
GreedyResult lazy_greedy(IncrementalObjective& f,
                         std::vector<std::size_t> candidates,
                         std::size_t budget);

/// Per-step sample size ceil((n/budget) * ln(1/epsilon)).
std::size_t stochastic_sample_size(std::size_t n, std::size_t budget,
                                   double epsilon);

/// Each step scores a uniform seeded sample (without replacement) of the
/// unselected pool and commits the best of the sample. Deterministic
/// given the seed for any `jobs`. Requires 0 < epsilon < 1.
GreedyResult stochastic_greedy(IncrementalObjective& f,
                               std::vector<std::size_t> candidates,
                               std::size_t budget, double epsilon,
                               std::uint64_t seed, int jobs = 1);

enum class MaximizerKind { kAuto, kNaive, kLazy, kStochastic };

MaximizerKind maximizer_from_name(std::string_view name);
std::string maximizer_name(MaximizerKind kind);

/// kAuto resolves to lazy greedy up to 10^4 candidates and stochastic
/// greedy above.
GreedyResult run_maximizer(MaximizerKind kind, IncrementalObjective& f,
                           std::vector<std::size_t> candidates,
                           std::size_t budget, double epsilon,
                           std::uint64_t seed, int jobs = 1);

}  // namespace smisel
