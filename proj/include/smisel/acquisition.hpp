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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "smisel/embedding.hpp"
#include "smisel/maximizer.hpp"
#include "smisel/model.hpp"

namespace smisel {

// Uniform interface over batch acquisition strategies: the four SMI
// instantiations plus uncertainty (entropy, least confidence, margin),
// diversity (coreset, badge) and random baselines. Every strategy
// returns exactly min(budget, |U|) distinct positions into the
// unlabeled pool and is deterministic given its seed.

enum class StrategyKind {
  kGcmi,
  kFlvmi,
  kFlqmi,
  kLogDetMi,
  kEntropy,
  kLeastConfidence,
  kMargin,
  kRandom,
  kCoreset,
  kBadge,
};

/// Stable config names: "gcmi", "flvmi", "flqmi", "logdetmi", "entropy",
/// "leastconf", "margin", "random", "coreset", "badge".
StrategyKind strategy_from_name(std::string_view name);
std::string strategy_name(StrategyKind kind);
std::vector<std::string> strategy_names();

bool strategy_is_smi(StrategyKind kind);
SmiKind strategy_smi_kind(StrategyKind kind);

struct StrategyParams {
  Metric metric = Metric::kCosine;
  MaximizerKind maximizer = MaximizerKind::kAuto;
  double epsilon = 0.1;
  double ridge = 1e-3;
  // Labels used for the query side's gradients; the unlabeled side
  // always uses hypothesized labels.
  GradientLabels query_labels = GradientLabels::kTrue;
  int jobs = 1;
};

/// Immutable view of one selection round.
struct SelectionContext {
  const LinearProbe* probe = nullptr;
  const EmbeddingSet* unlabeled = nullptr;  // U (labels hidden)
  const EmbeddingSet* labeled = nullptr;    // L features (coreset)
  const EmbeddingSet* target = nullptr;     // query points T-hat
  std::size_t budget = 0;
  std::uint64_t seed = 0;
};

std::vector<std::size_t> select_batch(StrategyKind kind,
                                      const SelectionContext& ctx,
                                      const StrategyParams& params = {});

/// Builds hypothesized-label gradient embeddings for U and query-side
/// gradients for the target set, materializes exactly the kernels the
/// SMI kind requires, and greedily maximizes I_f(A; target).
std::vector<std::size_t> select_smi(SmiKind kind, const LinearProbe& probe,
                                    const EmbeddingSet& unlabeled,
                                    const EmbeddingSet& target,
                                    std::size_t budget,
                                    const StrategyParams& params = {},
                                    std::uint64_t seed = 0);

/// Top budget by predictive entropy -sum_c p log p.
std::vector<std::size_t> select_entropy(const LinearProbe& probe,
                                        const EmbeddingSet& unlabeled,
                                        std::size_t budget);

/// Top budget by 1 - max_c p_c.
std::vector<std::size_t> select_least_confidence(const LinearProbe& probe,
                                                 const EmbeddingSet& unlabeled,
                                                 std::size_t budget);

/// Top budget by smallest gap between the two largest probabilities.
std::vector<std::size_t> select_margin(const LinearProbe& probe,
                                       const EmbeddingSet& unlabeled,
                                       std::size_t budget);

/// Seeded uniform sample without replacement.
std::vector<std::size_t> select_random(std::size_t pool_size,
                                       std::size_t budget,
                                       std::uint64_t seed);

/// Farthest-first traversal on Euclidean feature distance: repeatedly
/// picks the unlabeled point farthest from the covered set
/// (labeled + already selected).
std::vector<std::size_t> select_coreset(const EmbeddingSet& labeled,
                                        const EmbeddingSet& unlabeled,
                                        std::size_t budget);

/// k-means++ seeding (D^2 sampling) over hypothesized-label gradient
/// embeddings; the first center is drawn with probability proportional
/// to its squared gradient norm.
std::vector<std::size_t> select_badge(const LinearProbe& probe,
                                      const EmbeddingSet& unlabeled,
                                      std::size_t budget, std::uint64_t seed);

}  // namespace smisel
