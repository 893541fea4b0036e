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

#include "smisel/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "smisel/rng.hpp"

namespace smisel {

namespace {

struct NameEntry {
  std::string_view name;
  StrategyKind kind;
};

constexpr NameEntry kNames[] = {
    {"gcmi", StrategyKind::kGcmi},
    {"flvmi", StrategyKind::kFlvmi},
    {"flqmi", StrategyKind::kFlqmi},
    {"logdetmi", StrategyKind::kLogDetMi},
    {"entropy", StrategyKind::kEntropy},
    {"leastconf", StrategyKind::kLeastConfidence},
    {"margin", StrategyKind::kMargin},
    {"random", StrategyKind::kRandom},
    {"coreset", StrategyKind::kCoreset},
    {"badge", StrategyKind::kBadge},
};

}  // namespace

StrategyKind strategy_from_name(std::string_view name) {
  for (const auto& e : kNames)
    if (e.name == name) return e.kind;
  throw std::invalid_argument("unknown strategy: " + std::string(name));
}

std::string strategy_name(StrategyKind kind) {
  for (const auto& e : kNames)
    if (e.kind == kind) return std::string(e.name);
  throw std::logic_error("unreachable");
}

std::vector<std::string> strategy_names() {
  std::vector<std::string> out;
  for (const auto& e : kNames) out.emplace_back(e.name);
  return out;
}

bool strategy_is_smi(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kGcmi:
    case StrategyKind::kFlvmi:
    case StrategyKind::kFlqmi:
    case StrategyKind::kLogDetMi:
      return true;
    default:
      return false;
  }
}

SmiKind strategy_smi_kind(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kGcmi: return SmiKind::kGcmi;
    case StrategyKind::kFlvmi: return SmiKind::kFlvmi;
    case StrategyKind::kFlqmi: return SmiKind::kFlqmi;
    case StrategyKind::kLogDetMi: return SmiKind::kLogDetMi;
    default:
      throw std::invalid_argument("strategy " + strategy_name(kind) +
                                  " is not an SMI function");
  }
}

namespace {

/// Positions of the `budget` best scores; ties toward the smaller index.
std::vector<std::size_t> top_by_score(const std::vector<double>& scores,
                                      std::size_t budget) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  budget = std::min(budget, order.size());
  std::partial_sort(order.begin(),
                    order.begin() + static_cast<std::ptrdiff_t>(budget),
                    order.end(), [&](std::size_t a, std::size_t b) {
                      return scores[a] > scores[b] ||
                             (scores[a] == scores[b] && a < b);
                    });
  order.resize(budget);
  return order;
}

}  // namespace

std::vector<std::size_t> select_smi(SmiKind kind, const LinearProbe& probe,
                                    const EmbeddingSet& unlabeled,
                                    const EmbeddingSet& target,
                                    std::size_t budget,
                                    const StrategyParams& params,
                                    std::uint64_t seed) {
  if (target.size() == 0)
    throw std::invalid_argument("select_smi: empty query set");

  const GradientEmbedding ground_grads =
      gradient_embeddings(probe, unlabeled, GradientLabels::kHypothesized);
  const GradientEmbedding query_grads =
      gradient_embeddings(probe, target, params.query_labels);

  const KernelNeeds needs = smi_kernel_needs(kind);
  Kernel cross = build_kernel(ground_grads.points, query_grads.points,
                              params.metric, params.jobs);
  std::optional<Kernel> ground, query;
  if (needs.ground)
    ground = build_kernel(ground_grads.points, ground_grads.points,
                          params.metric, params.jobs);
  if (needs.query)
    query = build_kernel(query_grads.points, query_grads.points,
                         params.metric, params.jobs);

  if (params.metric == Metric::kCosine) {
    // One consistent scale across the whole kernel family: if any piece
    // has a negative entry, shift every piece.
    const bool any_negative =
        cross.values().minCoeff() < 0.0 ||
        (ground && ground->values().minCoeff() < 0.0) ||
        (query && query->values().minCoeff() < 0.0);
    if (any_negative) {
      cross = shift_to_nonneg(cross, /*force=*/true);
      if (ground) ground = shift_to_nonneg(*ground, /*force=*/true);
      if (query) query = shift_to_nonneg(*query, /*force=*/true);
    }
  }
  if (kind == SmiKind::kLogDetMi) {
    ground = regularize_spd(*ground, params.ridge);
    query = regularize_spd(*query, params.ridge);
  }

  SmiKernels kernels{ground ? &*ground : nullptr, &cross,
                     query ? &*query : nullptr};
  auto objective = make_smi_function(kind, kernels);

  std::vector<std::size_t> candidates(unlabeled.size());
  std::iota(candidates.begin(), candidates.end(), std::size_t{0});
  const GreedyResult result =
      run_maximizer(params.maximizer, *objective, std::move(candidates),
                    budget, params.epsilon, seed, params.jobs);
  return result.selected;
}

std::vector<std::size_t> select_entropy(const LinearProbe& probe,
                                        const EmbeddingSet& unlabeled,
                                        std::size_t budget) {
  const Eigen::MatrixXd proba = predict_proba(probe, unlabeled);
  std::vector<double> scores(static_cast<std::size_t>(proba.rows()));
  for (Eigen::Index i = 0; i < proba.rows(); ++i) {
    double h = 0.0;
    for (Eigen::Index c = 0; c < proba.cols(); ++c)
      h -= proba(i, c) * std::log(proba(i, c));
    scores[static_cast<std::size_t>(i)] = h;
  }
  return top_by_score(scores, budget);
}

std::vector<std::size_t> select_least_confidence(const LinearProbe& probe,
                                                 const EmbeddingSet& unlabeled,
                                                 std::size_t budget) {
  const Eigen::MatrixXd proba = predict_proba(probe, unlabeled);
  std::vector<double> scores(static_cast<std::size_t>(proba.rows()));
  for (Eigen::Index i = 0; i < proba.rows(); ++i)
    scores[static_cast<std::size_t>(i)] = 1.0 - proba.row(i).maxCoeff();
  return top_by_score(scores, budget);
}

std::vector<std::size_t> select_margin(const LinearProbe& probe,
                                       const EmbeddingSet& unlabeled,
                                       std::size_t budget) {
  const Eigen::MatrixXd proba = predict_proba(probe, unlabeled);
  std::vector<double> scores(static_cast<std::size_t>(proba.rows()));
  for (Eigen::Index i = 0; i < proba.rows(); ++i) {
    double first = -1.0, second = -1.0;
    for (Eigen::Index c = 0; c < proba.cols(); ++c) {
      const double p = proba(i, c);
      if (p > first) {
        second = first;
        first = p;
      } else if (p > second) {
        second = p;
      }
    }
    // Smallest top-two gap first.
    scores[static_cast<std::size_t>(i)] =
        proba.cols() < 2 ? 0.0 : -(first - second);
  }
  return top_by_score(scores, budget);
}

std::vector<std::size_t> select_random(std::size_t pool_size,
                                       std::size_t budget,
                                       std::uint64_t seed) {
  std::vector<std::size_t> pool(pool_size);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  Rng rng(seed);
  return sample_without_replacement(rng, std::move(pool), budget);
}

std::vector<std::size_t> select_coreset(const EmbeddingSet& labeled,
                                        const EmbeddingSet& unlabeled,
                                        std::size_t budget) {
  if (labeled.size() > 0 && labeled.dim() != unlabeled.dim())
    throw std::invalid_argument("select_coreset: dimension mismatch");
  const auto n = static_cast<Eigen::Index>(unlabeled.size());

  // Squared distance to the nearest covered point.
  Eigen::VectorXd min_sq =
      Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  for (std::size_t l = 0; l < labeled.size(); ++l) {
    const auto center = labeled.vectors.row(static_cast<Eigen::Index>(l));
    for (Eigen::Index i = 0; i < n; ++i)
      min_sq(i) = std::min(
          min_sq(i), (unlabeled.vectors.row(i) - center).squaredNorm());
  }
  if (labeled.size() == 0) min_sq.setConstant(0.0);

  std::vector<std::size_t> chosen;
  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  const std::size_t steps = std::min(budget, static_cast<std::size_t>(n));
  for (std::size_t step = 0; step < steps; ++step) {
    Eigen::Index best = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (taken[static_cast<std::size_t>(i)]) continue;
      if (best < 0 || min_sq(i) > min_sq(best)) best = i;
    }
    // With an empty cover everything is at distance 0; farthest-first
    // then degenerates to picking the smallest index.
    chosen.push_back(static_cast<std::size_t>(best));
    taken[static_cast<std::size_t>(best)] = true;
    const auto center = unlabeled.vectors.row(best);
    for (Eigen::Index i = 0; i < n; ++i)
      min_sq(i) = std::min(
          min_sq(i), (unlabeled.vectors.row(i) - center).squaredNorm());
  }
  return chosen;
}

std::vector<std::size_t> select_badge(const LinearProbe& probe,
                                      const EmbeddingSet& unlabeled,
                                      std::size_t budget, std::uint64_t seed) {
  const GradientEmbedding grads =
      gradient_embeddings(probe, unlabeled, GradientLabels::kHypothesized);
  const Eigen::MatrixXd& g = grads.points.vectors;
  const auto n = g.rows();

  // D^2 mass: squared norm from the origin for the first center,
  // squared distance to the nearest chosen center afterwards.
  Eigen::VectorXd mass = g.rowwise().squaredNorm();
  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  std::vector<std::size_t> chosen;
  Rng rng(seed);
  const std::size_t steps = std::min(budget, static_cast<std::size_t>(n));
  while (chosen.size() < steps) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (!taken[static_cast<std::size_t>(i)]) total += mass(i);

    Eigen::Index pick = -1;
    if (total <= 0.0) {
      // No mass left (duplicates/zero gradients): smallest open index.
      for (Eigen::Index i = 0; i < n && pick < 0; ++i)
        if (!taken[static_cast<std::size_t>(i)]) pick = i;
    } else {
      const double x = uniform_u01(rng) * total;
      double cum = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (taken[static_cast<std::size_t>(i)]) continue;
        cum += mass(i);
        if (x < cum) {
          pick = i;
          break;
        }
      }
      if (pick < 0) {  // x == total after rounding; take the last open
        for (Eigen::Index i = n - 1; i >= 0 && pick < 0; --i)
          if (!taken[static_cast<std::size_t>(i)]) pick = i;
      }
    }

    chosen.push_back(static_cast<std::size_t>(pick));
    taken[static_cast<std::size_t>(pick)] = true;
    const auto center = g.row(pick);
    for (Eigen::Index i = 0; i < n; ++i)
      mass(i) = std::min(mass(i), (g.row(i) - center).squaredNorm());
  }
  return chosen;
}

std::vector<std::size_t> select_batch(StrategyKind kind,
                                      const SelectionContext& ctx,
                                      const StrategyParams& params) {
  if (ctx.unlabeled == nullptr)
    throw std::invalid_argument("select_batch: missing unlabeled pool");
  const std::size_t budget = std::min(ctx.budget, ctx.unlabeled->size());

  if (strategy_is_smi(kind)) {
    if (ctx.probe == nullptr || ctx.target == nullptr)
      throw std::invalid_argument("select_batch: SMI needs probe and target");
    return select_smi(strategy_smi_kind(kind), *ctx.probe, *ctx.unlabeled,
                      *ctx.target, budget, params, ctx.seed);
  }
  if (ctx.probe == nullptr && kind != StrategyKind::kRandom &&
      kind != StrategyKind::kCoreset)
    throw std::invalid_argument("select_batch: strategy needs a probe");
  switch (kind) {
    case StrategyKind::kEntropy:
      return select_entropy(*ctx.probe, *ctx.unlabeled, budget);
    case StrategyKind::kLeastConfidence:
      return select_least_confidence(*ctx.probe, *ctx.unlabeled, budget);
    case StrategyKind::kMargin:
      return select_margin(*ctx.probe, *ctx.unlabeled, budget);
    case StrategyKind::kRandom:
      return select_random(ctx.unlabeled->size(), budget, ctx.seed);
    case StrategyKind::kCoreset:
      if (ctx.labeled == nullptr)
        throw std::invalid_argument("select_batch: coreset needs labeled set");
      return select_coreset(*ctx.labeled, *ctx.unlabeled, budget);
    case StrategyKind::kBadge:
      return select_badge(*ctx.probe, *ctx.unlabeled, budget, ctx.seed);
    default:
      throw std::logic_error("unreachable");
  }
}

}  // namespace smisel
