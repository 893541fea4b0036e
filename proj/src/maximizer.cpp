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

#include "smisel/maximizer.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <queue>
#include <stdexcept>
#include <thread>

#include "smisel/rng.hpp"

namespace smisel {

MaximizerKind maximizer_from_name(std::string_view name) {
  if (name == "auto") return MaximizerKind::kAuto;
  if (name == "naive") return MaximizerKind::kNaive;
  if (name == "lazy") return MaximizerKind::kLazy;
  if (name == "stochastic") return MaximizerKind::kStochastic;
  throw std::invalid_argument("unknown maximizer: " + std::string(name));
}

std::string maximizer_name(MaximizerKind kind) {
  switch (kind) {
    case MaximizerKind::kAuto: return "auto";
    case MaximizerKind::kNaive: return "naive";
    case MaximizerKind::kLazy: return "lazy";
    case MaximizerKind::kStochastic: return "stochastic";
  }
  throw std::logic_error("unreachable");
}

namespace {

std::vector<std::size_t> sorted_unique(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

/// Scores every candidate into `out` (chunked over `jobs` threads) and
/// returns the position of the (gain, -index) maximum. The reduction
/// runs over the filled vector, so the result does not depend on the
/// thread count.
std::size_t score_and_pick(const IncrementalObjective& f,
                           std::span<const std::size_t> candidates,
                           std::vector<double>& out, int jobs) {
  out.resize(candidates.size());
  const int workers = std::max(
      1, std::min<int>(jobs, static_cast<int>(candidates.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < candidates.size(); ++i)
      out[i] = f.marginal_gain(candidates[i]);
  } else {
    std::vector<std::thread> pool;
    std::mutex error_mutex;
    std::exception_ptr error;
    const std::size_t chunk =
        (candidates.size() + static_cast<std::size_t>(workers) - 1) /
        static_cast<std::size_t>(workers);
    for (int w = 0; w < workers; ++w) {
      const std::size_t begin = static_cast<std::size_t>(w) * chunk;
      const std::size_t end = std::min(candidates.size(), begin + chunk);
      if (begin >= end) break;
      pool.emplace_back([&, begin, end] {
        try {
          for (std::size_t i = begin; i < end; ++i)
            out[i] = f.marginal_gain(candidates[i]);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (out[i] > out[best] ||
        (out[i] == out[best] && candidates[i] < candidates[best]))
      best = i;
  }
  return best;
}

void erase_sorted(std::vector<std::size_t>& pool, std::size_t idx) {
  const auto it = std::lower_bound(pool.begin(), pool.end(), idx);
  pool.erase(it);
}

}  // namespace

GreedyResult naive_greedy(IncrementalObjective& f,
                          std::vector<std::size_t> candidates,
                          std::size_t budget, int jobs) {
  GreedyResult result;
  std::vector<std::size_t> pool = sorted_unique(std::move(candidates));
  std::vector<double> gains;
  while (result.selected.size() < budget && !pool.empty()) {
    const std::size_t pos = score_and_pick(f, pool, gains, jobs);
    result.evals += pool.size();
    const std::size_t winner = pool[pos];
    f.commit(winner);
    result.selected.push_back(winner);
    result.gains.push_back(gains[pos]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pos));
  }
  return result;
}

GreedyResult lazy_greedy(IncrementalObjective& f,
                         std::vector<std::size_t> candidates,
                         std::size_t budget) {
  GreedyResult result;
  const std::vector<std::size_t> pool = sorted_unique(std::move(candidates));
  if (budget == 0 || pool.empty()) return result;

  struct Entry {
    double gain;
    std::size_t index;
    std::size_t stamp;  // commit count at evaluation time
  };
  // Max-heap by gain, ties toward the smaller index.
  const auto lower_priority = [](const Entry& a, const Entry& b) {
    return a.gain < b.gain || (a.gain == b.gain && a.index > b.index);
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(lower_priority)>
      heap(lower_priority);

  for (std::size_t idx : pool) {
    heap.push({f.marginal_gain(idx), idx, 0});
    ++result.evals;
  }

  std::size_t commits = 0;
  while (commits < budget && !heap.empty()) {
    Entry top = heap.top();
    heap.pop();
    if (top.stamp == commits) {
      // Fresh upper bound; for submodular objectives it is the true max.
      f.commit(top.index);
      result.selected.push_back(top.index);
      result.gains.push_back(top.gain);
      ++commits;
    } else {
      top.gain = f.marginal_gain(top.index);
      top.stamp = commits;
      ++result.evals;
      heap.push(top);
    }
  }
  return result;
}

std::size_t stochastic_sample_size(std::size_t n, std::size_t budget,
                                   double epsilon) {
  if (budget == 0) return 0;
  const double raw = (static_cast<double>(n) / static_cast<double>(budget)) *
                     std::log(1.0 / epsilon);
  return static_cast<std::size_t>(std::ceil(raw));
}

GreedyResult stochastic_greedy(IncrementalObjective& f,
                               std::vector<std::size_t> candidates,
                               std::size_t budget, double epsilon,
                               std::uint64_t seed, int jobs) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("stochastic_greedy: epsilon must be in (0,1)");
  GreedyResult result;
  std::vector<std::size_t> pool = sorted_unique(std::move(candidates));
  if (budget == 0 || pool.empty()) return result;

  const std::size_t n = pool.size();
  const std::size_t sample_size =
      std::max<std::size_t>(1, stochastic_sample_size(
                                   n, std::min(budget, n), epsilon));
  Rng rng(seed);
  std::vector<double> gains;
  while (result.selected.size() < budget && !pool.empty()) {
    const std::vector<std::size_t> sample =
        sample_size >= pool.size()
            ? pool
            : sample_without_replacement(rng, pool, sample_size);
    const std::size_t pos = score_and_pick(f, sample, gains, jobs);
    result.evals += sample.size();
    const std::size_t winner = sample[pos];
    f.commit(winner);
    result.selected.push_back(winner);
    result.gains.push_back(gains[pos]);
    erase_sorted(pool, winner);
  }
  return result;
}

GreedyResult run_maximizer(MaximizerKind kind, IncrementalObjective& f,
                           std::vector<std::size_t> candidates,
                           std::size_t budget, double epsilon,
                           std::uint64_t seed, int jobs) {
  if (kind == MaximizerKind::kAuto)
    kind = candidates.size() <= 10000 ? MaximizerKind::kLazy
                                      : MaximizerKind::kStochastic;
  switch (kind) {
    case MaximizerKind::kNaive:
      return naive_greedy(f, std::move(candidates), budget, jobs);
    case MaximizerKind::kLazy:
      return lazy_greedy(f, std::move(candidates), budget);
    case MaximizerKind::kStochastic:
      return stochastic_greedy(f, std::move(candidates), budget, epsilon,
                               seed, jobs);
    case MaximizerKind::kAuto:
      break;
  }
  throw std::logic_error("unreachable");
}

}  // namespace smisel
