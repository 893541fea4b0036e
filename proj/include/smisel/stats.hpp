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

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace smisel {

// Multi-seed aggregation and the strategy-vs-strategy penalty matrix:
// for each round and ordered strategy pair (i, j), a two-tailed t-test
// on the per-seed accuracies adds 1/n_rounds to cell (i, j) when i beats
// j significantly (and to (j, i) in the opposite direction). A row with
// mostly high values marks a strategy that outperforms the others.

/// One strategy/seed accuracy curve, one value per round.
struct RunCurve {
  std::string strategy;
  std::uint64_t seed = 0;
  std::vector<double> values;
};

struct SummaryCurve {
  std::string strategy;
  std::vector<double> mean;
  std::vector<double> stddev;  // sample std (n-1); 0 for a single seed
  std::size_t num_seeds = 0;
};

/// Per-round mean and sample standard deviation per strategy. All
/// curves of one strategy must share the round count.
std::vector<SummaryCurve> summarize(std::span<const RunCurve> curves);

struct WelchResult {
  double t = 0.0;
  double dof = 0.0;
};

/// Welch's unpaired two-sample t statistic and Welch-Satterthwaite
/// degrees of freedom. Requires >= 2 samples per side and nonzero
/// pooled variance.
WelchResult welch_t(std::span<const double> xs, std::span<const double> ys);

/// Two-tailed critical value of Student's t at significance alpha.
double t_critical(double alpha, double dof);

enum class TTestKind { kWelch, kPaired };

struct PenaltyMatrix {
  std::vector<std::string> strategies;
  Eigen::MatrixXd values;  // k x k, entries are multiples of 1/n_rounds
  double alpha = 0.05;
  std::size_t n_rounds = 0;
  TTestKind test = TTestKind::kWelch;
};

/// Every strategy needs >= 2 seeds and the same round count. A round
/// where both samples have zero variance counts as significant iff the
/// means differ (the t statistic's limit); kPaired additionally requires
/// matching seed sets and pairs the samples by seed.
PenaltyMatrix penalty_matrix(std::span<const RunCurve> curves,
                             double alpha = 0.05,
                             TTestKind test = TTestKind::kWelch);

nlohmann::json penalty_matrix_to_json(const PenaltyMatrix& m);
void write_penalty_csv(std::ostream& out, const PenaltyMatrix& m);
void write_summary_csv(std::ostream& out,
                       std::span<const SummaryCurve> curves);

}  // namespace smisel
