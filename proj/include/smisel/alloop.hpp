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
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "smisel/acquisition.hpp"
#include "smisel/scenario.hpp"

namespace smisel {

// Targeted active-learning loop. Each round: retrain the probe from
// scratch on L, take the misclassified subset of the target pool as the
// query set, select a batch from U with the configured strategy, reveal
// its labels, fold it into L, and grow T with the rare-class part of
// the batch. Metrics are recorded with that round's probe (trained
// before the round's augmentation).

struct RoundMetrics {
  int round = 0;  // 1-based
  double overall_accuracy = 0.0;
  double rare_class_accuracy = 0.0;  // unweighted mean over rare classes
  std::vector<std::size_t> per_class_selection_counts;
  std::size_t cumulative_rare_selected = 0;
  std::size_t t_hat_size = 0;
  bool truncated = false;  // U exhausted before the full budget
};

struct AlConfig {
  StrategyKind strategy = StrategyKind::kRandom;
  StrategyParams params;
  ProbeHyper probe_hyper;
  std::size_t rounds = 1;
  std::size_t budget = 0;
  std::uint64_t seed = 0;
};

std::vector<RoundMetrics> run_al(const Scenario& scenario,
                                 const AlConfig& config);

struct EvalResult {
  double overall = 0.0;
  double rare_mean = 0.0;
  std::vector<double> per_class;
};

/// Accuracy on a labeled (balanced) test set. rare_mean is the
/// unweighted mean of the per-class accuracies over rare_classes; every
/// rare class must appear in the test set.
EvalResult evaluate_probe(const LinearProbe& probe, const EmbeddingSet& test,
                          std::span<const std::int32_t> rare_classes);

// One CSV row per round. The first line is a schema marker comment.
inline constexpr std::string_view kRunCsvSchema = "# smisel-run v1";

void write_run_csv(std::ostream& out, const std::string& run_id,
                   const std::string& strategy, std::uint64_t seed,
                   std::span<const RoundMetrics> rounds, int num_classes);

struct RunRecord {
  std::string run_id;
  std::string strategy;
  std::uint64_t seed = 0;
  std::vector<RoundMetrics> rounds;
};

RunRecord read_run_csv(std::istream& in);

}  // namespace smisel
