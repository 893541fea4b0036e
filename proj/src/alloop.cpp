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

#include "smisel/alloop.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "smisel/rng.hpp"

namespace smisel {

EvalResult evaluate_probe(const LinearProbe& probe, const EmbeddingSet& test,
                          std::span<const std::int32_t> rare_classes) {
  if (!test.labels)
    throw std::invalid_argument("evaluate_probe: unlabeled test set");
  const auto& labels = *test.labels;
  const std::vector<std::int32_t> predicted = predict_labels(probe, test);

  const int num_classes =
      std::max(test.num_classes(), probe.num_classes());
  std::vector<std::size_t> total(static_cast<std::size_t>(num_classes), 0);
  std::vector<std::size_t> correct(static_cast<std::size_t>(num_classes), 0);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ++total[static_cast<std::size_t>(labels[i])];
    if (predicted[i] == labels[i]) {
      ++correct[static_cast<std::size_t>(labels[i])];
      ++hits;
    }
  }

  EvalResult result;
  result.overall =
      static_cast<double>(hits) / static_cast<double>(labels.size());
  result.per_class.resize(static_cast<std::size_t>(num_classes), 0.0);
  for (std::size_t c = 0; c < result.per_class.size(); ++c)
    if (total[c] > 0)
      result.per_class[c] =
          static_cast<double>(correct[c]) / static_cast<double>(total[c]);

  double rare_sum = 0.0;
  for (std::int32_t c : rare_classes) {
    if (c < 0 || c >= num_classes || total[static_cast<std::size_t>(c)] == 0)
      throw std::invalid_argument("evaluate_probe: rare class " +
                                  std::to_string(c) +
                                  " missing from the test set");
    rare_sum += result.per_class[static_cast<std::size_t>(c)];
  }
  result.rare_mean =
      rare_classes.empty() ? 0.0
                           : rare_sum / static_cast<double>(rare_classes.size());
  return result;
}

std::vector<RoundMetrics> run_al(const Scenario& scenario,
                                 const AlConfig& config) {
  const EmbeddingSet& data = scenario.data;
  if (!data.labels) throw std::invalid_argument("run_al: source has no labels");
  const auto& labels = *data.labels;

  std::vector<bool> is_rare(static_cast<std::size_t>(scenario.num_classes),
                            false);
  for (std::int32_t c : scenario.rare_classes)
    is_rare[static_cast<std::size_t>(c)] = true;

  std::vector<std::size_t> pool_l = scenario.split.labeled;
  std::vector<std::size_t> pool_u = scenario.split.unlabeled;
  std::vector<std::size_t> pool_t = scenario.split.target;
  const EmbeddingSet test = data.subset(scenario.split.test);

  std::vector<RoundMetrics> history;
  std::size_t cumulative_rare = 0;
  for (std::size_t round = 1; round <= config.rounds; ++round) {
    // Retrain from scratch on the current labeled pool.
    ProbeHyper hyper = config.probe_hyper;
    hyper.seed = derive_seed(config.seed, 2 * round);
    const LinearProbe probe =
        train_probe(data.subset(pool_l), scenario.num_classes, hyper);

    // Query set: the misclassified part of the target pool.
    const EmbeddingSet target_points = data.subset(pool_t);
    const std::vector<std::size_t> t_hat_local =
        misclassified_subset(probe, target_points);
    std::vector<std::size_t> t_hat_global(t_hat_local.size());
    for (std::size_t i = 0; i < t_hat_local.size(); ++i)
      t_hat_global[i] = pool_t[t_hat_local[i]];

    const EmbeddingSet u_view = data.subset(pool_u).without_labels();
    const EmbeddingSet l_features = data.subset(pool_l).without_labels();
    const EmbeddingSet query = data.subset(t_hat_global);

    SelectionContext ctx;
    ctx.probe = &probe;
    ctx.unlabeled = &u_view;
    ctx.labeled = &l_features;
    ctx.target = &query;
    ctx.budget = std::min(config.budget, pool_u.size());
    ctx.seed = derive_seed(config.seed, 2 * round + 1);

    StrategyParams params = config.params;
    const std::vector<std::size_t> batch_positions =
        pool_u.empty() || config.budget == 0
            ? std::vector<std::size_t>{}
            : select_batch(config.strategy, ctx, params);

    // Strategy output contract: distinct positions inside U, batch of
    // exactly min(budget, |U|).
    {
      std::vector<std::size_t> check = batch_positions;
      std::sort(check.begin(), check.end());
      if (check.size() != ctx.budget ||
          std::adjacent_find(check.begin(), check.end()) != check.end() ||
          (!check.empty() && check.back() >= pool_u.size()))
        throw std::logic_error("run_al: strategy returned an invalid batch");
    }

    RoundMetrics metrics;
    metrics.round = static_cast<int>(round);
    metrics.t_hat_size = t_hat_local.size();
    metrics.truncated = config.budget > pool_u.size();
    metrics.per_class_selection_counts.assign(
        static_cast<std::size_t>(scenario.num_classes), 0);

    // Reveal labels (simulation oracle) and fold the batch into L and T.
    std::vector<std::size_t> batch_global;
    batch_global.reserve(batch_positions.size());
    for (std::size_t pos : batch_positions)
      batch_global.push_back(pool_u[pos]);
    for (std::size_t g : batch_global) {
      const auto cls = static_cast<std::size_t>(labels[g]);
      ++metrics.per_class_selection_counts[cls];
      if (is_rare[cls]) {
        ++cumulative_rare;
        pool_t.push_back(g);
      }
      pool_l.push_back(g);
    }
    metrics.cumulative_rare_selected = cumulative_rare;

    std::vector<std::size_t> positions = batch_positions;
    std::sort(positions.begin(), positions.end(), std::greater<>());
    for (std::size_t pos : positions)
      pool_u.erase(pool_u.begin() + static_cast<std::ptrdiff_t>(pos));

    const EvalResult eval = evaluate_probe(probe, test, scenario.rare_classes);
    metrics.overall_accuracy = eval.overall;
    metrics.rare_class_accuracy = eval.rare_mean;
    history.push_back(std::move(metrics));

    if (pool_u.empty() && round < config.rounds && config.budget > 0) {
      history.back().truncated = true;
      break;
    }
  }
  return history;
}

// --------------------------------------------------------------------------
// CSV round trip.

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void write_run_csv(std::ostream& out, const std::string& run_id,
                   const std::string& strategy, std::uint64_t seed,
                   std::span<const RoundMetrics> rounds, int num_classes) {
  out << kRunCsvSchema << "\n";
  out << "run_id,strategy,seed,round,overall_acc,rare_acc,t_hat_size,"
         "cumulative_rare,truncated";
  for (int c = 0; c < num_classes; ++c) out << ",sel_count_" << c;
  out << "\n";
  for (const RoundMetrics& m : rounds) {
    out << run_id << ',' << strategy << ',' << seed << ',' << m.round << ','
        << format_double(m.overall_accuracy) << ','
        << format_double(m.rare_class_accuracy) << ',' << m.t_hat_size << ','
        << m.cumulative_rare_selected << ',' << (m.truncated ? 1 : 0);
    for (int c = 0; c < num_classes; ++c)
      out << ',' << m.per_class_selection_counts[static_cast<std::size_t>(c)];
    out << "\n";
  }
}

RunRecord read_run_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kRunCsvSchema)
    throw std::runtime_error("run CSV: missing schema marker \"" +
                             std::string(kRunCsvSchema) + "\"");
  if (!std::getline(in, line))
    throw std::runtime_error("run CSV: missing header row");
  const std::vector<std::string> header = split_csv_line(line);
  constexpr std::size_t kFixedColumns = 9;
  if (header.size() < kFixedColumns)
    throw std::runtime_error("run CSV: malformed header row");
  const std::size_t num_classes = header.size() - kFixedColumns;

  RunRecord record;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != header.size())
      throw std::runtime_error("run CSV: row has " +
                               std::to_string(f.size()) + " fields, expected " +
                               std::to_string(header.size()));
    if (first) {
      record.run_id = f[0];
      record.strategy = f[1];
      record.seed = std::stoull(f[2]);
      first = false;
    }
    RoundMetrics m;
    m.round = std::stoi(f[3]);
    m.overall_accuracy = std::stod(f[4]);
    m.rare_class_accuracy = std::stod(f[5]);
    m.t_hat_size = std::stoull(f[6]);
    m.cumulative_rare_selected = std::stoull(f[7]);
    m.truncated = f[8] == "1";
    m.per_class_selection_counts.resize(num_classes);
    for (std::size_t c = 0; c < num_classes; ++c)
      m.per_class_selection_counts[c] = std::stoull(f[kFixedColumns + c]);
    record.rounds.push_back(std::move(m));
  }
  if (first) throw std::runtime_error("run CSV: no metric rows");
  return record;
}

}  // namespace smisel
