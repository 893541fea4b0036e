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

// smisel command line:
//   select    one-shot SMI subset selection over embedding files
//   simulate  run a (strategy x seed) active-learning experiment grid
//   report    penalty matrix + summary curves from a simulate archive

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "smisel/alloop.hpp"
#include "smisel/rng.hpp"
#include "smisel/stats.hpp"
#include "smisel/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& j, std::initializer_list<std::string_view> allowed,
                const std::string& path) {
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw std::invalid_argument("unknown config key: " + path + "." + key);
  }
}

// ---------------------------------------------------------------------------
// select

int cmd_select(const std::string& embeddings_file,
               const std::string& query_file, const std::string& function,
               std::size_t budget, const std::string& metric,
               const std::string& maximizer, double epsilon, double ridge,
               std::uint64_t seed, const std::string& out_file, int jobs) {
  const smisel::EmbeddingSet ground = smisel::load_embedding_set(embeddings_file);
  const smisel::EmbeddingSet query_set = smisel::load_embedding_set(query_file);
  const smisel::SmiKind kind = smisel::smi_kind_from_name(function);
  const smisel::Metric m = smisel::metric_from_name(metric);

  const smisel::KernelNeeds needs = smisel::smi_kernel_needs(kind);
  smisel::Kernel cross = smisel::build_kernel(ground, query_set, m, jobs);
  std::optional<smisel::Kernel> gk, qk;
  if (needs.ground) gk = smisel::build_kernel(ground, ground, m, jobs);
  if (needs.query) qk = smisel::build_kernel(query_set, query_set, m, jobs);
  if (m == smisel::Metric::kCosine) {
    const bool any_negative =
        cross.values().minCoeff() < 0.0 ||
        (gk && gk->values().minCoeff() < 0.0) ||
        (qk && qk->values().minCoeff() < 0.0);
    if (any_negative) {
      cross = smisel::shift_to_nonneg(cross, true);
      if (gk) gk = smisel::shift_to_nonneg(*gk, true);
      if (qk) qk = smisel::shift_to_nonneg(*qk, true);
    }
  }
  if (kind == smisel::SmiKind::kLogDetMi) {
    gk = smisel::regularize_spd(*gk, ridge);
    qk = smisel::regularize_spd(*qk, ridge);
  }
  smisel::SmiKernels kernels{gk ? &*gk : nullptr, &cross,
                             qk ? &*qk : nullptr};
  auto objective = smisel::make_smi_function(kind, kernels);

  std::vector<std::size_t> candidates(ground.size());
  std::iota(candidates.begin(), candidates.end(), std::size_t{0});
  const smisel::GreedyResult result = smisel::run_maximizer(
      smisel::maximizer_from_name(maximizer), *objective,
      std::move(candidates), budget, epsilon, seed, jobs);

  std::ostringstream ids;
  for (std::size_t pos : result.selected)
    ids << ground.ids[pos] << "\n";
  if (out_file.empty()) {
    std::cout << ids.str();
  } else {
    std::ofstream out(out_file);
    if (!out) throw std::runtime_error("cannot open " + out_file);
    out << ids.str();

    json sidecar;
    sidecar["function"] = function;
    sidecar["metric"] = metric;
    sidecar["budget"] = budget;
    sidecar["shifted"] = cross.shifted();
    sidecar["evals"] = result.evals;
    json selected = json::array();
    for (std::size_t pos : result.selected)
      selected.push_back(ground.ids[pos]);
    sidecar["selected_ids"] = std::move(selected);
    sidecar["gains"] = result.gains;
    std::ofstream side(out_file + ".gains.json");
    if (!side)
      throw std::runtime_error("cannot open " + out_file + ".gains.json");
    side << sidecar.dump(2) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

struct StrategyEntry {
  smisel::StrategyKind kind;
  smisel::StrategyParams params;
  std::string name;
};

struct ExperimentConfig {
  smisel::ScenarioSpec scenario;
  std::size_t preset_budget = 0;
  std::vector<StrategyEntry> strategies;
  std::size_t rounds = 1;
  std::size_t budget = 0;
  bool budget_given = false;
  std::vector<std::uint64_t> seeds;
  smisel::ProbeHyper probe;
  std::string output_dir;
  json resolved;  // fully-resolved config echoed into the manifest
};

void apply_params_json(const json& j, smisel::StrategyParams& p,
                       const std::string& path) {
  if (j.contains("metric"))
    p.metric = smisel::metric_from_name(j.at("metric").get<std::string>());
  if (j.contains("maximizer"))
    p.maximizer =
        smisel::maximizer_from_name(j.at("maximizer").get<std::string>());
  if (j.contains("epsilon")) p.epsilon = j.at("epsilon").get<double>();
  if (j.contains("ridge")) p.ridge = j.at("ridge").get<double>();
  if (j.contains("query_labels")) {
    const std::string mode = j.at("query_labels").get<std::string>();
    if (mode == "true")
      p.query_labels = smisel::GradientLabels::kTrue;
    else if (mode == "hypothesized")
      p.query_labels = smisel::GradientLabels::kHypothesized;
    else
      throw std::invalid_argument(path +
                                  ".query_labels must be \"true\" or "
                                  "\"hypothesized\"");
  }
}

json params_to_json(const smisel::StrategyParams& p) {
  return json{{"metric", smisel::metric_name(p.metric)},
              {"maximizer", smisel::maximizer_name(p.maximizer)},
              {"epsilon", p.epsilon},
              {"ridge", p.ridge},
              {"query_labels",
               p.query_labels == smisel::GradientLabels::kTrue
                   ? "true"
                   : "hypothesized"}};
}

ExperimentConfig parse_experiment_config(const json& j) {
  check_keys(j,
             {"scenario", "strategies", "rounds", "budget", "seeds",
              "maximizer", "epsilon", "metric", "ridge", "query_labels",
              "probe", "output_dir"},
             "$");
  ExperimentConfig cfg;
  if (!j.contains("scenario"))
    throw std::invalid_argument("config is missing $.scenario");
  cfg.scenario = smisel::scenario_from_json(j.at("scenario"));
  if (j.at("scenario").contains("preset"))
    cfg.preset_budget =
        smisel::preset(j.at("scenario").at("preset").get<std::string>())
            .budget;

  smisel::StrategyParams base;
  apply_params_json(j, base, "$");

  if (!j.contains("strategies") || !j.at("strategies").is_array() ||
      j.at("strategies").empty())
    throw std::invalid_argument("config needs a nonempty $.strategies array");
  for (std::size_t i = 0; i < j.at("strategies").size(); ++i) {
    const json& sj = j.at("strategies")[i];
    const std::string path = "$.strategies[" + std::to_string(i) + "]";
    StrategyEntry entry;
    entry.params = base;
    if (sj.is_string()) {
      entry.name = sj.get<std::string>();
    } else if (sj.is_object()) {
      check_keys(sj,
                 {"name", "metric", "maximizer", "epsilon", "ridge",
                  "query_labels"},
                 path);
      if (!sj.contains("name"))
        throw std::invalid_argument(path + " is missing \"name\"");
      entry.name = sj.at("name").get<std::string>();
      apply_params_json(sj, entry.params, path);
    } else {
      throw std::invalid_argument(path + " must be a string or object");
    }
    entry.kind = smisel::strategy_from_name(entry.name);
    cfg.strategies.push_back(std::move(entry));
  }

  if (j.contains("rounds")) cfg.rounds = j.at("rounds").get<std::size_t>();
  if (j.contains("budget")) {
    cfg.budget = j.at("budget").get<std::size_t>();
    cfg.budget_given = true;
  } else if (cfg.preset_budget > 0) {
    cfg.budget = cfg.preset_budget;
  } else {
    throw std::invalid_argument(
        "config needs $.budget (no preset supplies one)");
  }

  if (!j.contains("seeds") || !j.at("seeds").is_array() ||
      j.at("seeds").empty())
    throw std::invalid_argument("config needs a nonempty $.seeds array");
  cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  std::vector<std::uint64_t> sorted = cfg.seeds;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("$.seeds must be distinct");

  if (j.contains("probe")) {
    const json& pj = j.at("probe");
    check_keys(pj, {"learning_rate", "max_epochs", "l2",
                    "target_train_accuracy"},
               "$.probe");
    if (pj.contains("learning_rate"))
      cfg.probe.learning_rate = pj.at("learning_rate").get<double>();
    if (pj.contains("max_epochs"))
      cfg.probe.max_epochs = pj.at("max_epochs").get<int>();
    if (pj.contains("l2")) cfg.probe.l2 = pj.at("l2").get<double>();
    if (pj.contains("target_train_accuracy"))
      cfg.probe.target_train_accuracy =
          pj.at("target_train_accuracy").get<double>();
  }

  if (!j.contains("output_dir"))
    throw std::invalid_argument("config is missing $.output_dir");
  cfg.output_dir = j.at("output_dir").get<std::string>();

  // Echo the fully-resolved configuration for the manifest.
  json resolved;
  resolved["scenario"] = smisel::scenario_to_json(cfg.scenario);
  json strategies = json::array();
  for (const auto& s : cfg.strategies) {
    json sj = params_to_json(s.params);
    sj["name"] = s.name;
    strategies.push_back(std::move(sj));
  }
  resolved["strategies"] = std::move(strategies);
  resolved["rounds"] = cfg.rounds;
  resolved["budget"] = cfg.budget;
  resolved["seeds"] = cfg.seeds;
  resolved["probe"] = {
      {"learning_rate", cfg.probe.learning_rate},
      {"max_epochs", cfg.probe.max_epochs},
      {"l2", cfg.probe.l2},
      {"target_train_accuracy", cfg.probe.target_train_accuracy}};
  resolved["output_dir"] = cfg.output_dir;
  cfg.resolved = std::move(resolved);
  return cfg;
}

int cmd_simulate(const std::string& config_file, int jobs) {
  std::ifstream in(config_file);
  if (!in) throw std::runtime_error("cannot open " + config_file);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(config_file + ": malformed JSON at byte " +
                             std::to_string(e.byte) + ": " + e.what());
  }
  const ExperimentConfig cfg = parse_experiment_config(j);
  fs::create_directories(cfg.output_dir);

  struct Run {
    const StrategyEntry* strategy;
    std::uint64_t seed;
    std::string file;
  };
  std::vector<Run> runs;
  for (const auto& s : cfg.strategies)
    for (std::uint64_t seed : cfg.seeds)
      runs.push_back({&s, seed,
                      "run_" + s.name + "_seed" + std::to_string(seed) +
                          ".csv"});

  std::mutex failures_mutex;
  std::vector<std::string> failures;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= runs.size()) return;
      const Run& run = runs[i];
      try {
        // Each seed redraws the split, so paired comparisons across
        // strategies share a split for a given seed.
        smisel::ScenarioSpec spec = cfg.scenario;
        spec.seed = smisel::derive_seed(spec.seed, run.seed);
        const smisel::Scenario scenario = smisel::build_scenario(spec);

        smisel::AlConfig al;
        al.strategy = run.strategy->kind;
        al.params = run.strategy->params;
        al.probe_hyper = cfg.probe;
        al.rounds = cfg.rounds;
        al.budget = cfg.budget;
        al.seed = run.seed;
        const std::vector<smisel::RoundMetrics> rounds =
            smisel::run_al(scenario, al);

        const std::string run_id =
            run.strategy->name + "-s" + std::to_string(run.seed);
        std::ofstream out(fs::path(cfg.output_dir) / run.file);
        if (!out) throw std::runtime_error("cannot open " + run.file);
        smisel::write_run_csv(out, run_id, run.strategy->name, run.seed,
                              rounds, scenario.num_classes);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failures_mutex);
        failures.push_back("(" + run.strategy->name + ", seed " +
                           std::to_string(run.seed) + "): " + e.what());
      }
    }
  };
  const int workers = std::clamp<int>(jobs, 1, static_cast<int>(runs.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  json manifest;
  manifest["version"] = std::string(smisel::kVersion);
  manifest["config"] = cfg.resolved;
  json run_list = json::array();
  for (const Run& run : runs)
    run_list.push_back({{"file", run.file},
                        {"strategy", run.strategy->name},
                        {"seed", run.seed}});
  manifest["runs"] = std::move(run_list);
  std::ofstream mf(fs::path(cfg.output_dir) / "manifest.json");
  mf << manifest.dump(2) << "\n";

  if (!failures.empty()) {
    std::cerr << "failed runs:\n";
    for (const auto& f : failures) std::cerr << "  " << f << "\n";
    return 1;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// report

int cmd_report(const std::string& archive_dir, double alpha, bool paired,
               const std::string& metric) {
  if (metric != "rare_acc" && metric != "overall_acc")
    throw std::invalid_argument(
        "report: --metric must be rare_acc or overall_acc");
  const fs::path dir(archive_dir);
  std::ifstream mf(dir / "manifest.json");
  if (!mf)
    throw std::runtime_error("no manifest.json in " + archive_dir);
  json manifest;
  try {
    manifest = json::parse(mf);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("manifest.json: malformed JSON at byte " +
                             std::to_string(e.byte));
  }

  std::vector<smisel::RunCurve> curves;
  for (const json& run : manifest.at("runs")) {
    const fs::path file = dir / run.at("file").get<std::string>();
    std::ifstream in(file);
    if (!in)
      throw std::runtime_error("archive incomplete: missing run file " +
                               file.string() + " (strategy " +
                               run.at("strategy").get<std::string>() +
                               ", seed " +
                               std::to_string(run.at("seed").get<std::uint64_t>()) +
                               ")");
    const smisel::RunRecord record = smisel::read_run_csv(in);
    smisel::RunCurve curve;
    curve.strategy = record.strategy;
    curve.seed = record.seed;
    for (const smisel::RoundMetrics& m : record.rounds)
      curve.values.push_back(metric == "rare_acc" ? m.rare_class_accuracy
                                                  : m.overall_accuracy);
    curves.push_back(std::move(curve));
  }

  const smisel::PenaltyMatrix pm = smisel::penalty_matrix(
      curves, alpha,
      paired ? smisel::TTestKind::kPaired : smisel::TTestKind::kWelch);
  {
    json out = smisel::penalty_matrix_to_json(pm);
    out["metric"] = metric;
    std::ofstream f(dir / "penalty_matrix.json");
    f << out.dump(2) << "\n";
  }
  {
    std::ofstream f(dir / "penalty_matrix.csv");
    smisel::write_penalty_csv(f, pm);
  }
  {
    const auto summary = smisel::summarize(curves);
    std::ofstream f(dir / ("summary_" + metric + ".csv"));
    smisel::write_summary_csv(f, summary);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"smisel: targeted subset selection over feature embeddings"};
  app.set_version_flag("--version", std::string(smisel::kVersion));
  app.require_subcommand(1);

  // select
  std::string embeddings_file, query_file, function, out_file;
  std::string metric = "cosine", maximizer = "auto";
  std::size_t budget = 0;
  double epsilon = 0.1, ridge = 1e-3;
  std::uint64_t seed = 0;
  int jobs = 1;
  CLI::App* select = app.add_subcommand(
      "select", "one-shot SMI subset selection over embedding files");
  select->add_option("--embeddings", embeddings_file, "ground-set embedding file")
      ->required();
  select->add_option("--query", query_file, "query-set embedding file")
      ->required();
  select->add_option("--function", function,
                     "gcmi | flvmi | flqmi | logdetmi")
      ->required();
  select->add_option("--budget", budget, "selection size")->required();
  select->add_option("--metric", metric, "cosine | dot");
  select->add_option("--maximizer", maximizer,
                     "auto | naive | lazy | stochastic");
  select->add_option("--epsilon", epsilon, "stochastic-greedy epsilon");
  select->add_option("--ridge", ridge, "logdetmi diagonal regularizer");
  select->add_option("--seed", seed, "stochastic-greedy seed");
  select->add_option("--out", out_file,
                     "output file for selected ids (stdout when omitted); "
                     "also writes <out>.gains.json");
  select->add_option("--jobs", jobs, "worker threads");

  // simulate
  std::string config_file;
  int sim_jobs = 1;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "run a (strategy x seed) experiment grid from a config");
  simulate->add_option("--config", config_file, "experiment config JSON")
      ->required();
  simulate->add_option("--jobs", sim_jobs, "concurrent runs");

  // report
  std::string archive_dir, report_metric = "rare_acc";
  double alpha = 0.05;
  bool paired = false;
  CLI::App* report = app.add_subcommand(
      "report", "penalty matrix and summary curves from an archive");
  report->add_option("--archive", archive_dir, "simulate output directory")
      ->required();
  report->add_option("--alpha", alpha, "significance level");
  report->add_flag("--paired", paired, "pair runs by seed");
  report->add_option("--metric", report_metric, "rare_acc | overall_acc");

  CLI11_PARSE(app, argc, argv);

  try {
    if (select->parsed())
      return cmd_select(embeddings_file, query_file, function, budget, metric,
                        maximizer, epsilon, ridge, seed, out_file, jobs);
    if (simulate->parsed()) return cmd_simulate(config_file, sim_jobs);
    if (report->parsed())
      return cmd_report(archive_dir, alpha, paired, report_metric);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
