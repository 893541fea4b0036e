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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "smisel/embedding.hpp"

namespace smisel {

// Labeled/unlabeled/target split construction with binary or long-tail
// class imbalance, plus a synthetic Gaussian-cluster generator for
// desk-scale experiments. A balanced test pool is always reserved
// before the L/U/T pools are drawn.

enum class ScenarioKind { kBinary, kLongTail, kCustom };

ScenarioKind scenario_kind_from_name(std::string_view name);
std::string scenario_kind_name(ScenarioKind kind);

struct SyntheticSpec {
  int num_classes = 2;
  int dim = 2;
  std::vector<std::size_t> per_class_counts;
  // Class k's cluster mean sits at separation * e_k (unit-variance
  // isotropic clusters), so this is the mean distance from the origin.
  double separation = 1.0;
};

/// Deterministic Gaussian clusters with labels attached. Requires
/// num_classes <= dim and separation >= 0.
EmbeddingSet make_synthetic_gaussians(const SyntheticSpec& spec,
                                      std::uint64_t seed);

struct ScenarioSizes {
  std::size_t labeled = 0;     // requested |L| (binary; realized may
                               // differ slightly to keep the ratio exact)
  std::size_t unlabeled = 0;   // requested |U| (binary)
  std::size_t target = 0;      // |T|
  std::size_t test_per_class = 0;  // balanced test pool, per class
};

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::kBinary;
  // Explicit rare class ids; when empty, the `tail_count` rarest classes
  // of the source (by frequency, ties to the smaller id) are used.
  std::vector<std::int32_t> rare_classes;
  int tail_count = 1;
  double rho = 1.0;  // imbalance factor, >= 1 (binary only)
  ScenarioSizes sizes;
  double labeled_fraction = 0.2;  // L share of the L/U split (long-tail)
  std::uint64_t seed = 0;
  // Exactly one source: an embedding-file path or a synthetic spec.
  std::optional<std::string> source_path;
  std::optional<SyntheticSpec> synthetic;
  // kCustom: explicit per-class L/U counts.
  std::vector<std::size_t> custom_labeled_per_class;
  std::vector<std::size_t> custom_unlabeled_per_class;
};

ScenarioSpec scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const ScenarioSpec& spec);

/// Named presets carrying the published experiment shapes
/// ("pneumonia", "path", "blood", "isic", "aptos"). The preset fixes
/// kind, rho, pool sizes, rare-class count and the recommended budget;
/// the caller must still supply a source and a test size.
struct Preset {
  ScenarioSpec spec;
  std::size_t budget = 0;
};
Preset preset(std::string_view name);
std::vector<std::string> preset_names();

/// Disjoint index sets into one EmbeddingSet. Unlabeled labels stay in
/// the source for simulation bookkeeping; strategies only ever see a
/// label-stripped view.
struct Split {
  std::vector<std::size_t> labeled;
  std::vector<std::size_t> unlabeled;
  std::vector<std::size_t> target;
  std::vector<std::size_t> test;
};

struct Scenario {
  EmbeddingSet data;
  Split split;
  std::vector<std::int32_t> rare_classes;
  int num_classes = 0;
};

/// Stratified seeded split with |D_L| = rho |C_L| and |D_U| = rho |C_U|
/// (rare classes share the C budget equally, +-1; frequent classes share
/// the D budget equally, +-1). The target pool holds rare-class points
/// only. Errors list the per-class deficit when the source is too small.
Split make_binary_split(const EmbeddingSet& source, const ScenarioSpec& spec);

/// Balanced test pool first, then the target pool from the designated
/// tail classes, then a per-class labeled_fraction/(1-labeled_fraction)
/// split of the remainder (preserving the source's class proportions).
Split make_longtail_split(const EmbeddingSet& source,
                          const ScenarioSpec& spec);

/// Explicit per-class labeled/unlabeled counts.
Split make_custom_split(const EmbeddingSet& source, const ScenarioSpec& spec);

/// Loads or generates the source and builds the split for spec.kind.
Scenario build_scenario(const ScenarioSpec& spec);

}  // namespace smisel
