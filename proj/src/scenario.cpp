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

#include "smisel/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "smisel/rng.hpp"

namespace smisel {

ScenarioKind scenario_kind_from_name(std::string_view name) {
  if (name == "binary") return ScenarioKind::kBinary;
  if (name == "longtail") return ScenarioKind::kLongTail;
  if (name == "custom") return ScenarioKind::kCustom;
  throw std::invalid_argument("unknown scenario kind: " + std::string(name));
}

std::string scenario_kind_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kBinary: return "binary";
    case ScenarioKind::kLongTail: return "longtail";
    case ScenarioKind::kCustom: return "custom";
  }
  throw std::logic_error("unreachable");
}

EmbeddingSet make_synthetic_gaussians(const SyntheticSpec& spec,
                                      std::uint64_t seed) {
  if (spec.num_classes < 1)
    throw std::invalid_argument("synthetic: num_classes must be >= 1");
  if (spec.num_classes > spec.dim)
    throw std::invalid_argument(
        "synthetic: num_classes must not exceed dim (means are placed on "
        "distinct axes)");
  if (spec.separation < 0.0)
    throw std::invalid_argument("synthetic: separation must be >= 0");
  if (spec.per_class_counts.size() !=
      static_cast<std::size_t>(spec.num_classes))
    throw std::invalid_argument(
        "synthetic: per_class_counts must have one entry per class");

  std::size_t n = 0;
  for (std::size_t c : spec.per_class_counts) n += c;

  Eigen::MatrixXd vectors(static_cast<Eigen::Index>(n), spec.dim);
  std::vector<std::int32_t> labels(n);
  Rng rng(seed);
  Eigen::Index row = 0;
  for (int k = 0; k < spec.num_classes; ++k) {
    for (std::size_t i = 0; i < spec.per_class_counts[static_cast<std::size_t>(k)];
         ++i) {
      for (int j = 0; j < spec.dim; ++j)
        vectors(row, j) = (j == k ? spec.separation : 0.0) + normal_sample(rng);
      labels[static_cast<std::size_t>(row)] = static_cast<std::int32_t>(k);
      ++row;
    }
  }
  return EmbeddingSet(std::move(vectors), std::move(labels));
}

namespace {

struct ClassPools {
  // Per class: shuffled global indices, consumed front to back.
  std::vector<std::vector<std::size_t>> pools;
  std::vector<std::size_t> cursor;

  std::size_t available(std::size_t cls) const {
    return pools[cls].size() - cursor[cls];
  }
};

ClassPools shuffle_class_pools(const EmbeddingSet& source, int num_classes,
                               std::uint64_t seed) {
  ClassPools cp;
  cp.pools.resize(static_cast<std::size_t>(num_classes));
  cp.cursor.assign(static_cast<std::size_t>(num_classes), 0);
  const auto& labels = *source.labels;
  for (std::size_t i = 0; i < source.size(); ++i)
    cp.pools[static_cast<std::size_t>(labels[i])].push_back(i);
  Rng rng(seed);
  for (auto& pool : cp.pools) {
    for (std::size_t t = 0; t + 1 < pool.size(); ++t) {
      const std::size_t j = t + uniform_index(rng, pool.size() - t);
      std::swap(pool[t], pool[j]);
    }
  }
  return cp;
}

/// Draws `counts[c]` items of each class into `out`; collects deficits
/// and throws one error listing all of them.
void draw(ClassPools& cp, const std::vector<std::size_t>& counts,
          std::vector<std::size_t>& out, const char* purpose) {
  std::ostringstream deficit;
  bool failed = false;
  for (std::size_t cls = 0; cls < counts.size(); ++cls) {
    if (cp.available(cls) < counts[cls]) {
      if (failed) deficit << ", ";
      deficit << "class " << cls << " short by "
              << counts[cls] - cp.available(cls);
      failed = true;
    }
  }
  if (failed)
    throw std::invalid_argument(std::string("insufficient points for ") +
                                purpose + ": " + deficit.str());
  for (std::size_t cls = 0; cls < counts.size(); ++cls) {
    for (std::size_t i = 0; i < counts[cls]; ++i)
      out.push_back(cp.pools[cls][cp.cursor[cls]++]);
  }
}

/// Splits `total` across the classes in `members` equally, remainder
/// (+1 each) to the smaller class ids.
std::vector<std::size_t> share_equally(std::size_t total,
                                       const std::vector<std::int32_t>& members,
                                       std::size_t num_classes) {
  std::vector<std::size_t> counts(num_classes, 0);
  if (members.empty()) return counts;
  std::vector<std::int32_t> sorted = members;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t base = total / sorted.size();
  std::size_t remainder = total % sorted.size();
  for (std::int32_t cls : sorted) {
    counts[static_cast<std::size_t>(cls)] = base + (remainder > 0 ? 1 : 0);
    if (remainder > 0) --remainder;
  }
  return counts;
}

std::vector<std::int32_t> frequent_classes(
    const std::vector<std::int32_t>& rare, int num_classes) {
  std::vector<bool> is_rare(static_cast<std::size_t>(num_classes), false);
  for (std::int32_t c : rare) is_rare[static_cast<std::size_t>(c)] = true;
  std::vector<std::int32_t> freq;
  for (int c = 0; c < num_classes; ++c)
    if (!is_rare[static_cast<std::size_t>(c)]) freq.push_back(c);
  return freq;
}

std::vector<std::int32_t> resolve_rare_classes(const EmbeddingSet& source,
                                               const ScenarioSpec& spec,
                                               int num_classes) {
  std::vector<std::int32_t> rare = spec.rare_classes;
  if (rare.empty()) {
    if (spec.tail_count < 1 || spec.tail_count >= num_classes)
      throw std::invalid_argument(
          "scenario: tail_count must be in [1, num_classes)");
    // The tail_count rarest classes by source frequency, ties toward
    // the smaller class id.
    std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes), 0);
    for (std::int32_t l : *source.labels)
      ++counts[static_cast<std::size_t>(l)];
    std::vector<std::int32_t> order(static_cast<std::size_t>(num_classes));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::int32_t a, std::int32_t b) {
                const std::size_t ca = counts[static_cast<std::size_t>(a)];
                const std::size_t cb = counts[static_cast<std::size_t>(b)];
                return ca < cb || (ca == cb && a < b);
              });
    rare.assign(order.begin(), order.begin() + spec.tail_count);
    std::sort(rare.begin(), rare.end());
  }
  if (rare.empty() ||
      rare.size() >= static_cast<std::size_t>(num_classes))
    throw std::invalid_argument(
        "scenario: rare classes must be a nonempty strict subset of all "
        "classes");
  for (std::int32_t c : rare)
    if (c < 0 || c >= num_classes)
      throw std::invalid_argument("scenario: rare class " +
                                  std::to_string(c) + " out of range");
  return rare;
}

void validate_source(const EmbeddingSet& source) {
  if (!source.labels)
    throw std::invalid_argument("scenario: source has no labels");
  if (source.size() == 0)
    throw std::invalid_argument("scenario: empty source");
}

void require_test_size(const ScenarioSpec& spec) {
  if (spec.sizes.test_per_class == 0)
    throw std::invalid_argument(
        "scenario: sizes.test_per_class is required (a balanced test pool "
        "is always reserved)");
}

std::vector<std::size_t> uniform_counts(std::size_t per_class,
                                        std::size_t num_classes) {
  return std::vector<std::size_t>(num_classes, per_class);
}

}  // namespace

Split make_binary_split(const EmbeddingSet& source, const ScenarioSpec& spec) {
  validate_source(source);
  require_test_size(spec);
  if (spec.rho < 1.0)
    throw std::invalid_argument("scenario: rho must be >= 1");
  if (spec.sizes.target == 0)
    throw std::invalid_argument("scenario: target size must be > 0");
  const int num_classes = source.num_classes();
  const auto rare = resolve_rare_classes(source, spec, num_classes);
  const auto freq = frequent_classes(rare, num_classes);

  // Requested totals are met approximately: per-class counts are chosen
  // so the realized |D|/|C| ratio equals rho exactly (up to the +-1
  // equal-share rounding within each group).
  const auto pool_counts = [&](std::size_t requested_total) {
    const double denom = (1.0 + spec.rho) * static_cast<double>(rare.size());
    const auto c_per = static_cast<std::size_t>(
        std::llround(static_cast<double>(requested_total) / denom));
    if (c_per == 0)
      throw std::invalid_argument(
          "scenario: requested pool of " + std::to_string(requested_total) +
          " is too small for imbalance factor " + std::to_string(spec.rho));
    const std::size_t c_total = c_per * rare.size();
    const auto d_total = static_cast<std::size_t>(
        std::llround(spec.rho * static_cast<double>(c_total)));
    auto counts = share_equally(d_total, freq,
                                static_cast<std::size_t>(num_classes));
    for (std::int32_t cls : rare)
      counts[static_cast<std::size_t>(cls)] = c_per;
    return counts;
  };

  ClassPools cp = shuffle_class_pools(source, num_classes,
                                      derive_seed(spec.seed, 2));
  Split split;
  draw(cp,
       uniform_counts(spec.sizes.test_per_class,
                      static_cast<std::size_t>(num_classes)),
       split.test, "the balanced test set");
  draw(cp,
       share_equally(spec.sizes.target, rare,
                     static_cast<std::size_t>(num_classes)),
       split.target, "the target set");
  draw(cp, pool_counts(spec.sizes.labeled), split.labeled,
       "the labeled set");
  draw(cp, pool_counts(spec.sizes.unlabeled), split.unlabeled,
       "the unlabeled set");
  return split;
}

Split make_longtail_split(const EmbeddingSet& source,
                          const ScenarioSpec& spec) {
  validate_source(source);
  require_test_size(spec);
  if (spec.sizes.target == 0)
    throw std::invalid_argument("scenario: target size must be > 0");
  if (!(spec.labeled_fraction > 0.0 && spec.labeled_fraction < 1.0))
    throw std::invalid_argument(
        "scenario: labeled_fraction must be in (0,1)");
  const int num_classes = source.num_classes();
  const auto rare = resolve_rare_classes(source, spec, num_classes);

  ClassPools cp = shuffle_class_pools(source, num_classes,
                                      derive_seed(spec.seed, 2));
  Split split;
  draw(cp,
       uniform_counts(spec.sizes.test_per_class,
                      static_cast<std::size_t>(num_classes)),
       split.test, "the balanced test set");
  draw(cp,
       share_equally(spec.sizes.target, rare,
                     static_cast<std::size_t>(num_classes)),
       split.target, "the target set");

  // The remainder keeps the source's natural long tail: a per-class
  // labeled_fraction / (1 - labeled_fraction) split.
  std::vector<std::size_t> lab_counts(static_cast<std::size_t>(num_classes));
  std::vector<std::size_t> unl_counts(static_cast<std::size_t>(num_classes));
  for (std::size_t cls = 0; cls < lab_counts.size(); ++cls) {
    const std::size_t remaining = cp.available(cls);
    lab_counts[cls] = static_cast<std::size_t>(std::llround(
        spec.labeled_fraction * static_cast<double>(remaining)));
    unl_counts[cls] = remaining - lab_counts[cls];
  }
  draw(cp, lab_counts, split.labeled, "the labeled set");
  draw(cp, unl_counts, split.unlabeled, "the unlabeled set");
  return split;
}

Split make_custom_split(const EmbeddingSet& source, const ScenarioSpec& spec) {
  validate_source(source);
  require_test_size(spec);
  if (spec.sizes.target == 0)
    throw std::invalid_argument("scenario: target size must be > 0");
  const int num_classes = source.num_classes();
  const auto rare = resolve_rare_classes(source, spec, num_classes);
  if (spec.custom_labeled_per_class.size() !=
          static_cast<std::size_t>(num_classes) ||
      spec.custom_unlabeled_per_class.size() !=
          static_cast<std::size_t>(num_classes))
    throw std::invalid_argument(
        "scenario: custom splits need per-class labeled/unlabeled counts "
        "for every class");

  ClassPools cp = shuffle_class_pools(source, num_classes,
                                      derive_seed(spec.seed, 2));
  Split split;
  draw(cp,
       uniform_counts(spec.sizes.test_per_class,
                      static_cast<std::size_t>(num_classes)),
       split.test, "the balanced test set");
  draw(cp,
       share_equally(spec.sizes.target, rare,
                     static_cast<std::size_t>(num_classes)),
       split.target, "the target set");
  draw(cp, spec.custom_labeled_per_class, split.labeled, "the labeled set");
  draw(cp, spec.custom_unlabeled_per_class, split.unlabeled,
       "the unlabeled set");
  return split;
}

Scenario build_scenario(const ScenarioSpec& spec) {
  if (spec.source_path.has_value() == spec.synthetic.has_value())
    throw std::invalid_argument(
        "scenario: exactly one of source path / synthetic spec is required");

  Scenario sc;
  sc.data = spec.synthetic
                ? make_synthetic_gaussians(*spec.synthetic,
                                           derive_seed(spec.seed, 1))
                : load_embedding_set(*spec.source_path);
  validate_source(sc.data);
  sc.num_classes = sc.data.num_classes();
  sc.rare_classes = resolve_rare_classes(sc.data, spec, sc.num_classes);

  switch (spec.kind) {
    case ScenarioKind::kBinary:
      sc.split = make_binary_split(sc.data, spec);
      break;
    case ScenarioKind::kLongTail:
      sc.split = make_longtail_split(sc.data, spec);
      break;
    case ScenarioKind::kCustom:
      sc.split = make_custom_split(sc.data, spec);
      break;
  }
  return sc;
}

// --------------------------------------------------------------------------
// JSON round trip and presets.

namespace {

void check_keys(const nlohmann::json& j,
                std::initializer_list<std::string_view> allowed,
                const std::string& path) {
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw std::invalid_argument("unknown config key: " + path + "." + key);
  }
}

SyntheticSpec synthetic_from_json(const nlohmann::json& j,
                                  const std::string& path) {
  check_keys(j, {"num_classes", "dim", "per_class_counts", "separation"},
             path);
  SyntheticSpec s;
  s.num_classes = j.at("num_classes").get<int>();
  s.dim = j.at("dim").get<int>();
  s.per_class_counts = j.at("per_class_counts").get<std::vector<std::size_t>>();
  s.separation = j.at("separation").get<double>();
  return s;
}

}  // namespace

ScenarioSpec scenario_from_json(const nlohmann::json& j) {
  check_keys(j,
             {"preset", "kind", "rare_classes", "tail_count", "rho", "sizes",
              "labeled_fraction", "seed", "source",
              "custom_labeled_per_class", "custom_unlabeled_per_class"},
             "$.scenario");
  ScenarioSpec spec;
  if (j.contains("preset"))
    spec = preset(j.at("preset").get<std::string>()).spec;

  if (j.contains("kind"))
    spec.kind = scenario_kind_from_name(j.at("kind").get<std::string>());
  if (j.contains("rare_classes"))
    spec.rare_classes = j.at("rare_classes").get<std::vector<std::int32_t>>();
  if (j.contains("tail_count")) spec.tail_count = j.at("tail_count").get<int>();
  if (j.contains("rho")) spec.rho = j.at("rho").get<double>();
  if (j.contains("sizes")) {
    const auto& s = j.at("sizes");
    check_keys(s, {"labeled", "unlabeled", "target", "test_per_class"},
               "$.scenario.sizes");
    if (s.contains("labeled"))
      spec.sizes.labeled = s.at("labeled").get<std::size_t>();
    if (s.contains("unlabeled"))
      spec.sizes.unlabeled = s.at("unlabeled").get<std::size_t>();
    if (s.contains("target"))
      spec.sizes.target = s.at("target").get<std::size_t>();
    if (s.contains("test_per_class"))
      spec.sizes.test_per_class = s.at("test_per_class").get<std::size_t>();
  }
  if (j.contains("labeled_fraction"))
    spec.labeled_fraction = j.at("labeled_fraction").get<double>();
  if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("source")) {
    const auto& src = j.at("source");
    check_keys(src, {"path", "synthetic"}, "$.scenario.source");
    if (src.contains("path") == src.contains("synthetic"))
      throw std::invalid_argument(
          "$.scenario.source needs exactly one of \"path\"/\"synthetic\"");
    if (src.contains("path"))
      spec.source_path = src.at("path").get<std::string>();
    else
      spec.synthetic = synthetic_from_json(src.at("synthetic"),
                                           "$.scenario.source.synthetic");
  }
  if (j.contains("custom_labeled_per_class"))
    spec.custom_labeled_per_class =
        j.at("custom_labeled_per_class").get<std::vector<std::size_t>>();
  if (j.contains("custom_unlabeled_per_class"))
    spec.custom_unlabeled_per_class =
        j.at("custom_unlabeled_per_class").get<std::vector<std::size_t>>();
  return spec;
}

nlohmann::json scenario_to_json(const ScenarioSpec& spec) {
  nlohmann::json j;
  j["kind"] = scenario_kind_name(spec.kind);
  j["rare_classes"] = spec.rare_classes;
  j["tail_count"] = spec.tail_count;
  j["rho"] = spec.rho;
  j["sizes"] = {{"labeled", spec.sizes.labeled},
                {"unlabeled", spec.sizes.unlabeled},
                {"target", spec.sizes.target},
                {"test_per_class", spec.sizes.test_per_class}};
  j["labeled_fraction"] = spec.labeled_fraction;
  j["seed"] = spec.seed;
  if (spec.source_path) j["source"] = {{"path", *spec.source_path}};
  if (spec.synthetic) {
    j["source"] = {
        {"synthetic",
         {{"num_classes", spec.synthetic->num_classes},
          {"dim", spec.synthetic->dim},
          {"per_class_counts", spec.synthetic->per_class_counts},
          {"separation", spec.synthetic->separation}}}};
  }
  if (!spec.custom_labeled_per_class.empty())
    j["custom_labeled_per_class"] = spec.custom_labeled_per_class;
  if (!spec.custom_unlabeled_per_class.empty())
    j["custom_unlabeled_per_class"] = spec.custom_unlabeled_per_class;
  return j;
}

Preset preset(std::string_view name) {
  Preset p;
  ScenarioSpec& s = p.spec;
  if (name == "pneumonia") {
    s.kind = ScenarioKind::kBinary;
    s.rho = 20.0;
    s.tail_count = 1;
    s.sizes = {.labeled = 105, .unlabeled = 1100, .target = 5,
               .test_per_class = 0};
    p.budget = 10;
  } else if (name == "path") {
    s.kind = ScenarioKind::kBinary;
    s.rho = 20.0;
    s.tail_count = 2;
    s.sizes = {.labeled = 3550, .unlabeled = 56800, .target = 20,
               .test_per_class = 0};
    p.budget = 500;
  } else if (name == "blood") {
    s.kind = ScenarioKind::kBinary;
    s.rho = 7.0;
    s.tail_count = 4;
    s.sizes = {.labeled = 228, .unlabeled = 1824, .target = 20,
               .test_per_class = 0};
    p.budget = 20;
  } else if (name == "isic") {
    s.kind = ScenarioKind::kLongTail;
    s.tail_count = 3;
    s.sizes = {.labeled = 0, .unlabeled = 0, .target = 15,
               .test_per_class = 0};
    s.labeled_fraction = 0.2;
    p.budget = 40;
  } else if (name == "aptos") {
    s.kind = ScenarioKind::kLongTail;
    s.tail_count = 2;
    s.sizes = {.labeled = 0, .unlabeled = 0, .target = 10,
               .test_per_class = 0};
    s.labeled_fraction = 0.2;
    p.budget = 20;
  } else {
    throw std::invalid_argument("unknown preset: " + std::string(name));
  }
  return p;
}

std::vector<std::string> preset_names() {
  return {"pneumonia", "path", "blood", "isic", "aptos"};
}

}  // namespace smisel
