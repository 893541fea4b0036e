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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace smisel {

/// A set of d-dimensional feature vectors with optional integer class
/// labels and stable per-item identifiers. This is the universe that
/// ground sets, query sets and splits index into.
struct EmbeddingSet {
  Eigen::MatrixXd vectors;  // n x d, one row per item
  std::optional<std::vector<std::int32_t>> labels;
  std::vector<std::int64_t> ids;  // unique; defaults to 0..n-1

  EmbeddingSet() = default;
  explicit EmbeddingSet(Eigen::MatrixXd v);
  EmbeddingSet(Eigen::MatrixXd v, std::vector<std::int32_t> lab);

  std::size_t size() const { return static_cast<std::size_t>(vectors.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(vectors.cols()); }

  /// Gather of rows (and labels/ids) at the given positions.
  EmbeddingSet subset(std::span<const std::size_t> indices) const;

  /// Copy with labels removed; used to hide labels from strategies.
  EmbeddingSet without_labels() const;

  /// Number of classes implied by the labels (max label + 1).
  int num_classes() const;

  /// Throws if ids are not unique or labels are negative.
  void validate() const;
};

// On-disk format: a JSON header `<stem>.json` with
//   {"n":..,"d":..,"dtype":"f32","labels":bool,"ids":bool}
// next to a raw little-endian binary `<stem>.bin` holding n*d f32 row-major
// values, then n i32 labels (if labels), then n i64 ids (if ids).

/// Writes `<path>.json` + `<path>.bin` (an existing ".json" suffix on
/// `path` is treated as the header path).
void save_embedding_set(const EmbeddingSet& set,
                        const std::filesystem::path& path);

/// Reads the pair written by save_embedding_set. Errors carry the
/// offending field name or byte offset.
EmbeddingSet load_embedding_set(const std::filesystem::path& path);

}  // namespace smisel
