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
#include <atomic>
#include <cstdint>
#include <memory>
#include <vector>

#include "smisel/embedding.hpp"

namespace smisel {

enum class Metric { kCosine, kDot };

Metric metric_from_name(std::string_view name);
std::string metric_name(Metric m);

/// Dense similarity matrix between two embedding sets (square ground
/// kernel when both sides coincide, rectangular cross kernel otherwise).
/// Immutable after construction and safe to share across threads.
///
/// Entry accesses through entry()/column()/row() are tallied in an
/// instrumentation counter so optimizer complexity contracts can be
/// checked empirically. Bulk access through values() is not tallied.
class Kernel {
 public:
  Kernel(Eigen::MatrixXd values, std::vector<std::int64_t> row_ids,
         std::vector<std::int64_t> col_ids, Metric metric,
         bool shifted = false);

  Eigen::Index rows() const { return values_.rows(); }
  Eigen::Index cols() const { return values_.cols(); }
  bool square() const { return values_.rows() == values_.cols(); }

  double entry(Eigen::Index i, Eigen::Index j) const {
    reads_->fetch_add(1, std::memory_order_relaxed);
    return values_(i, j);
  }
  Eigen::VectorXd column(Eigen::Index j) const {
    reads_->fetch_add(static_cast<std::uint64_t>(values_.rows()),
                      std::memory_order_relaxed);
    return values_.col(j);
  }
  Eigen::VectorXd row(Eigen::Index i) const {
    reads_->fetch_add(static_cast<std::uint64_t>(values_.cols()),
                      std::memory_order_relaxed);
    return values_.row(i).transpose();
  }

  const Eigen::MatrixXd& values() const { return values_; }
  const std::vector<std::int64_t>& row_ids() const { return row_ids_; }
  const std::vector<std::int64_t>& col_ids() const { return col_ids_; }
  Metric metric() const { return metric_; }
  /// True once the nonnegativity shift has been applied.
  bool shifted() const { return shifted_; }

  std::uint64_t entry_reads() const {
    return reads_->load(std::memory_order_relaxed);
  }
  void reset_entry_reads() const {
    reads_->store(0, std::memory_order_relaxed);
  }

 private:
  Eigen::MatrixXd values_;
  std::vector<std::int64_t> row_ids_;
  std::vector<std::int64_t> col_ids_;
  Metric metric_;
  bool shifted_;
  // Shared so copies of a kernel keep one counter.
  std::shared_ptr<std::atomic<std::uint64_t>> reads_;
};

/// Pairwise similarities values[i][j] = metric(a.row i, b.row j).
/// Rows may be partitioned across `jobs` workers; the result is bitwise
/// independent of the worker count.
///
/// Throws on dimension mismatch, and under cosine on any all-zero row
/// (the error names the offending item id).
Kernel build_kernel(const EmbeddingSet& a, const EmbeddingSet& b,
                    Metric metric, int jobs = 1);

/// Applies x -> (x+1)/2 iff the kernel is cosine and has a negative
/// entry; otherwise returns the input unchanged. The map is affine and
/// order-preserving. `force` applies it regardless of sign (used to keep
/// a family of kernels on one consistent scale).
Kernel shift_to_nonneg(const Kernel& k, bool force = false);

/// k + ridge*I for a square symmetric kernel.
Kernel regularize_spd(const Kernel& k, double ridge = 1e-3);

}  // namespace smisel
