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
#include <cstddef>

namespace smisel {

/// Lower-triangular Cholesky factor that supports appending one
/// row/column at a time (a rank-one growth of the factored matrix).
/// Failures report which leading principal minor is not positive
/// definite.
class CholeskyFactor {
 public:
  CholeskyFactor() = default;

  /// Full factorization of a symmetric matrix.
  static CholeskyFactor factorize(const Eigen::MatrixXd& m);

  std::size_t size() const { return k_; }
  /// log det of the factored matrix.
  double log_det() const { return log_det_; }

  /// Forward substitution L w = rhs over the current k x k factor.
  Eigen::VectorXd solve_lower(const Eigen::VectorXd& rhs) const;

  /// Conditional pivot that appending (col, diag) would produce:
  /// diag - ||L^-1 col||^2. Does not modify the factor.
  double append_pivot(const Eigen::VectorXd& col, double diag) const;

  /// Grow the factor by the new row/column. Throws if the pivot is
  /// not positive, naming the failing principal minor.
  void append(const Eigen::VectorXd& col, double diag);

  const Eigen::MatrixXd& matrix_l() const { return l_; }

 private:
  Eigen::MatrixXd l_;  // storage may exceed k_; top-left k_ x k_ is live
  std::size_t k_ = 0;
  double log_det_ = 0.0;
};

}  // namespace smisel
