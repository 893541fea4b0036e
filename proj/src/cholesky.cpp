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

#include "smisel/cholesky.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace smisel {

CholeskyFactor CholeskyFactor::factorize(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("CholeskyFactor: matrix is not square");
  CholeskyFactor f;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    f.append(m.col(j).head(j), m(j, j));
  return f;
}

Eigen::VectorXd CholeskyFactor::solve_lower(const Eigen::VectorXd& rhs) const {
  if (static_cast<std::size_t>(rhs.size()) != k_)
    throw std::invalid_argument("CholeskyFactor::solve_lower: size mismatch");
  Eigen::VectorXd w(rhs);
  for (std::size_t i = 0; i < k_; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    for (Eigen::Index t = 0; t < ii; ++t) w(ii) -= l_(ii, t) * w(t);
    w(ii) /= l_(ii, ii);
  }
  return w;
}

double CholeskyFactor::append_pivot(const Eigen::VectorXd& col,
                                    double diag) const {
  if (k_ == 0) return diag;
  const Eigen::VectorXd w = solve_lower(col);
  return diag - w.squaredNorm();
}

void CholeskyFactor::append(const Eigen::VectorXd& col, double diag) {
  const Eigen::VectorXd w = k_ == 0 ? Eigen::VectorXd() : solve_lower(col);
  const double pivot = diag - (k_ == 0 ? 0.0 : w.squaredNorm());
  if (!(pivot > 0.0))
    throw std::runtime_error(
        "matrix not positive definite: leading principal minor of order " +
        std::to_string(k_ + 1) + " has pivot " + std::to_string(pivot));
  if (static_cast<std::size_t>(l_.rows()) <= k_) {
    const Eigen::Index cap =
        std::max<Eigen::Index>(8, 2 * static_cast<Eigen::Index>(k_));
    Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(cap, cap);
    grown.topLeftCorner(static_cast<Eigen::Index>(k_),
                        static_cast<Eigen::Index>(k_)) =
        l_.topLeftCorner(static_cast<Eigen::Index>(k_),
                         static_cast<Eigen::Index>(k_));
    l_ = std::move(grown);
  }
  const auto kk = static_cast<Eigen::Index>(k_);
  if (kk > 0) l_.row(kk).head(kk) = w.transpose();
  l_(kk, kk) = std::sqrt(pivot);
  log_det_ += std::log(pivot);
  ++k_;
}

}  // namespace smisel
