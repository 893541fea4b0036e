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

#include "smisel/kernel.hpp"

#include <algorithm>
#include <stdexcept>
#include <thread>

namespace smisel {

Metric metric_from_name(std::string_view name) {
  if (name == "cosine") return Metric::kCosine;
  if (name == "dot") return Metric::kDot;
  throw std::invalid_argument("unknown metric: " + std::string(name));
}

std::string metric_name(Metric m) {
  return m == Metric::kCosine ? "cosine" : "dot";
}

Kernel::Kernel(Eigen::MatrixXd values, std::vector<std::int64_t> row_ids,
               std::vector<std::int64_t> col_ids, Metric metric, bool shifted)
    : values_(std::move(values)),
      row_ids_(std::move(row_ids)),
      col_ids_(std::move(col_ids)),
      metric_(metric),
      shifted_(shifted),
      reads_(std::make_shared<std::atomic<std::uint64_t>>(0)) {
  if (row_ids_.size() != static_cast<std::size_t>(values_.rows()) ||
      col_ids_.size() != static_cast<std::size_t>(values_.cols()))
    throw std::invalid_argument("Kernel: id/value shape mismatch");
}

Kernel build_kernel(const EmbeddingSet& a, const EmbeddingSet& b,
                    Metric metric, int jobs) {
  if (a.dim() != b.dim())
    throw std::invalid_argument(
        "build_kernel: dimension mismatch (" + std::to_string(a.dim()) +
        " vs " + std::to_string(b.dim()) + ")");

  const Eigen::Index n = a.vectors.rows();
  const Eigen::Index m = b.vectors.rows();

  Eigen::VectorXd a_norms, b_norms;
  if (metric == Metric::kCosine) {
    a_norms = a.vectors.rowwise().norm();
    b_norms = b.vectors.rowwise().norm();
    for (Eigen::Index i = 0; i < n; ++i)
      if (a_norms(i) == 0.0)
        throw std::invalid_argument(
            "build_kernel: zero vector under cosine, item id " +
            std::to_string(a.ids[static_cast<std::size_t>(i)]));
    for (Eigen::Index j = 0; j < m; ++j)
      if (b_norms(j) == 0.0)
        throw std::invalid_argument(
            "build_kernel: zero vector under cosine, item id " +
            std::to_string(b.ids[static_cast<std::size_t>(j)]));
  }

  Eigen::MatrixXd values(n, m);
  // Each entry is computed independently, so any row partition yields
  // bitwise-identical output.
  auto fill_rows = [&](Eigen::Index begin, Eigen::Index end) {
    for (Eigen::Index i = begin; i < end; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) {
        double s = a.vectors.row(i).dot(b.vectors.row(j));
        if (metric == Metric::kCosine) {
          s /= a_norms(i) * b_norms(j);
          s = std::clamp(s, -1.0, 1.0);
        }
        values(i, j) = s;
      }
    }
  };

  const int workers =
      std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  if (workers == 1) {
    fill_rows(0, n);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    const Eigen::Index chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const Eigen::Index begin = w * chunk;
      const Eigen::Index end = std::min(n, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(fill_rows, begin, end);
    }
    for (auto& t : pool) t.join();
  }

  return Kernel(std::move(values), a.ids, b.ids, metric);
}

Kernel shift_to_nonneg(const Kernel& k, bool force) {
  const bool has_negative = k.values().minCoeff() < 0.0;
  const bool apply =
      k.metric() == Metric::kCosine && (force || has_negative);
  if (!apply) return k;
  Eigen::MatrixXd shifted = (k.values().array() + 1.0) / 2.0;
  return Kernel(std::move(shifted), k.row_ids(), k.col_ids(), k.metric(),
                /*shifted=*/true);
}

Kernel regularize_spd(const Kernel& k, double ridge) {
  if (!k.square())
    throw std::invalid_argument("regularize_spd: kernel is not square (" +
                                std::to_string(k.rows()) + "x" +
                                std::to_string(k.cols()) + ")");
  const double asym =
      (k.values() - k.values().transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-9)
    throw std::invalid_argument(
        "regularize_spd: kernel is not symmetric (max deviation " +
        std::to_string(asym) + ")");
  Eigen::MatrixXd values = k.values();
  values.diagonal().array() += ridge;
  return Kernel(std::move(values), k.row_ids(), k.col_ids(), k.metric(),
                k.shifted());
}

}  // namespace smisel
