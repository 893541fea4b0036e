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

#include "smisel/smi.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "smisel/cholesky.hpp"

namespace smisel {

SmiKind smi_kind_from_name(std::string_view name) {
  if (name == "gcmi") return SmiKind::kGcmi;
  if (name == "flvmi") return SmiKind::kFlvmi;
  if (name == "flqmi") return SmiKind::kFlqmi;
  if (name == "logdetmi") return SmiKind::kLogDetMi;
  throw std::invalid_argument("unknown SMI function: " + std::string(name));
}

std::string smi_kind_name(SmiKind kind) {
  switch (kind) {
    case SmiKind::kGcmi: return "gcmi";
    case SmiKind::kFlvmi: return "flvmi";
    case SmiKind::kFlqmi: return "flqmi";
    case SmiKind::kLogDetMi: return "logdetmi";
  }
  throw std::logic_error("unreachable");
}

KernelNeeds smi_kernel_needs(SmiKind kind) {
  switch (kind) {
    case SmiKind::kGcmi: return {.ground = false, .cross = true, .query = false};
    case SmiKind::kFlqmi: return {.ground = false, .cross = true, .query = false};
    case SmiKind::kFlvmi: return {.ground = true, .cross = true, .query = false};
    case SmiKind::kLogDetMi: return {.ground = true, .cross = true, .query = true};
  }
  throw std::logic_error("unreachable");
}

namespace {

void require_cross(const SmiKernels& k) {
  if (k.cross == nullptr)
    throw std::invalid_argument("SMI function requires a cross kernel");
}

void require_ground(const SmiKernels& k, const char* kind) {
  if (k.ground == nullptr)
    throw std::invalid_argument(std::string(kind) +
                                " requires a square ground kernel");
  if (!k.ground->square())
    throw std::invalid_argument(std::string(kind) +
                                ": ground kernel is not square");
}

/// Shared bookkeeping: the selected set and duplicate checks.
class SelectionState {
 public:
  explicit SelectionState(std::size_t ground_size)
      : is_selected_(ground_size, false) {}

  std::size_t ground_size() const { return is_selected_.size(); }
  std::span<const std::size_t> selected() const { return selected_; }

  void check_candidate(std::size_t j) const {
    if (j >= is_selected_.size())
      throw std::out_of_range("SMI: index " + std::to_string(j) +
                              " out of range");
    if (is_selected_[j])
      throw std::invalid_argument("SMI: duplicate index " +
                                  std::to_string(j));
  }

  void add(std::size_t j) {
    check_candidate(j);
    is_selected_[j] = true;
    selected_.push_back(j);
  }

 private:
  std::vector<std::size_t> selected_;
  std::vector<bool> is_selected_;
};

// ---------------------------------------------------------------------------
// GCMI: 2 * sum_{i in A, j in Q} s_ij. Modular in A: each element's gain
// is its (doubled) query row sum, independent of the selection.

class GcmiFunction final : public SmiFunction {
 public:
  explicit GcmiFunction(const SmiKernels& kernels)
      : cross_(*kernels.cross),
        state_(static_cast<std::size_t>(kernels.cross->rows())) {
    const auto n = cross_.rows();
    row_gain_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i)
      row_gain_(i) = 2.0 * cross_.row(i).sum();
  }

  SmiKind kind() const override { return SmiKind::kGcmi; }
  std::size_t ground_size() const override { return state_.ground_size(); }
  std::span<const std::size_t> selected() const override {
    return state_.selected();
  }
  double value() const override { return value_; }

  double marginal_gain(std::size_t j) const override {
    state_.check_candidate(j);
    return row_gain_(static_cast<Eigen::Index>(j));
  }

  void commit(std::size_t j) override {
    state_.add(j);
    value_ += row_gain_(static_cast<Eigen::Index>(j));
  }

 private:
  const Kernel& cross_;
  SelectionState state_;
  Eigen::VectorXd row_gain_;
  double value_ = 0.0;
};

// ---------------------------------------------------------------------------
// FLQMI: sum_{i in Q} max_{j in A} s_ij + sum_{i in A} max_{j in Q} s_ij.
// Memo: the per-query running max over the selection, plus each ground
// element's best query similarity (fixed). Gains cost O(q).

class FlqmiFunction final : public SmiFunction {
 public:
  explicit FlqmiFunction(const SmiKernels& kernels)
      : cross_(*kernels.cross),
        state_(static_cast<std::size_t>(kernels.cross->rows())) {
    const auto n = cross_.rows();
    const auto q = cross_.cols();
    query_max_.setZero(q);  // max over empty A is 0
    ground_best_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i)
      ground_best_(i) = cross_.row(i).maxCoeff();
  }

  SmiKind kind() const override { return SmiKind::kFlqmi; }
  std::size_t ground_size() const override { return state_.ground_size(); }
  std::span<const std::size_t> selected() const override {
    return state_.selected();
  }
  double value() const override { return value_; }

  double marginal_gain(std::size_t j) const override {
    state_.check_candidate(j);
    const Eigen::VectorXd row = cross_.row(static_cast<Eigen::Index>(j));
    double gain = ground_best_(static_cast<Eigen::Index>(j));
    for (Eigen::Index q = 0; q < row.size(); ++q)
      gain += std::max(0.0, row(q) - query_max_(q));
    return gain;
  }

  void commit(std::size_t j) override {
    state_.check_candidate(j);
    const Eigen::VectorXd row = cross_.row(static_cast<Eigen::Index>(j));
    double gain = ground_best_(static_cast<Eigen::Index>(j));
    for (Eigen::Index q = 0; q < row.size(); ++q) {
      gain += std::max(0.0, row(q) - query_max_(q));
      query_max_(q) = std::max(query_max_(q), row(q));
    }
    state_.add(j);
    value_ += gain;
  }

 private:
  const Kernel& cross_;
  SelectionState state_;
  Eigen::VectorXd query_max_;    // per query element, max over selected
  Eigen::VectorXd ground_best_;  // per ground element, max over Q
  double value_ = 0.0;
};

// ---------------------------------------------------------------------------
// FLVMI: sum_{v in V} min(max_{j in A} s_vj, max_{j in Q} s_vj).
// Memo: the per-ground-element running max over the selection and the
// fixed per-ground-element query max. Gains cost O(n).

class FlvmiFunction final : public SmiFunction {
 public:
  explicit FlvmiFunction(const SmiKernels& kernels)
      : ground_(*kernels.ground),
        state_(static_cast<std::size_t>(kernels.ground->rows())) {
    const Kernel& cross = *kernels.cross;
    if (cross.rows() != ground_.rows())
      throw std::invalid_argument(
          "flvmi: ground and cross kernels disagree on ground size");
    const auto n = ground_.rows();
    query_max_.resize(n);
    for (Eigen::Index v = 0; v < n; ++v)
      query_max_(v) = cross.row(v).maxCoeff();
    cur_a_.setZero(n);  // max over empty A is 0
    value_ = cur_a_.cwiseMin(query_max_).sum();
  }

  SmiKind kind() const override { return SmiKind::kFlvmi; }
  std::size_t ground_size() const override { return state_.ground_size(); }
  std::span<const std::size_t> selected() const override {
    return state_.selected();
  }
  double value() const override { return value_; }

  double marginal_gain(std::size_t j) const override {
    state_.check_candidate(j);
    const Eigen::VectorXd col = ground_.column(static_cast<Eigen::Index>(j));
    double gain = 0.0;
    for (Eigen::Index v = 0; v < col.size(); ++v)
      gain += std::min(std::max(cur_a_(v), col(v)), query_max_(v)) -
              std::min(cur_a_(v), query_max_(v));
    return gain;
  }

  void commit(std::size_t j) override {
    state_.check_candidate(j);
    const Eigen::VectorXd col = ground_.column(static_cast<Eigen::Index>(j));
    double gain = 0.0;
    for (Eigen::Index v = 0; v < col.size(); ++v) {
      const double grown = std::max(cur_a_(v), col(v));
      gain += std::min(grown, query_max_(v)) -
              std::min(cur_a_(v), query_max_(v));
      cur_a_(v) = grown;
    }
    state_.add(j);
    value_ += gain;
  }

 private:
  const Kernel& ground_;
  SelectionState state_;
  Eigen::VectorXd cur_a_;      // per ground element, max over selected
  Eigen::VectorXd query_max_;  // per ground element, max over Q
  double value_ = 0.0;
};

// ---------------------------------------------------------------------------
// LOGDETMI: log det S_A - log det(S_A - S_AQ S_Q^-1 S_QA).
// Two Cholesky factors are maintained by rank-one appends: one for S_A
// and one for the conditional matrix C_A with entries
//   c_ij = s_ij - r_i . r_j,   r_i = L_Q^-1 S_{Q,i}.
// A from-scratch refactorization every kRefactorInterval commits bounds
// numerical drift. Gains cost O(|A|^2 + |A| q).

class LogDetMiFunction final : public SmiFunction {
 public:
  explicit LogDetMiFunction(const SmiKernels& kernels)
      : ground_(*kernels.ground),
        state_(static_cast<std::size_t>(kernels.ground->rows())) {
    if (kernels.query == nullptr || !kernels.query->square())
      throw std::invalid_argument("logdetmi requires a square query kernel");
    const Kernel& cross = *kernels.cross;
    const Kernel& query = *kernels.query;
    if (cross.rows() != ground_.rows() || cross.cols() != query.rows())
      throw std::invalid_argument(
          "logdetmi: kernel shapes disagree (ground " +
          std::to_string(ground_.rows()) + ", cross " +
          std::to_string(cross.rows()) + "x" + std::to_string(cross.cols()) +
          ", query " + std::to_string(query.rows()) + ")");

    const auto n = ground_.rows();
    const auto q = query.rows();
    CholeskyFactor query_chol;
    try {
      Eigen::MatrixXd sq(q, q);
      for (Eigen::Index i = 0; i < q; ++i) sq.col(i) = query.column(i);
      query_chol = CholeskyFactor::factorize(sq);
    } catch (const std::runtime_error& e) {
      throw std::runtime_error(std::string("logdetmi: query kernel: ") +
                               e.what());
    }
    r_.resize(q, n);
    for (Eigen::Index i = 0; i < n; ++i)
      r_.col(i) = query_chol.solve_lower(cross.row(i));
  }

  SmiKind kind() const override { return SmiKind::kLogDetMi; }
  std::size_t ground_size() const override { return state_.ground_size(); }
  std::span<const std::size_t> selected() const override {
    return state_.selected();
  }
  double value() const override { return value_; }

  double marginal_gain(std::size_t j) const override {
    state_.check_candidate(j);
    const auto [pivot_a, pivot_c] = pivots(j);
    if (!(pivot_a > 0.0) || !(pivot_c > 0.0))
      throw std::runtime_error(
          "logdetmi: matrix not positive definite at candidate " +
          std::to_string(j) + " (principal minor of order " +
          std::to_string(state_.selected().size() + 1) + ")");
    return std::log(pivot_a) - std::log(pivot_c);
  }

  void commit(std::size_t j) override {
    state_.check_candidate(j);
    const auto cols = selection_columns(j);
    try {
      chol_a_.append(cols.s_col, cols.s_diag);
      chol_c_.append(cols.c_col, cols.c_diag);
    } catch (const std::runtime_error& e) {
      throw std::runtime_error("logdetmi: commit of " + std::to_string(j) +
                               ": " + e.what());
    }
    state_.add(j);
    value_ = chol_a_.log_det() - chol_c_.log_det();
    if (++commits_since_refactor_ >= kRefactorInterval) refactorize();
  }

 private:
  static constexpr std::size_t kRefactorInterval = 64;

  struct Columns {
    Eigen::VectorXd s_col, c_col;
    double s_diag = 0.0, c_diag = 0.0;
  };

  Columns selection_columns(std::size_t j) const {
    const auto sel = state_.selected();
    const auto k = static_cast<Eigen::Index>(sel.size());
    const auto jj = static_cast<Eigen::Index>(j);
    Columns c;
    c.s_col.resize(k);
    c.c_col.resize(k);
    for (Eigen::Index t = 0; t < k; ++t) {
      const auto st = static_cast<Eigen::Index>(sel[static_cast<std::size_t>(t)]);
      c.s_col(t) = ground_.entry(st, jj);
      c.c_col(t) = c.s_col(t) - r_.col(st).dot(r_.col(jj));
    }
    c.s_diag = ground_.entry(jj, jj);
    c.c_diag = c.s_diag - r_.col(jj).squaredNorm();
    return c;
  }

  std::pair<double, double> pivots(std::size_t j) const {
    const auto cols = selection_columns(j);
    return {chol_a_.append_pivot(cols.s_col, cols.s_diag),
            chol_c_.append_pivot(cols.c_col, cols.c_diag)};
  }

  void refactorize() {
    const auto sel = state_.selected();
    const auto k = static_cast<Eigen::Index>(sel.size());
    Eigen::MatrixXd sa(k, k), ca(k, k);
    for (Eigen::Index a = 0; a < k; ++a) {
      const auto ia = static_cast<Eigen::Index>(sel[static_cast<std::size_t>(a)]);
      for (Eigen::Index b = 0; b <= a; ++b) {
        const auto ib =
            static_cast<Eigen::Index>(sel[static_cast<std::size_t>(b)]);
        const double s = ground_.entry(ia, ib);
        sa(a, b) = sa(b, a) = s;
        const double c = s - r_.col(ia).dot(r_.col(ib));
        ca(a, b) = ca(b, a) = c;
      }
    }
    chol_a_ = CholeskyFactor::factorize(sa);
    chol_c_ = CholeskyFactor::factorize(ca);
    value_ = chol_a_.log_det() - chol_c_.log_det();
    commits_since_refactor_ = 0;
  }

  const Kernel& ground_;
  SelectionState state_;
  Eigen::MatrixXd r_;  // q x n, column i = L_Q^-1 S_{Q,i}
  CholeskyFactor chol_a_, chol_c_;
  double value_ = 0.0;
  std::size_t commits_since_refactor_ = 0;
};

}  // namespace

std::unique_ptr<SmiFunction> make_smi_function(SmiKind kind,
                                               const SmiKernels& kernels) {
  require_cross(kernels);
  switch (kind) {
    case SmiKind::kGcmi:
      return std::make_unique<GcmiFunction>(kernels);
    case SmiKind::kFlqmi:
      return std::make_unique<FlqmiFunction>(kernels);
    case SmiKind::kFlvmi:
      require_ground(kernels, "flvmi");
      return std::make_unique<FlvmiFunction>(kernels);
    case SmiKind::kLogDetMi:
      require_ground(kernels, "logdetmi");
      return std::make_unique<LogDetMiFunction>(kernels);
  }
  throw std::logic_error("unreachable");
}

namespace {

void check_indices(std::span<const std::size_t> a, Eigen::Index n) {
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (std::size_t j : a) {
    if (j >= static_cast<std::size_t>(n))
      throw std::out_of_range("SMI evaluation: index " + std::to_string(j) +
                              " out of range");
    if (seen[j])
      throw std::invalid_argument("SMI evaluation: duplicate index " +
                                  std::to_string(j));
    seen[j] = true;
  }
}

}  // namespace

double eval_gcmi(std::span<const std::size_t> a, const Kernel& cross) {
  check_indices(a, cross.rows());
  double total = 0.0;
  for (std::size_t i : a) total += cross.row(static_cast<Eigen::Index>(i)).sum();
  return 2.0 * total;
}

double eval_flqmi(std::span<const std::size_t> a, const Kernel& cross) {
  check_indices(a, cross.rows());
  if (a.empty()) return 0.0;
  const auto q = cross.cols();
  double total = 0.0;
  Eigen::VectorXd query_max = Eigen::VectorXd::Zero(q);
  for (std::size_t i : a) {
    const Eigen::VectorXd row = cross.row(static_cast<Eigen::Index>(i));
    total += row.maxCoeff();
    query_max = query_max.cwiseMax(row);
  }
  return total + query_max.sum();
}

double eval_flvmi(std::span<const std::size_t> a, const Kernel& ground,
                  const Kernel& cross) {
  check_indices(a, ground.rows());
  const auto n = ground.rows();
  double total = 0.0;
  for (Eigen::Index v = 0; v < n; ++v) {
    double a_max = 0.0;  // max over empty A is 0
    for (std::size_t j : a)
      a_max = std::max(a_max, ground.entry(v, static_cast<Eigen::Index>(j)));
    total += std::min(a_max, cross.row(v).maxCoeff());
  }
  return total;
}

double eval_logdetmi(std::span<const std::size_t> a, const Kernel& ground,
                     const Kernel& cross, const Kernel& query) {
  check_indices(a, ground.rows());
  if (a.empty()) return 0.0;
  const auto k = static_cast<Eigen::Index>(a.size());
  const auto q = query.rows();

  Eigen::MatrixXd sa(k, k);
  Eigen::MatrixXd saq(k, q);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto gi = static_cast<Eigen::Index>(a[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < k; ++j)
      sa(i, j) = ground.entry(
          gi, static_cast<Eigen::Index>(a[static_cast<std::size_t>(j)]));
    saq.row(i) = cross.row(gi).transpose();
  }

  CholeskyFactor chol_q;
  try {
    Eigen::MatrixXd sq(q, q);
    for (Eigen::Index i = 0; i < q; ++i) sq.col(i) = query.column(i);
    chol_q = CholeskyFactor::factorize(sq);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(std::string("eval_logdetmi: query kernel: ") +
                             e.what());
  }
  // R = L_Q^-1 S_QA, so the conditional matrix is S_A - R^T R.
  Eigen::MatrixXd r(q, k);
  for (Eigen::Index i = 0; i < k; ++i)
    r.col(i) = chol_q.solve_lower(saq.row(i).transpose());
  const Eigen::MatrixXd conditional = sa - r.transpose() * r;

  CholeskyFactor chol_a, chol_c;
  try {
    chol_a = CholeskyFactor::factorize(sa);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(std::string("eval_logdetmi: S_A: ") + e.what());
  }
  try {
    chol_c = CholeskyFactor::factorize(conditional);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(
        std::string("eval_logdetmi: conditional matrix: ") + e.what());
  }
  return chol_a.log_det() - chol_c.log_det();
}

double eval_smi(SmiKind kind, std::span<const std::size_t> a,
                const SmiKernels& kernels) {
  require_cross(kernels);
  switch (kind) {
    case SmiKind::kGcmi:
      return eval_gcmi(a, *kernels.cross);
    case SmiKind::kFlqmi:
      return eval_flqmi(a, *kernels.cross);
    case SmiKind::kFlvmi:
      require_ground(kernels, "flvmi");
      return eval_flvmi(a, *kernels.ground, *kernels.cross);
    case SmiKind::kLogDetMi:
      require_ground(kernels, "logdetmi");
      if (kernels.query == nullptr)
        throw std::invalid_argument("logdetmi requires a query kernel");
      return eval_logdetmi(a, *kernels.ground, *kernels.cross,
                           *kernels.query);
  }
  throw std::logic_error("unreachable");
}

}  // namespace smisel
