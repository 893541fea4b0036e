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

#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "smisel/kernel.hpp"

namespace smisel {

// Submodular mutual information objectives between a growing selection
// A from the ground set and a fixed query set Q, with memoized marginal
// gains:
//
//   GCMI      2 * sum_{i in A, j in Q} s_ij                O(1) gain
//   FLQMI     sum_{i in Q} max_{j in A} s_ij
//             + sum_{i in A} max_{j in Q} s_ij             O(q) gain
//   FLVMI     sum_{i in V} min(max_{j in A} s_ij,
//                              max_{j in Q} s_ij)          O(n) gain
//   LOGDETMI  log det S_A - log det(S_A - S_AQ S_Q^-1 S_QA)
//                                                          O(|A|^2) gain
//
// Max over an empty selection is 0, so every objective evaluates to 0
// on the empty set.

enum class SmiKind { kGcmi, kFlvmi, kFlqmi, kLogDetMi };

SmiKind smi_kind_from_name(std::string_view name);
std::string smi_kind_name(SmiKind kind);

/// Which kernels a given instantiation consumes. The cross (ground x
/// query) kernel is always needed; the square ground kernel only for
/// FLVMI/LOGDETMI and the query kernel only for LOGDETMI.
struct KernelNeeds {
  bool ground = false;
  bool cross = true;
  bool query = false;
};
KernelNeeds smi_kernel_needs(SmiKind kind);

/// Set objective supporting incremental greedy maximization. commit is
/// single-writer; marginal_gain is read-only on the memo state and may
/// be called concurrently for distinct candidates.
class IncrementalObjective {
 public:
  virtual ~IncrementalObjective() = default;
  virtual std::size_t ground_size() const = 0;
  /// I(selected + {j}) - I(selected). Throws if j is already selected
  /// or out of range.
  virtual double marginal_gain(std::size_t j) const = 0;
  /// Adds j to the selection and updates memo state.
  virtual void commit(std::size_t j) = 0;
  /// Current memoized objective value.
  virtual double value() const = 0;
  virtual std::span<const std::size_t> selected() const = 0;
};

struct SmiKernels {
  const Kernel* ground = nullptr;  // n x n
  const Kernel* cross = nullptr;   // n x q
  const Kernel* query = nullptr;   // q x q
};

class SmiFunction : public IncrementalObjective {
 public:
  virtual SmiKind kind() const = 0;
};

/// The kernels must outlive the function. LOGDETMI expects the ground
/// and query kernels to have been made positive definite beforehand
/// (regularize_spd).
std::unique_ptr<SmiFunction> make_smi_function(SmiKind kind,
                                               const SmiKernels& kernels);

// From-scratch evaluations of the closed forms over an index set A.
// These recompute everything on each call; the memoized path above must
// agree with them.
double eval_gcmi(std::span<const std::size_t> a, const Kernel& cross);
double eval_flqmi(std::span<const std::size_t> a, const Kernel& cross);
double eval_flvmi(std::span<const std::size_t> a, const Kernel& ground,
                  const Kernel& cross);
/// Computed via Cholesky factorizations; S_Q is never inverted beyond a
/// triangular solve. Throws on non-PD input, naming the offending
/// principal minor.
double eval_logdetmi(std::span<const std::size_t> a, const Kernel& ground,
                     const Kernel& cross, const Kernel& query);

double eval_smi(SmiKind kind, std::span<const std::size_t> a,
                const SmiKernels& kernels);

}  // namespace smisel
