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
#include <span>
#include <vector>

#include "smisel/embedding.hpp"

namespace smisel {

/// Multinomial softmax classifier over fixed embeddings. Its last-layer
/// cross-entropy gradients are the point representations consumed by
/// the SMI kernels.
class LinearProbe {
 public:
  LinearProbe() = default;
  LinearProbe(Eigen::MatrixXd weights, Eigen::VectorXd bias,
              std::size_t trained_on = 0);

  int num_classes() const { return static_cast<int>(weights_.rows()); }
  int dim() const { return static_cast<int>(weights_.cols()); }
  std::size_t trained_on() const { return trained_on_; }

  const Eigen::MatrixXd& weights() const { return weights_; }
  const Eigen::VectorXd& bias() const { return bias_; }

  /// n x c logit matrix W x + b per row.
  Eigen::MatrixXd logits(const EmbeddingSet& x) const;

 private:
  Eigen::MatrixXd weights_;  // c x d
  Eigen::VectorXd bias_;     // c
  std::size_t trained_on_ = 0;
};

struct ProbeHyper {
  double learning_rate = 0.05;
  int max_epochs = 500;
  double l2 = 1e-4;
  std::uint64_t seed = 0;
  double target_train_accuracy = 0.99;
};

/// Full-batch gradient descent on softmax cross-entropy with L2.
/// Weights are reinitialized from scratch on every call; training stops
/// at the epoch cap or once training accuracy reaches the target.
/// Deterministic given (seed, data, hyperparameters).
LinearProbe train_probe(const EmbeddingSet& labeled, int num_classes,
                        const ProbeHyper& hyper = {});

/// Row-stochastic softmax probabilities, strictly positive.
Eigen::MatrixXd predict_proba(const LinearProbe& probe,
                              const EmbeddingSet& x);

/// argmax of predict_proba per row (ties to the smallest class id).
std::vector<std::int32_t> predict_labels(const LinearProbe& probe,
                                         const EmbeddingSet& x);

enum class GradientLabels { kHypothesized, kTrue };

/// Last-layer cross-entropy gradient embedding per item:
/// row i = (p_i - onehot(y_i)) (x) x_i, laid out class-block by
/// class-block (c*d columns). With kHypothesized, y_i is the predicted
/// argmax; with kTrue, the item's stored label.
struct GradientEmbedding {
  EmbeddingSet points;                    // n x (c*d), ids copied from x
  std::vector<std::int32_t> labels_used;  // the y_i each row was built with
};

GradientEmbedding gradient_embeddings(
    const LinearProbe& probe, const EmbeddingSet& x,
    GradientLabels mode = GradientLabels::kHypothesized);

/// Indices of target items the probe misclassifies. When every item is
/// classified correctly, falls back to the full index set so the query
/// set never becomes empty. Requires labels.
std::vector<std::size_t> misclassified_subset(const LinearProbe& probe,
                                              const EmbeddingSet& target);

/// Mean cross-entropy of the probe on (x, labels); used by training and
/// by gradient checks.
double cross_entropy_loss(const LinearProbe& probe, const EmbeddingSet& x,
                          std::span<const std::int32_t> labels);

}  // namespace smisel
