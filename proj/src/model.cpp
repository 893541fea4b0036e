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

#include "smisel/model.hpp"

#include <cmath>
#include <stdexcept>

#include "smisel/rng.hpp"

namespace smisel {

namespace {

Eigen::MatrixXd softmax_rows(Eigen::MatrixXd logits) {
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double top = logits.row(i).maxCoeff();
    logits.row(i) = (logits.row(i).array() - top).exp();
    logits.row(i) /= logits.row(i).sum();
  }
  return logits;
}

Eigen::Index argmax_row(const Eigen::MatrixXd& m, Eigen::Index i) {
  Eigen::Index best = 0;
  for (Eigen::Index c = 1; c < m.cols(); ++c)
    if (m(i, c) > m(i, best)) best = c;  // ties keep the smaller class id
  return best;
}

const std::vector<std::int32_t>& require_labels(const EmbeddingSet& x,
                                                const char* what) {
  if (!x.labels)
    throw std::invalid_argument(std::string(what) + ": unlabeled input");
  return *x.labels;
}

}  // namespace

LinearProbe::LinearProbe(Eigen::MatrixXd weights, Eigen::VectorXd bias,
                         std::size_t trained_on)
    : weights_(std::move(weights)),
      bias_(std::move(bias)),
      trained_on_(trained_on) {
  if (bias_.size() != weights_.rows())
    throw std::invalid_argument("LinearProbe: bias/weights shape mismatch");
}

Eigen::MatrixXd LinearProbe::logits(const EmbeddingSet& x) const {
  if (static_cast<int>(x.dim()) != dim())
    throw std::invalid_argument(
        "LinearProbe: dimension mismatch (probe " + std::to_string(dim()) +
        ", input " + std::to_string(x.dim()) + ")");
  Eigen::MatrixXd out = x.vectors * weights_.transpose();
  out.rowwise() += bias_.transpose();
  return out;
}

LinearProbe train_probe(const EmbeddingSet& labeled, int num_classes,
                        const ProbeHyper& hyper) {
  if (labeled.size() == 0)
    throw std::invalid_argument("train_probe: empty labeled set");
  const auto& labels = require_labels(labeled, "train_probe");
  if (num_classes < 1)
    throw std::invalid_argument("train_probe: num_classes must be >= 1");
  for (std::int32_t l : labels)
    if (l < 0 || l >= num_classes)
      throw std::invalid_argument("train_probe: label " + std::to_string(l) +
                                  " outside [0, " +
                                  std::to_string(num_classes) + ")");

  const auto n = static_cast<Eigen::Index>(labeled.size());
  const auto d = static_cast<Eigen::Index>(labeled.dim());
  const auto c = static_cast<Eigen::Index>(num_classes);

  // Small seeded init; the objective is convex, the seed only pins the
  // exact iterate sequence.
  Rng rng(hyper.seed);
  Eigen::MatrixXd w(c, d);
  for (Eigen::Index i = 0; i < c; ++i)
    for (Eigen::Index j = 0; j < d; ++j) w(i, j) = 0.01 * normal_sample(rng);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(c);

  Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(n, c);
  for (Eigen::Index i = 0; i < n; ++i)
    onehot(i, labels[static_cast<std::size_t>(i)]) = 1.0;

  const double inv_n = 1.0 / static_cast<double>(n);
  for (int epoch = 0; epoch < hyper.max_epochs; ++epoch) {
    Eigen::MatrixXd logits = labeled.vectors * w.transpose();
    logits.rowwise() += b.transpose();
    const Eigen::MatrixXd proba = softmax_rows(std::move(logits));

    Eigen::Index correct = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (argmax_row(proba, i) == labels[static_cast<std::size_t>(i)])
        ++correct;
    if (static_cast<double>(correct) >=
        hyper.target_train_accuracy * static_cast<double>(n))
      break;

    const Eigen::MatrixXd residual = proba - onehot;  // n x c
    w -= hyper.learning_rate *
         (inv_n * residual.transpose() * labeled.vectors + hyper.l2 * w);
    b -= hyper.learning_rate * (inv_n * residual.colwise().sum().transpose());
  }
  return LinearProbe(std::move(w), std::move(b), labeled.size());
}

Eigen::MatrixXd predict_proba(const LinearProbe& probe,
                              const EmbeddingSet& x) {
  return softmax_rows(probe.logits(x));
}

std::vector<std::int32_t> predict_labels(const LinearProbe& probe,
                                         const EmbeddingSet& x) {
  const Eigen::MatrixXd proba = predict_proba(probe, x);
  std::vector<std::int32_t> out(static_cast<std::size_t>(proba.rows()));
  for (Eigen::Index i = 0; i < proba.rows(); ++i)
    out[static_cast<std::size_t>(i)] =
        static_cast<std::int32_t>(argmax_row(proba, i));
  return out;
}

GradientEmbedding gradient_embeddings(const LinearProbe& probe,
                                      const EmbeddingSet& x,
                                      GradientLabels mode) {
  const Eigen::MatrixXd proba = predict_proba(probe, x);
  const auto n = proba.rows();
  const auto c = proba.cols();
  const auto d = static_cast<Eigen::Index>(x.dim());

  GradientEmbedding out;
  out.labels_used.resize(static_cast<std::size_t>(n));
  if (mode == GradientLabels::kTrue) {
    const auto& labels = require_labels(x, "gradient_embeddings(kTrue)");
    for (Eigen::Index i = 0; i < n; ++i)
      out.labels_used[static_cast<std::size_t>(i)] =
          labels[static_cast<std::size_t>(i)];
  } else {
    for (Eigen::Index i = 0; i < n; ++i)
      out.labels_used[static_cast<std::size_t>(i)] =
          static_cast<std::int32_t>(argmax_row(proba, i));
  }

  // Row i is (p_i - onehot(y_i)) (x) x_i: the exact last-layer
  // cross-entropy weight gradient for label y_i, in class blocks.
  Eigen::MatrixXd g(n, c * d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::int32_t y = out.labels_used[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k < c; ++k) {
      const double coef = proba(i, k) - (k == y ? 1.0 : 0.0);
      g.block(i, k * d, 1, d) = coef * x.vectors.row(i);
    }
  }
  out.points.vectors = std::move(g);
  out.points.ids = x.ids;
  return out;
}

std::vector<std::size_t> misclassified_subset(const LinearProbe& probe,
                                              const EmbeddingSet& target) {
  const auto& labels = require_labels(target, "misclassified_subset");
  const std::vector<std::int32_t> predicted = predict_labels(probe, target);
  std::vector<std::size_t> wrong;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    if (predicted[i] != labels[i]) wrong.push_back(i);
  if (wrong.empty()) {
    // Everything classified correctly: keep the full target set so the
    // query never degenerates to the empty set.
    wrong.resize(target.size());
    for (std::size_t i = 0; i < wrong.size(); ++i) wrong[i] = i;
  }
  return wrong;
}

double cross_entropy_loss(const LinearProbe& probe, const EmbeddingSet& x,
                          std::span<const std::int32_t> labels) {
  if (labels.size() != x.size())
    throw std::invalid_argument("cross_entropy_loss: labels size mismatch");
  const Eigen::MatrixXd proba = predict_proba(probe, x);
  double total = 0.0;
  for (Eigen::Index i = 0; i < proba.rows(); ++i)
    total -= std::log(proba(i, labels[static_cast<std::size_t>(i)]));
  return total / static_cast<double>(proba.rows());
}

}  // namespace smisel
