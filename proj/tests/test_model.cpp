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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "smisel/model.hpp"
#include "smisel/scenario.hpp"
#include "testutil.hpp"

using namespace smisel;
namespace tt = smisel::testing;

namespace {

EmbeddingSet two_gaussians(std::uint64_t seed, double separation,
                           std::size_t per_class = 100) {
  SyntheticSpec spec;
  spec.num_classes = 2;
  spec.dim = 2;
  spec.per_class_counts = {per_class, per_class};
  spec.separation = separation;
  return make_synthetic_gaussians(spec, seed);
}

}  // namespace

TEST_CASE("training separable gaussians reaches the accuracy target") {
  const EmbeddingSet data = two_gaussians(1, 6.0);
  const LinearProbe probe = train_probe(data, 2);
  const std::vector<std::int32_t> pred = predict_labels(probe, data);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (pred[i] == (*data.labels)[i]) ++hits;
  CHECK(static_cast<double>(hits) / static_cast<double>(pred.size()) >= 0.99);
}

TEST_CASE("single-class training predicts that class") {
  Rng rng(2);
  EmbeddingSet data = tt::random_embeddings(rng, 30, 3);
  data.labels.emplace(30, 1);  // every label is class 1 of 3
  const LinearProbe probe = train_probe(data, 3);
  for (std::int32_t p : predict_labels(probe, data)) CHECK(p == 1);
}

TEST_CASE("training is bitwise deterministic per seed") {
  const EmbeddingSet data = two_gaussians(3, 2.0);
  ProbeHyper hyper;
  hyper.seed = 99;
  const LinearProbe a = train_probe(data, 2, hyper);
  const LinearProbe b = train_probe(data, 2, hyper);
  CHECK(a.weights() == b.weights());
  CHECK(a.bias() == b.bias());
}

TEST_CASE("train_probe rejects bad input") {
  EmbeddingSet empty;
  empty.vectors.resize(0, 2);
  CHECK_THROWS_AS(train_probe(empty, 2), std::invalid_argument);

  Rng rng(4);
  EmbeddingSet unlabeled = tt::random_embeddings(rng, 5, 2);
  CHECK_THROWS_AS(train_probe(unlabeled, 2), std::invalid_argument);
}

TEST_CASE("predict_proba closed forms") {
  // Zero weights: uniform probabilities.
  LinearProbe zero(Eigen::MatrixXd::Zero(3, 2), Eigen::VectorXd::Zero(3));
  Rng rng(5);
  const EmbeddingSet x = tt::random_embeddings(rng, 4, 2);
  const Eigen::MatrixXd p = predict_proba(zero, x);
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    for (Eigen::Index c = 0; c < 3; ++c)
      CHECK(p(i, c) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  // Logits (ln 2, 0) -> probabilities (2/3, 1/3).
  Eigen::MatrixXd w(2, 1);
  w << std::log(2.0), 0.0;
  LinearProbe probe(w, Eigen::VectorXd::Zero(2));
  EmbeddingSet unit(Eigen::MatrixXd::Ones(1, 1));
  const Eigen::MatrixXd q = predict_proba(probe, unit);
  CHECK(q(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(q(0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("predict_proba rows are a strictly positive simplex") {
  Rng rng(6);
  const LinearProbe probe = tt::random_probe(rng, 4, 5, 3.0);
  const EmbeddingSet x = tt::random_embeddings(rng, 50, 5, 2.0);
  const Eigen::MatrixXd p = predict_proba(probe, x);
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    CHECK(p.row(i).sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(p.row(i).minCoeff() > 0.0);
  }
}

TEST_CASE("predict_proba is invariant to a constant logit shift") {
  Rng rng(7);
  const LinearProbe probe = tt::random_probe(rng, 3, 4);
  LinearProbe shifted(probe.weights(),
                      probe.bias() + Eigen::VectorXd::Constant(3, 17.5));
  const EmbeddingSet x = tt::random_embeddings(rng, 20, 4);
  CHECK((predict_proba(probe, x) - predict_proba(shifted, x))
            .cwiseAbs()
            .maxCoeff() <= 1e-12);
}

TEST_CASE("gradient embedding hand example") {
  // c=2, x=[1,2], p=(0.7,0.3), hypothesized label 0.
  // Expected row: (p - e_0) (x) x = [-0.3, -0.6, 0.3, 0.6].
  const double logit_gap = std::log(0.7 / 0.3);
  Eigen::MatrixXd w(2, 2);
  w.setZero();
  Eigen::VectorXd b(2);
  b << logit_gap, 0.0;
  LinearProbe probe(w, b);
  Eigen::MatrixXd x(1, 2);
  x << 1.0, 2.0;
  const GradientEmbedding g = gradient_embeddings(probe, EmbeddingSet(x));
  REQUIRE(g.points.dim() == 4);
  CHECK(g.labels_used[0] == 0);
  CHECK(g.points.vectors(0, 0) == doctest::Approx(-0.3).epsilon(1e-9));
  CHECK(g.points.vectors(0, 1) == doctest::Approx(-0.6).epsilon(1e-9));
  CHECK(g.points.vectors(0, 2) == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(g.points.vectors(0, 3) == doctest::Approx(0.6).epsilon(1e-9));
}

TEST_CASE("onehot prediction yields a zero gradient row") {
  Eigen::MatrixXd w(2, 1);
  w << 500.0, -500.0;  // softmax saturates to exactly (1, 0)
  LinearProbe probe(w, Eigen::VectorXd::Zero(2));
  const GradientEmbedding g =
      gradient_embeddings(probe, EmbeddingSet(Eigen::MatrixXd::Ones(1, 1)));
  CHECK(g.points.vectors.row(0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gradient embeddings match finite differences of the loss") {
  Rng rng(8);
  const int c = 3, d = 4;
  const LinearProbe probe = tt::random_probe(rng, c, d);
  const EmbeddingSet x = tt::random_embeddings(rng, 10, d);
  const GradientEmbedding g = gradient_embeddings(probe, x);

  const double h = 1e-5;
  for (std::size_t i = 0; i < 10; ++i) {
    const EmbeddingSet xi = x.subset(std::vector<std::size_t>{i});
    const std::int32_t label = g.labels_used[i];
    for (int k = 0; k < c; ++k) {
      for (int l = 0; l < d; ++l) {
        Eigen::MatrixXd wp = probe.weights();
        Eigen::MatrixXd wm = probe.weights();
        wp(k, l) += h;
        wm(k, l) -= h;
        const double lp = cross_entropy_loss(LinearProbe(wp, probe.bias()),
                                             xi, std::vector<std::int32_t>{label});
        const double lm = cross_entropy_loss(LinearProbe(wm, probe.bias()),
                                             xi, std::vector<std::int32_t>{label});
        const double fd = (lp - lm) / (2.0 * h);
        const double analytic = g.points.vectors(static_cast<Eigen::Index>(i),
                                                 k * d + l);
        if (std::abs(fd) > 1e-6)
          CHECK(std::abs(analytic - fd) / std::abs(fd) < 1e-4);
        else
          CHECK(std::abs(analytic - fd) < 1e-6);
      }
    }
  }
}

TEST_CASE("gradient kernel factorizes into probability and feature parts") {
  Rng rng(9);
  const int c = 3, d = 5;
  const LinearProbe probe = tt::random_probe(rng, c, d);
  const EmbeddingSet x = tt::random_embeddings(rng, 12, d);
  const GradientEmbedding g = gradient_embeddings(probe, x);
  const Eigen::MatrixXd p = predict_proba(probe, x);

  for (std::size_t i = 0; i < 12; ++i) {
    for (std::size_t j = 0; j < 12; ++j) {
      Eigen::VectorXd pi = p.row(static_cast<Eigen::Index>(i)).transpose();
      Eigen::VectorXd pj = p.row(static_cast<Eigen::Index>(j)).transpose();
      pi(g.labels_used[i]) -= 1.0;
      pj(g.labels_used[j]) -= 1.0;
      const double expected =
          pi.dot(pj) * x.vectors.row(static_cast<Eigen::Index>(i))
                           .dot(x.vectors.row(static_cast<Eigen::Index>(j)));
      const double direct =
          g.points.vectors.row(static_cast<Eigen::Index>(i))
              .dot(g.points.vectors.row(static_cast<Eigen::Index>(j)));
      CHECK(direct == doctest::Approx(expected).epsilon(1e-9));
    }
  }
}

TEST_CASE("misclassified subset") {
  // One-feature threshold probe: predicts sign of x.
  Eigen::MatrixXd w(2, 1);
  w << -1.0, 1.0;  // class 1 iff x > 0
  LinearProbe probe(w, Eigen::VectorXd::Zero(2));

  Eigen::MatrixXd pts(4, 1);
  pts << -1.0, 1.0, -2.0, 2.0;  // predicted 0, 1, 0, 1

  SUBCASE("mixed case finds exactly the wrong indices") {
    EmbeddingSet target(pts, {0, 0, 1, 1});  // items 1 and 2 are wrong
    CHECK(misclassified_subset(probe, target) ==
          std::vector<std::size_t>{1, 2});
  }
  SUBCASE("all wrong returns everything") {
    EmbeddingSet target(pts, {1, 0, 1, 0});
    CHECK(misclassified_subset(probe, target) ==
          std::vector<std::size_t>{0, 1, 2, 3});
  }
  SUBCASE("all correct falls back to the full target set") {
    EmbeddingSet target(pts, {0, 1, 0, 1});
    CHECK(misclassified_subset(probe, target) ==
          std::vector<std::size_t>{0, 1, 2, 3});
  }
  SUBCASE("unlabeled target is rejected") {
    EmbeddingSet target(pts);
    CHECK_THROWS_AS(misclassified_subset(probe, target),
                    std::invalid_argument);
  }
}

TEST_CASE("adding the target to training shrinks T-hat on average") {
  std::size_t before_total = 0, after_total = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SyntheticSpec spec;
    spec.num_classes = 2;
    spec.dim = 4;
    spec.per_class_counts = {60, 60};
    spec.separation = 2.0;
    const EmbeddingSet data = make_synthetic_gaussians(spec, seed);

    std::vector<std::size_t> train_idx, target_idx;
    for (std::size_t i = 0; i < data.size(); ++i)
      (i % 4 == 0 ? target_idx : train_idx).push_back(i);
    const EmbeddingSet train = data.subset(train_idx);
    const EmbeddingSet target = data.subset(target_idx);

    ProbeHyper hyper;
    hyper.seed = seed;
    hyper.max_epochs = 60;  // stop short of separable convergence
    const LinearProbe before = train_probe(train, 2, hyper);
    std::size_t wrong_before = 0;
    {
      const auto pred = predict_labels(before, target);
      for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i] != (*target.labels)[i]) ++wrong_before;
    }

    std::vector<std::size_t> all_idx = train_idx;
    all_idx.insert(all_idx.end(), target_idx.begin(), target_idx.end());
    const LinearProbe after = train_probe(data.subset(all_idx), 2, hyper);
    std::size_t wrong_after = 0;
    {
      const auto pred = predict_labels(after, target);
      for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i] != (*target.labels)[i]) ++wrong_after;
    }
    before_total += wrong_before;
    after_total += wrong_after;
  }
  CHECK(after_total <= before_total);
}
