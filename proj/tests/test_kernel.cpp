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

#include <Eigen/Eigenvalues>
#include <filesystem>
#include <fstream>

#include "smisel/embedding.hpp"
#include "smisel/kernel.hpp"
#include "testutil.hpp"

using namespace smisel;
namespace tt = smisel::testing;

namespace {

EmbeddingSet rows(std::initializer_list<std::initializer_list<double>> data) {
  const auto n = static_cast<Eigen::Index>(data.size());
  const auto d = static_cast<Eigen::Index>(data.begin()->size());
  Eigen::MatrixXd m(n, d);
  Eigen::Index i = 0;
  for (const auto& row : data) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return EmbeddingSet(std::move(m));
}

}  // namespace

TEST_CASE("build_kernel hand values") {
  CHECK(build_kernel(rows({{1, 0}}), rows({{1, 0}}), Metric::kCosine)
            .values()(0, 0) == doctest::Approx(1.0));
  CHECK(build_kernel(rows({{1, 0}}), rows({{0, 1}}), Metric::kCosine)
            .values()(0, 0) == doctest::Approx(0.0));
  CHECK(build_kernel(rows({{1, 1}}), rows({{2, 0}}), Metric::kDot)
            .values()(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("build_kernel errors") {
  CHECK_THROWS_WITH_AS(
      build_kernel(rows({{1, 0}}), rows({{1, 0, 0}}), Metric::kDot),
      doctest::Contains("dimension mismatch"), std::invalid_argument);

  EmbeddingSet z = rows({{1, 0}, {0, 0}});
  z.ids = {7, 42};
  CHECK_THROWS_WITH_AS(build_kernel(z, z, Metric::kCosine),
                       doctest::Contains("42"), std::invalid_argument);
  CHECK_NOTHROW(build_kernel(z, z, Metric::kDot));
}

TEST_CASE("self-kernel is symmetric with unit diagonal") {
  Rng rng(11);
  const EmbeddingSet e = tt::random_embeddings(rng, 17, 5);
  const Kernel k = build_kernel(e, e, Metric::kCosine);
  CHECK((k.values() - k.values().transpose()).cwiseAbs().maxCoeff() <= 1e-9);
  for (Eigen::Index i = 0; i < k.rows(); ++i)
    CHECK(k.values()(i, i) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(k.values().minCoeff() >= -1.0);
  CHECK(k.values().maxCoeff() <= 1.0);
}

TEST_CASE("cross kernel transpose identity") {
  Rng rng(5);
  const EmbeddingSet a = tt::random_embeddings(rng, 9, 4);
  const EmbeddingSet b = tt::random_embeddings(rng, 6, 4);
  for (Metric m : {Metric::kCosine, Metric::kDot}) {
    const Kernel ab = build_kernel(a, b, m);
    const Kernel ba = build_kernel(b, a, m);
    CHECK((ab.values() - ba.values().transpose()).cwiseAbs().maxCoeff() <=
          1e-12);
  }
}

TEST_CASE("worker count does not change the kernel bitwise") {
  Rng rng(23);
  const EmbeddingSet a = tt::random_embeddings(rng, 31, 7);
  const EmbeddingSet b = tt::random_embeddings(rng, 13, 7);
  const Kernel k1 = build_kernel(a, b, Metric::kCosine, 1);
  for (int jobs : {2, 3, 8}) {
    const Kernel kj = build_kernel(a, b, Metric::kCosine, jobs);
    CHECK(k1.values() == kj.values());  // bitwise
  }
}

TEST_CASE("shift_to_nonneg endpoints and conditions") {
  const auto make = [](std::initializer_list<double> vals, Metric m) {
    Eigen::MatrixXd v(1, static_cast<Eigen::Index>(vals.size()));
    Eigen::Index j = 0;
    for (double x : vals) v(0, j++) = x;
    return Kernel(v, {0}, tt::iota_ids(vals.size()), m);
  };

  const Kernel lo = shift_to_nonneg(make({-1.0}, Metric::kCosine));
  CHECK(lo.values()(0, 0) == doctest::Approx(0.0));
  CHECK(lo.shifted());

  // No negative entry: the map is not applied.
  const Kernel hi = shift_to_nonneg(make({1.0}, Metric::kCosine));
  CHECK(hi.values()(0, 0) == doctest::Approx(1.0));
  CHECK_FALSE(hi.shifted());

  const Kernel mid = shift_to_nonneg(make({0.5, -0.5}, Metric::kCosine));
  CHECK(mid.values()(0, 0) == doctest::Approx(0.75));
  CHECK(mid.values()(0, 1) == doctest::Approx(0.25));

  // Dot kernels are never shifted.
  const Kernel dk = shift_to_nonneg(make({-0.5}, Metric::kDot));
  CHECK(dk.values()(0, 0) == doctest::Approx(-0.5));
  CHECK_FALSE(dk.shifted());
}

TEST_CASE("shift_to_nonneg preserves each row's argmax order") {
  Rng rng(3);
  const EmbeddingSet a = tt::random_embeddings(rng, 12, 6);
  const EmbeddingSet b = tt::random_embeddings(rng, 8, 6);
  const Kernel k = build_kernel(a, b, Metric::kCosine);
  const Kernel s = shift_to_nonneg(k);
  REQUIRE(s.shifted());
  for (Eigen::Index i = 0; i < k.rows(); ++i) {
    Eigen::Index before, after;
    k.values().row(i).maxCoeff(&before);
    s.values().row(i).maxCoeff(&after);
    CHECK(before == after);
  }
}

TEST_CASE("regularize_spd") {
  Eigen::MatrixXd one(1, 1);
  one << 1.0;
  const Kernel k1 = tt::kernel_from(one);
  CHECK(regularize_spd(k1, 0.001).values()(0, 0) == doctest::Approx(1.001));

  const Kernel id2 = tt::kernel_from(Eigen::MatrixXd::Identity(2, 2));
  CHECK(regularize_spd(id2, 0.0).values() ==
        Eigen::MatrixXd::Identity(2, 2));

  // Rank-1 all-ones matrix: min eigenvalue after ridge equals the ridge.
  // Frozen from an eigen-decomposition oracle (eigenvalues 0 and 2).
  Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(2, 2);
  const Kernel reg = regularize_spd(tt::kernel_from(ones), 0.001);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(reg.values());
  CHECK(es.eigenvalues().minCoeff() == doctest::Approx(0.001).epsilon(1e-9));

  Eigen::MatrixXd rect(1, 2);
  rect << 1.0, 2.0;
  CHECK_THROWS_AS(regularize_spd(tt::kernel_from(rect), 0.1),
                  std::invalid_argument);
}

TEST_CASE("cosine self-kernel is PSD after any positive ridge") {
  Rng rng(29);
  for (int trial = 0; trial < 5; ++trial) {
    const EmbeddingSet e = tt::random_embeddings(rng, 10, 3);
    const Kernel k = regularize_spd(
        build_kernel(e, e, Metric::kCosine), 1e-9 + 1e-6 * trial);
    const Eigen::LLT<Eigen::MatrixXd> llt(k.values());
    CHECK(llt.info() == Eigen::Success);
  }
}

TEST_CASE("entry read instrumentation") {
  const Kernel k = tt::kernel_from(Eigen::MatrixXd::Ones(4, 3));
  k.reset_entry_reads();
  (void)k.entry(0, 0);
  (void)k.column(1);  // 4 reads
  (void)k.row(2);     // 3 reads
  CHECK(k.entry_reads() == 1 + 4 + 3);
  k.reset_entry_reads();
  CHECK(k.entry_reads() == 0);
}

TEST_CASE("embedding file round trip") {
  Rng rng(7);
  EmbeddingSet e = tt::random_embeddings(rng, 20, 6);
  e.labels.emplace(20);
  for (std::size_t i = 0; i < 20; ++i) (*e.labels)[i] = static_cast<int>(i % 3);
  for (std::size_t i = 0; i < 20; ++i) e.ids[i] = 1000 + static_cast<int>(i);

  const auto dir = std::filesystem::temp_directory_path() / "smisel_kernel_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "emb.json";
  save_embedding_set(e, path);
  const EmbeddingSet back = load_embedding_set(path);

  REQUIRE(back.size() == e.size());
  REQUIRE(back.dim() == e.dim());
  CHECK(back.ids == e.ids);
  CHECK(*back.labels == *e.labels);
  // Values survive the f32 round trip at float precision.
  CHECK((back.vectors - e.vectors).cwiseAbs().maxCoeff() <= 1e-6);

  SUBCASE("truncated binary reports the byte offset") {
    const auto short_path = dir / "short.json";
    save_embedding_set(e, short_path);
    const auto bin = dir / "short.bin";
    std::filesystem::resize_file(bin, std::filesystem::file_size(bin) - 9);
    CHECK_THROWS_WITH_AS(load_embedding_set(short_path),
                         doctest::Contains("offset"), std::runtime_error);
  }

  SUBCASE("missing header field is named") {
    std::ofstream bad(dir / "bad.json");
    bad << R"({"n": 2, "d": 3, "dtype": "f32", "labels": false})";
    bad.close();
    CHECK_THROWS_WITH_AS(load_embedding_set(dir / "bad.json"),
                         doctest::Contains("\"ids\""), std::runtime_error);
  }

  SUBCASE("malformed JSON names the byte") {
    std::ofstream bad(dir / "broken.json");
    bad << "{\"n\": 2,,}";
    bad.close();
    CHECK_THROWS_WITH_AS(load_embedding_set(dir / "broken.json"),
                         doctest::Contains("byte"), std::runtime_error);
  }
}
