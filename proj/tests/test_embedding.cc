// tests/test_embedding.cc

// Copyright 2026  The CRS Trainer Authors
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

#include <filesystem>

#include "crs/corpus.h"
#include "crs/embedding.h"
#include "crs/error.h"
#include "crs/rng.h"
#include "doctest.h"

using namespace crs;

namespace {

CorpusSet four_corpus_set() {
  GridSpecOptions options;
  options.num_languages = 2;
  options.num_domains = 2;
  options.corpora_per_cell = 1;
  options.utterance_counts = {5, 5, 5, 5};
  options.feature_dim = 8;
  options.seed = 5;
  return generate_corpus_set(make_grid_spec(options));
}

}  // namespace

TEST_CASE("init_embeddings shapes, range and determinism") {
  const CorpusSet set = four_corpus_set();

  const EmbeddingMatrix zero = init_embeddings(set, 0.0, 1);
  CHECK(zero.rows.isZero(0.0));
  CHECK(zero.size() == 4);
  CHECK(zero.dim() == 8);

  const EmbeddingMatrix a = init_embeddings(set, 0.1, 42);
  const EmbeddingMatrix b = init_embeddings(set, 0.1, 42);
  CHECK(a == b);
  CHECK((a.rows.array().abs() <= 0.1).all());

  const EmbeddingMatrix c = init_embeddings(set, 0.1, 43);
  CHECK_FALSE(a == c);
}

TEST_CASE("bias_features adds the embedding to every frame") {
  Eigen::MatrixXd x(1, 2);
  x << 0.5, -0.5;
  Eigen::VectorXd e(2);
  e << 0.1, 0.2;
  const Eigen::MatrixXd out = bias_features(x, e);
  CHECK(out(0, 0) == doctest::Approx(0.6));
  CHECK(out(0, 1) == doctest::Approx(-0.3));
  // Input untouched.
  CHECK(x(0, 0) == 0.5);

  SUBCASE("zero embedding is the identity") {
    const Eigen::MatrixXd same = bias_features(x, Eigen::VectorXd::Zero(2));
    CHECK((same.array() == x.array()).all());
  }

  SUBCASE("broadcast over frames") {
    Eigen::MatrixXd x3(3, 2);
    x3 << 1, 2, 3, 4, 5, 6;
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(2);
    const Eigen::MatrixXd shifted = bias_features(x3, ones);
    CHECK(shifted.rows() == 3);
    for (int t = 0; t < 3; ++t) {
      CHECK(shifted(t, 0) == doctest::Approx(x3(t, 0) + 1.0));
      CHECK(shifted(t, 1) == doctest::Approx(x3(t, 1) + 1.0));
    }
  }

  SUBCASE("dimension mismatch is an error") {
    CHECK_THROWS_AS(bias_features(x, Eigen::VectorXd::Zero(3)),
                    ValidationError);
  }
}

TEST_CASE("bias_features is additive in the embedding") {
  Rng rng = make_stream(9, 1);
  Eigen::MatrixXd x(4, 3);
  Eigen::VectorXd e1(3), e2(3);
  for (int t = 0; t < 4; ++t) {
    for (int f = 0; f < 3; ++f) x(t, f) = next_uniform(rng, -1, 1);
  }
  for (int f = 0; f < 3; ++f) {
    e1(f) = next_uniform(rng, -1, 1);
    e2(f) = next_uniform(rng, -1, 1);
  }
  const Eigen::MatrixXd once = bias_features(x, e1 + e2);
  const Eigen::MatrixXd twice = bias_features(bias_features(x, e1), e2);
  CHECK((once - twice).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("embedding_gradient is the column sum over frames") {
  Eigen::MatrixXd upstream(3, 2);
  upstream << 1, 0, 0, 1, 2, 2;
  const Eigen::VectorXd grad = embedding_gradient(upstream);
  CHECK(grad(0) == doctest::Approx(3.0));
  CHECK(grad(1) == doctest::Approx(3.0));

  const Eigen::VectorXd zero = embedding_gradient(Eigen::MatrixXd::Zero(5, 4));
  CHECK(zero.isZero(0.0));
}

TEST_CASE("embeddings round-trip through JSON exactly") {
  const CorpusSet set = four_corpus_set();
  const EmbeddingMatrix embeddings = init_embeddings(set, 0.37, 1234);

  const auto path = std::filesystem::temp_directory_path() / "crs_embed.json";
  save_embeddings(embeddings, path);
  const EmbeddingMatrix loaded = load_embeddings(path);
  CHECK(embeddings == loaded);
}
