// tests/test_sampler.cc

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

#include <cmath>

#include "crs/error.h"
#include "crs/sampler.h"
#include "doctest.h"

using namespace crs;

namespace {

SimilarityVector make_scores(std::vector<double> scores, std::size_t target) {
  SimilarityVector v;
  v.scores = std::move(scores);
  v.target_index = target;
  return v;
}

EmbeddingMatrix make_embeddings(const std::vector<Eigen::VectorXd>& rows) {
  EmbeddingMatrix e;
  e.rows.resize(static_cast<Eigen::Index>(rows.size()), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    e.rows.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    e.corpus_ids.push_back("corpus" + std::to_string(i));
  }
  return e;
}

Eigen::VectorXd vec3(double a, double b, double c) {
  Eigen::VectorXd v(3);
  v << a, b, c;
  return v;
}

}  // namespace

TEST_CASE("cosine_similarity hand-checked values") {
  CHECK(cosine_similarity(vec3(2, 1, 7), vec3(2, 1, 7)) ==
        doctest::Approx(1.0));
  Eigen::VectorXd ex(2), ey(2);
  ex << 1, 0;
  ey << 0, 1;
  CHECK(cosine_similarity(ex, ey) == doctest::Approx(0.0));
  // dot = 8, |a| = |b| = 3.
  CHECK(cosine_similarity(vec3(1, 2, 2), vec3(2, 1, 2)) ==
        doctest::Approx(8.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("cosine_similarity rejects degenerate embeddings") {
  CHECK_THROWS_AS(cosine_similarity(vec3(0, 0, 0), vec3(1, 2, 3)),
                  NumericError);
  CHECK_THROWS_AS(cosine_similarity(vec3(1e-13, 0, 0), vec3(1, 2, 3)),
                  NumericError);
  CHECK_THROWS_AS(cosine_similarity(Eigen::VectorXd::Ones(2), vec3(1, 1, 1)),
                  ValidationError);
}

TEST_CASE("similarity_vector pins the target and orders by cosine") {
  SUBCASE("single corpus") {
    const EmbeddingMatrix e = make_embeddings({vec3(1, 0, 0)});
    const SimilarityVector s = similarity_vector(e, 0);
    REQUIRE(s.size() == 1);
    CHECK(s.scores[0] == 1.0);
  }
  SUBCASE("orthonormal rows") {
    const EmbeddingMatrix e =
        make_embeddings({vec3(1, 0, 0), vec3(0, 1, 0), vec3(0, 0, 1)});
    const SimilarityVector s = similarity_vector(e, 0);
    CHECK(s.scores[0] == 1.0);
    CHECK(s.scores[1] == doctest::Approx(0.0));
    CHECK(s.scores[2] == doctest::Approx(0.0));
  }
  SUBCASE("hand-computed scores") {
    const EmbeddingMatrix e =
        make_embeddings({vec3(1, 2, 2), vec3(2, 1, 2), vec3(3, 0, 4)});
    const SimilarityVector s = similarity_vector(e, 0);
    CHECK(s.scores[0] == 1.0);
    CHECK(s.scores[1] == doctest::Approx(8.0 / 9.0).epsilon(1e-12));
    CHECK(s.scores[2] == doctest::Approx(11.0 / 15.0).epsilon(1e-12));
  }
  SUBCASE("degenerate row names the corpus") {
    const EmbeddingMatrix e = make_embeddings({vec3(1, 2, 2), vec3(0, 0, 0)});
    CHECK_THROWS_WITH_AS(similarity_vector(e, 0),
                         doctest::Contains("corpus1"), NumericError);
  }
}

TEST_CASE("sampling_distribution at the two limits") {
  SUBCASE("zero temperature is exactly uniform") {
    const SimilarityVector s = make_scores({1.0, 0.3, -0.2, 0.9, 0.5}, 0);
    const SamplingDistribution d = sampling_distribution(s, 0.0);
    for (double p : d.probs) CHECK(p == 0.2);
  }
  SUBCASE("large temperature concentrates on the target") {
    const SimilarityVector s = make_scores({0.9, 1.0, 0.85, 0.4}, 1);
    const SamplingDistribution d = sampling_distribution(s, 1e4);
    CHECK(d.probs[1] >= 1.0 - 1e-12);
  }
}

TEST_CASE("sampling_distribution matches a high-precision softmax") {
  const SimilarityVector s = make_scores({1.0, 0.5, 0.0}, 0);
  const SamplingDistribution d = sampling_distribution(s, 2.0);
  // exp(2), exp(1), exp(0) normalized.
  CHECK(d.probs[0] == doctest::Approx(0.66524).epsilon(1e-5));
  CHECK(d.probs[1] == doctest::Approx(0.24473).epsilon(1e-5));
  CHECK(d.probs[2] == doctest::Approx(0.09003).epsilon(1e-5));

  const long double e2 = std::exp(2.0L), e1 = std::exp(1.0L), e0 = 1.0L;
  const long double total = e2 + e1 + e0;
  CHECK(d.probs[0] ==
        doctest::Approx(static_cast<double>(e2 / total)).epsilon(1e-12));
  CHECK(d.probs[1] ==
        doctest::Approx(static_cast<double>(e1 / total)).epsilon(1e-12));
  CHECK(d.probs[2] ==
        doctest::Approx(static_cast<double>(e0 / total)).epsilon(1e-12));
}

TEST_CASE("sampling_distribution properties") {
  Rng rng = make_stream(77, 2);

  SUBCASE("normalization and shift invariance") {
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t n = 2 + next_index(rng, 15);
      SimilarityVector s;
      s.target_index = 0;
      for (std::size_t i = 0; i < n; ++i) {
        s.scores.push_back(next_uniform(rng, -1.0, 1.0));
      }
      const double t = next_uniform(rng, 0.0, 20.0);
      const SamplingDistribution d = sampling_distribution(s, t);
      double total = 0.0;
      for (double p : d.probs) total += p;
      CHECK(std::abs(total - 1.0) < 1e-12);

      SimilarityVector shifted = s;
      const double delta = next_uniform(rng, -0.5, 0.5);
      for (double& v : shifted.scores) v += delta;
      const SamplingDistribution d2 = sampling_distribution(shifted, t);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(std::abs(d.probs[i] - d2.probs[i]) < 1e-12);
      }
    }
  }

  SUBCASE("target probability strictly increases in T when target is the "
          "unique maximum") {
    const SimilarityVector s = make_scores({1.0, 0.8, 0.55, -0.1, 0.3}, 0);
    double previous = 0.0;
    for (double t : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
      const double p = sampling_distribution(s, t).probs[0];
      if (t > 0.0) CHECK(p > previous);
      previous = p;
    }
  }

  SUBCASE("order preservation for positive temperature") {
    for (int trial = 0; trial < 30; ++trial) {
      const std::size_t n = 3 + next_index(rng, 10);
      SimilarityVector s;
      s.target_index = 0;
      for (std::size_t i = 0; i < n; ++i) {
        // Quantized scores keep the gaps comfortably above the double
        // rounding noise of exp.
        s.scores.push_back(
            std::round(next_uniform(rng, -1.0, 1.0) * 100.0) / 100.0);
      }
      for (double t : {0.5, 1.0, 5.0}) {
        const SamplingDistribution d = sampling_distribution(s, t);
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            if (s.scores[i] > s.scores[j]) CHECK(d.probs[i] > d.probs[j]);
            if (s.scores[i] == s.scores[j]) {
              CHECK(std::abs(d.probs[i] - d.probs[j]) < 1e-15);
            }
          }
        }
      }
    }
  }
}

TEST_CASE("temperature_at follows the closed form of the recurrence") {
  const TemperatureSchedule defaults{};
  CHECK(defaults.t0 == 0.01);
  CHECK(defaults.growth == 1.5);
  CHECK(temperature_at(defaults, 0) == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(temperature_at(defaults, 4) ==
        doctest::Approx(0.050625).epsilon(1e-13));

  SUBCASE("growth 1 keeps the temperature constant") {
    const TemperatureSchedule fixed{0.25, 1.0};
    for (std::int64_t k : {0, 1, 5, 50}) {
      CHECK(temperature_at(fixed, k) == 0.25);
    }
  }

  SUBCASE("recurrence within floating-point tolerance") {
    const TemperatureSchedule schedule{0.01, 1.5};
    for (std::int64_t k = 0; k < 60; ++k) {
      const double current = temperature_at(schedule, k);
      const double next = temperature_at(schedule, k + 1);
      CHECK(std::abs(next - schedule.growth * current) <= 1e-14 * next);
    }
  }

  SUBCASE("nondecreasing in the epoch") {
    const TemperatureSchedule schedule{0.01, 1.5};
    double previous = -1.0;
    for (std::int64_t k = 0; k <= 40; ++k) {
      const double t = temperature_at(schedule, k);
      CHECK(t >= previous);
      previous = t;
    }
  }

  CHECK_THROWS_AS(temperature_at(TemperatureSchedule{0.01, 0.5}, 1),
                  ValidationError);
  CHECK_THROWS_AS(temperature_at(TemperatureSchedule{0.01, 1.5}, -1),
                  ValidationError);
}

TEST_CASE("sample_corpus draws") {
  SUBCASE("degenerate distribution always yields its support") {
    SamplingDistribution d;
    d.probs = {0.0, 0.0, 1.0, 0.0};
    Rng rng = make_stream(5, 3);
    for (int i = 0; i < 100; ++i) CHECK(sample_corpus(d, rng) == 2);
  }

  SUBCASE("uniform draw counts concentrate binomially") {
    const SamplingDistribution d = uniform_distribution(4);
    Rng rng = make_stream(17, 4);
    std::vector<int> counts(4, 0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) counts[sample_corpus(d, rng)] += 1;
    const double expected = draws / 4.0;
    const double band = 3.0 * std::sqrt(draws * 0.25 * 0.75);
    for (int c : counts) {
      CHECK(std::abs(c - expected) <= band);
    }
  }

  SUBCASE("same seed gives the same sequence") {
    const SamplingDistribution d = uniform_distribution(6);
    Rng a = make_stream(123, 9);
    Rng b = make_stream(123, 9);
    for (int i = 0; i < 1000; ++i) {
      CHECK(sample_corpus(d, a) == sample_corpus(d, b));
    }
  }
}
