// tests/test_ctc.cc

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

#include "crs/acoustic.h"
#include "crs/error.h"
#include "crs/rng.h"
#include "doctest.h"
#include "oracles.h"

using namespace crs;

namespace {

// Random log-softmax-normalized rows.
Eigen::MatrixXd random_log_probs(int frames, int classes, Rng& rng) {
  Eigen::MatrixXd logits(frames, classes);
  for (int t = 0; t < frames; ++t) {
    for (int k = 0; k < classes; ++k) {
      logits(t, k) = next_uniform(rng, -2.0, 2.0);
    }
    const double m = logits.row(t).maxCoeff();
    const double lse = m + std::log((logits.row(t).array() - m).exp().sum());
    logits.row(t).array() -= lse;
  }
  return logits;
}

std::vector<int> random_feasible_labels(int frames, int alphabet, Rng& rng) {
  while (true) {
    const int len = 1 + static_cast<int>(next_index(rng, 3));
    std::vector<int> labels(static_cast<std::size_t>(len));
    for (int i = 0; i < len; ++i) {
      labels[static_cast<std::size_t>(i)] =
          static_cast<int>(next_index(rng, static_cast<std::size_t>(alphabet)));
    }
    int dups = 0;
    for (int i = 1; i < len; ++i) {
      if (labels[static_cast<std::size_t>(i)] ==
          labels[static_cast<std::size_t>(i - 1)]) {
        ++dups;
      }
    }
    if (frames >= len + dups) return labels;
  }
}

}  // namespace

TEST_CASE("ctc_loss single-frame single-label") {
  // Classes: blank, p, q with P(p) = 0.6 at the only frame.
  Eigen::MatrixXd lp(1, 3);
  lp << std::log(0.3), std::log(0.6), std::log(0.1);
  const CtcResult result = ctc_loss(lp, {0});
  CHECK(result.loss == doctest::Approx(-std::log(0.6)).epsilon(1e-12));
  CHECK(result.loss == doctest::Approx(0.51083).epsilon(1e-4));
}

TEST_CASE("ctc_loss two frames, uniform distribution, one label") {
  // Three valid paths (pp, p-, -p) each with probability 1/9.
  const double third = std::log(1.0 / 3.0);
  Eigen::MatrixXd lp(2, 3);
  lp << third, third, third, third, third, third;
  const CtcResult result = ctc_loss(lp, {0});
  CHECK(result.loss == doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("ctc_loss equals exhaustive path enumeration") {
  Rng rng = make_stream(31337, 1);
  for (int trial = 0; trial < 120; ++trial) {
    const int frames = 1 + static_cast<int>(next_index(rng, 6));
    const int alphabet = 1 + static_cast<int>(next_index(rng, 3));
    const Eigen::MatrixXd lp = random_log_probs(frames, alphabet + 1, rng);
    const std::vector<int> labels =
        random_feasible_labels(frames, alphabet, rng);

    const CtcResult result = ctc_loss(lp, labels);
    const double oracle = crs_test::ctc_loss_by_enumeration(lp, labels);
    CHECK(std::abs(result.loss - oracle) <= 1e-10 * std::abs(oracle));
  }
}

TEST_CASE("ctc_loss rejects infeasible alignments") {
  Eigen::MatrixXd lp(1, 3);
  lp << std::log(1.0 / 3), std::log(1.0 / 3), std::log(1.0 / 3);
  CHECK_THROWS_WITH_AS(ctc_loss(lp, {0, 0}), doctest::Contains("infeasible"),
                       ValidationError);

  Eigen::MatrixXd lp2(2, 3);
  lp2 << std::log(1.0 / 3), std::log(1.0 / 3), std::log(1.0 / 3),
      std::log(1.0 / 3), std::log(1.0 / 3), std::log(1.0 / 3);
  CHECK_THROWS_AS(ctc_loss(lp2, {0, 0}), ValidationError);  // needs 3 frames
  CHECK_NOTHROW(ctc_loss(lp2, {0, 1}));

  CHECK_THROWS_AS(ctc_loss(lp, std::vector<int>{}), ValidationError);
  CHECK_THROWS_AS(ctc_loss(lp, {5}), ValidationError);
}

TEST_CASE("ctc_loss gradient w.r.t. pre-softmax logits matches finite "
          "differences") {
  Rng rng = make_stream(99, 2);
  for (int trial = 0; trial < 10; ++trial) {
    const int frames = 2 + static_cast<int>(next_index(rng, 5));
    const int alphabet = 1 + static_cast<int>(next_index(rng, 3));
    Eigen::MatrixXd logits(frames, alphabet + 1);
    for (int t = 0; t < frames; ++t) {
      for (int k = 0; k <= alphabet; ++k) {
        logits(t, k) = next_uniform(rng, -1.5, 1.5);
      }
    }
    const std::vector<int> labels =
        random_feasible_labels(frames, alphabet, rng);

    const auto loss_of = [&]() {
      Eigen::MatrixXd lp = logits;
      for (int t = 0; t < frames; ++t) {
        const double m = lp.row(t).maxCoeff();
        const double lse = m + std::log((lp.row(t).array() - m).exp().sum());
        lp.row(t).array() -= lse;
      }
      return ctc_loss(lp, labels).loss;
    };

    Eigen::MatrixXd lp = logits;
    for (int t = 0; t < frames; ++t) {
      const double m = lp.row(t).maxCoeff();
      const double lse = m + std::log((lp.row(t).array() - m).exp().sum());
      lp.row(t).array() -= lse;
    }
    const CtcResult result = ctc_loss(lp, labels);

    for (int t = 0; t < frames; ++t) {
      for (int k = 0; k <= alphabet; ++k) {
        const double numeric =
            crs_test::central_difference(loss_of, logits(t, k));
        CHECK(crs_test::gradient_mismatch(result.d_logits(t, k), numeric) <
              1e-5);
      }
    }
  }
}

TEST_CASE("greedy_decode collapse rules") {
  const auto lp_for = [](const std::vector<int>& argmax_path, int classes) {
    Eigen::MatrixXd lp(static_cast<Eigen::Index>(argmax_path.size()), classes);
    lp.setConstant(std::log(0.1));
    for (std::size_t t = 0; t < argmax_path.size(); ++t) {
      lp(static_cast<Eigen::Index>(t), argmax_path[t]) = std::log(0.8);
    }
    return lp;
  };

  // blank, p, p, blank, q collapses to [p, q]  (p = class 1, q = class 2).
  CHECK(greedy_decode(lp_for({0, 1, 1, 0, 2}, 3)) == std::vector<int>{0, 1});
  // All blanks decode to the empty sequence.
  CHECK(greedy_decode(lp_for({0, 0, 0}, 3)).empty());
  // A blank separates repeats: p, blank, p decodes to [p, p].
  CHECK(greedy_decode(lp_for({1, 0, 1}, 3)) == std::vector<int>{0, 0});
}
