// crs/sampler.h

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

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "crs/embedding.h"
#include "crs/rng.h"

namespace crs {

// Relatedness of every corpus to the target corpus; scores[target] == 1.
struct SimilarityVector {
  std::vector<double> scores;
  std::size_t target_index = 0;

  std::size_t size() const { return scores.size(); }
};

// Probabilities of drawing each corpus for the next batch; sums to 1.
struct SamplingDistribution {
  std::vector<double> probs;

  std::size_t size() const { return probs.size(); }
};

// Geometric temperature schedule: temperature_at(k) = t0 * growth^k.
// t0 == 0 keeps sampling uniform forever; growth == 1 keeps it fixed.
struct TemperatureSchedule {
  double t0 = 0.01;
  double growth = 1.5;
};

// (a.b) / (|a||b|), clamped to [-1, 1]. A norm below 1e-12 is reported as an
// error instead of silently returning 0, since a silent 0 would corrupt
// relatedness rankings.
double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// scores[i] = cosine(e_i, e_target); the target's own score is pinned to 1.
SimilarityVector similarity_vector(const EmbeddingMatrix& embeddings,
                                   std::size_t target_index);

// Softmax over temperature-scaled scores, evaluated with the max-shift so
// that large temperatures cannot overflow:
//   probs[i] = exp(T*s[i] - m) / sum_j exp(T*s[j] - m),  m = max_j T*s[j].
// T = 0 gives exactly 1/n per corpus; large T concentrates on the maximum.
SamplingDistribution sampling_distribution(const SimilarityVector& scores,
                                           double temperature);

SamplingDistribution uniform_distribution(std::size_t n);
SamplingDistribution onehot_distribution(std::size_t n, std::size_t index);

double temperature_at(const TemperatureSchedule& schedule, std::int64_t epoch);

// Inverse-CDF draw over the stored order; consumes exactly one uniform.
std::size_t sample_corpus(const SamplingDistribution& distribution, Rng& rng);

// CSV export: header "corpus_id,score,prob", one row per corpus.
void save_similarity_csv(const std::vector<std::string>& corpus_ids,
                         const SimilarityVector& scores,
                         const SamplingDistribution& distribution,
                         const std::filesystem::path& path);

}  // namespace crs
