// crs/sampler.cc

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

#include "crs/sampler.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "crs/error.h"

namespace crs {

namespace {
constexpr double kMinNorm = 1e-12;
}

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) {
    throw ValidationError("cosine_similarity: dimension mismatch (" +
                          std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + ")");
  }
  const double na = a.norm();
  const double nb = b.norm();
  if (na < kMinNorm || nb < kMinNorm) {
    throw NumericError("cosine_similarity: degenerate embedding with norm " +
                       std::to_string(std::min(na, nb)));
  }
  const double value = a.dot(b) / (na * nb);
  return std::clamp(value, -1.0, 1.0);
}

SimilarityVector similarity_vector(const EmbeddingMatrix& embeddings,
                                   std::size_t target_index) {
  const std::size_t n = embeddings.size();
  if (target_index >= n) {
    throw ValidationError("similarity_vector: target_index out of range");
  }

  SimilarityVector result;
  result.target_index = target_index;
  result.scores.resize(n);
  const Eigen::VectorXd target =
      embeddings.rows.row(static_cast<Eigen::Index>(target_index));
  for (std::size_t i = 0; i < n; ++i) {
    if (i == target_index) {
      result.scores[i] = 1.0;
      continue;
    }
    try {
      result.scores[i] = cosine_similarity(
          embeddings.rows.row(static_cast<Eigen::Index>(i)), target);
    } catch (const NumericError& e) {
      throw NumericError(std::string(e.what()) + " (corpus_id '" +
                         embeddings.corpus_ids[i] + "')");
    }
  }
  // The target norm check would otherwise be skipped by the pinned score.
  if (target.norm() < kMinNorm) {
    throw NumericError("similarity_vector: degenerate target embedding '" +
                       embeddings.corpus_ids[target_index] + "'");
  }
  return result;
}

SamplingDistribution sampling_distribution(const SimilarityVector& scores,
                                           double temperature) {
  if (scores.size() == 0) {
    throw ValidationError("sampling_distribution: empty score vector");
  }
  if (!std::isfinite(temperature) || temperature < 0.0) {
    throw ValidationError("sampling_distribution: temperature must be a "
                          "finite nonnegative number");
  }

  const std::size_t n = scores.size();
  double max_logit = -std::numeric_limits<double>::infinity();
  for (double s : scores.scores) {
    max_logit = std::max(max_logit, temperature * s);
  }

  SamplingDistribution distribution;
  distribution.probs.resize(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = std::exp(temperature * scores.scores[i] - max_logit);
    distribution.probs[i] = e;
    total += e;
  }
  for (double& p : distribution.probs) p /= total;
  return distribution;
}

SamplingDistribution uniform_distribution(std::size_t n) {
  if (n == 0) throw ValidationError("uniform_distribution: n must be >= 1");
  SamplingDistribution distribution;
  distribution.probs.assign(n, 1.0 / static_cast<double>(n));
  return distribution;
}

SamplingDistribution onehot_distribution(std::size_t n, std::size_t index) {
  if (index >= n) throw ValidationError("onehot_distribution: index >= n");
  SamplingDistribution distribution;
  distribution.probs.assign(n, 0.0);
  distribution.probs[index] = 1.0;
  return distribution;
}

double temperature_at(const TemperatureSchedule& schedule, std::int64_t epoch) {
  if (epoch < 0) throw ValidationError("temperature_at: epoch must be >= 0");
  if (schedule.t0 < 0.0) throw ValidationError("temperature schedule: t0 < 0");
  if (schedule.growth < 1.0) {
    throw ValidationError("temperature schedule: growth must be >= 1");
  }
  return schedule.t0 * std::pow(schedule.growth, static_cast<double>(epoch));
}

std::size_t sample_corpus(const SamplingDistribution& distribution, Rng& rng) {
  if (distribution.size() == 0) {
    throw ValidationError("sample_corpus: empty distribution");
  }
  const double draw = next_double(rng);
  double cumulative = 0.0;
  for (std::size_t i = 0; i < distribution.size(); ++i) {
    cumulative += distribution.probs[i];
    if (draw < cumulative) return i;
  }
  return distribution.size() - 1;
}

void save_similarity_csv(const std::vector<std::string>& corpus_ids,
                         const SimilarityVector& scores,
                         const SamplingDistribution& distribution,
                         const std::filesystem::path& path) {
  if (corpus_ids.size() != scores.size() ||
      corpus_ids.size() != distribution.size()) {
    throw ValidationError("save_similarity_csv: size mismatch");
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string());
  out << "corpus_id,score,prob\n";
  out.precision(17);
  for (std::size_t i = 0; i < corpus_ids.size(); ++i) {
    out << corpus_ids[i] << "," << scores.scores[i] << ","
        << distribution.probs[i] << "\n";
  }
  if (!out) throw IoError("write failure on " + path.string());
}

}  // namespace crs
