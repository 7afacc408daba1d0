// crs/report.cc

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

#include "crs/report.h"

#include <algorithm>
#include <fstream>
#include <map>

#include "crs/error.h"
#include "crs/sampler.h"

namespace crs {

RankingReport rank_related(const EmbeddingMatrix& embeddings,
                           std::size_t target_index, std::size_t k) {
  const std::size_t n = embeddings.size();
  if (target_index >= n) {
    throw ValidationError("rank_related: target_index out of range");
  }
  if (k > n - 1) {
    throw ValidationError("rank_related: k = " + std::to_string(k) +
                          " exceeds the " + std::to_string(n - 1) +
                          " non-target corpora");
  }

  const SimilarityVector similarity =
      similarity_vector(embeddings, target_index);

  RankingReport report;
  report.target_corpus_id = embeddings.corpus_ids[target_index];
  std::vector<RankingEntry> all;
  all.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == target_index) continue;
    all.push_back({embeddings.corpus_ids[i], similarity.scores[i]});
  }
  std::sort(all.begin(), all.end(),
            [](const RankingEntry& a, const RankingEntry& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.corpus_id < b.corpus_id;
            });
  report.entries.assign(all.begin(),
                        all.begin() + static_cast<std::ptrdiff_t>(k));
  return report;
}

Projection2D project_2d(const EmbeddingMatrix& embeddings,
                        const CorpusSet* tags) {
  const std::size_t n = embeddings.size();
  if (n < 2) throw ValidationError("project_2d: need at least 2 corpora");
  const Eigen::Index d = embeddings.rows.cols();

  // An all-zero matrix has no principal directions to speak of.
  if (embeddings.rows.rowwise().norm().maxCoeff() < 1e-12) {
    throw ValidationError("project_2d: embedding matrix is all zeros");
  }

  const Eigen::RowVectorXd mean = embeddings.rows.colwise().mean();
  const Eigen::MatrixXd centered = embeddings.rows.rowwise() - mean;
  const Eigen::MatrixXd covariance = centered.transpose() * centered;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(covariance);
  if (solver.info() != Eigen::Success) {
    throw NumericError("project_2d: eigendecomposition failed");
  }

  // Eigenvalues come back ascending; take the last two directions.
  Eigen::MatrixXd directions = Eigen::MatrixXd::Zero(d, 2);
  directions.col(0) = solver.eigenvectors().col(d - 1);
  if (d >= 2) directions.col(1) = solver.eigenvectors().col(d - 2);

  for (int c = 0; c < 2; ++c) {
    Eigen::Index max_index = 0;
    directions.col(c).cwiseAbs().maxCoeff(&max_index);
    if (directions(max_index, c) < 0.0) directions.col(c) = -directions.col(c);
  }

  Projection2D projection;
  projection.corpus_ids = embeddings.corpus_ids;
  projection.coords = centered * directions;
  projection.language_ids.assign(n, "");
  projection.domain_ids.assign(n, "");
  if (tags != nullptr) {
    for (std::size_t i = 0; i < n; ++i) {
      const Corpus& corpus =
          tags->corpora[tags->index_of(embeddings.corpus_ids[i])];
      projection.language_ids[i] = corpus.meta.language_id;
      projection.domain_ids[i] = corpus.meta.domain_id;
    }
  }
  return projection;
}

StrategyComparison compare_strategies(const std::vector<RunLog>& logs) {
  if (logs.empty()) throw ValidationError("compare_strategies: no run logs");

  const std::uint64_t data_seed = logs.front().header.data_seed;
  const std::vector<std::string>& corpus_ids = logs.front().header.corpus_ids;
  for (const RunLog& log : logs) {
    if (log.header.data_seed != data_seed) {
      throw ValidationError(
          "compare_strategies: run logs come from different data seeds (" +
          std::to_string(data_seed) + " vs " +
          std::to_string(log.header.data_seed) +
          "); results would not be comparable");
    }
    if (log.header.corpus_ids != corpus_ids) {
      throw ValidationError(
          "compare_strategies: run logs come from different corpus sets");
    }
  }

  std::map<std::string, std::map<std::string, double>> by_target;
  for (const RunLog& log : logs) {
    if (log.header.strategy == "embed") continue;
    if (log.epochs.empty() || !log.epochs.back().target_per.has_value()) {
      throw ValidationError("compare_strategies: run log for target '" +
                            log.header.target_corpus_id + "' strategy '" +
                            log.header.strategy +
                            "' has no final held-out PER");
    }
    by_target[log.header.target_corpus_id][log.header.strategy] =
        *log.epochs.back().target_per;
  }
  if (by_target.empty()) {
    throw ValidationError("compare_strategies: no strategy run logs");
  }

  StrategyComparison comparison;
  double pretrain_sum = 0.0;
  double finetune_sum = 0.0;
  double crs_sum = 0.0;
  for (const auto& [target, by_strategy] : by_target) {
    for (const char* strategy : {"pretrain", "finetune", "crs"}) {
      if (by_strategy.find(strategy) == by_strategy.end()) {
        throw ValidationError("compare_strategies: target '" + target +
                              "' is missing a '" + std::string(strategy) +
                              "' run");
      }
    }
    ComparisonRow row;
    row.target_corpus_id = target;
    row.pretrain_per = by_strategy.at("pretrain");
    row.finetune_per = by_strategy.at("finetune");
    row.crs_per = by_strategy.at("crs");
    pretrain_sum += row.pretrain_per;
    finetune_sum += row.finetune_per;
    crs_sum += row.crs_per;
    comparison.rows.push_back(std::move(row));
  }

  const double count = static_cast<double>(comparison.rows.size());
  comparison.average.target_corpus_id = "Average";
  comparison.average.pretrain_per = pretrain_sum / count;
  comparison.average.finetune_per = finetune_sum / count;
  comparison.average.crs_per = crs_sum / count;
  return comparison;
}

void save_ranking_csv(const std::vector<RankingReport>& reports,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string());
  out << "target_corpus_id,rank,corpus_id,score\n";
  out.precision(17);
  for (const RankingReport& report : reports) {
    for (std::size_t i = 0; i < report.entries.size(); ++i) {
      out << report.target_corpus_id << "," << (i + 1) << ","
          << report.entries[i].corpus_id << "," << report.entries[i].score
          << "\n";
    }
  }
  if (!out) throw IoError("write failure on " + path.string());
}

void save_projection_csv(const Projection2D& projection,
                         const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string());
  out << "corpus_id,language_id,domain_id,x,y\n";
  out.precision(17);
  for (std::size_t i = 0; i < projection.corpus_ids.size(); ++i) {
    out << projection.corpus_ids[i] << "," << projection.language_ids[i] << ","
        << projection.domain_ids[i] << ","
        << projection.coords(static_cast<Eigen::Index>(i), 0) << ","
        << projection.coords(static_cast<Eigen::Index>(i), 1) << "\n";
  }
  if (!out) throw IoError("write failure on " + path.string());
}

void save_comparison_csv(const StrategyComparison& comparison,
                         const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string());
  out << "target_corpus_id,pretrain_per,finetune_per,crs_per\n";
  out.precision(17);
  for (const ComparisonRow& row : comparison.rows) {
    out << row.target_corpus_id << "," << row.pretrain_per << ","
        << row.finetune_per << "," << row.crs_per << "\n";
  }
  out << comparison.average.target_corpus_id << ","
      << comparison.average.pretrain_per << ","
      << comparison.average.finetune_per << "," << comparison.average.crs_per
      << "\n";
  if (!out) throw IoError("write failure on " + path.string());
}

}  // namespace crs
