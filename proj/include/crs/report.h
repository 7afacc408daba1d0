// crs/report.h

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
#include <filesystem>
#include <string>
#include <vector>

#include "crs/corpus.h"
#include "crs/embedding.h"
#include "crs/trainer.h"

namespace crs {

struct RankingEntry {
  std::string corpus_id;
  double score = 0.0;
};

// Top-k corpora by cosine similarity to the target, with the target itself
// excluded; ties broken by corpus_id.
struct RankingReport {
  std::string target_corpus_id;
  std::vector<RankingEntry> entries;  // scores nonincreasing
};

RankingReport rank_related(const EmbeddingMatrix& embeddings,
                           std::size_t target_index, std::size_t k);

// Mean-centered rows projected onto the top-2 principal directions. Sign
// convention: the largest-magnitude component of each direction is positive
// (first such index on ties), so the projection is deterministic.
struct Projection2D {
  std::vector<std::string> corpus_ids;
  Eigen::MatrixXd coords;  // n x 2, column means zero
  // Filled when corpus metadata is supplied; empty strings otherwise.
  std::vector<std::string> language_ids;
  std::vector<std::string> domain_ids;
};

Projection2D project_2d(const EmbeddingMatrix& embeddings,
                        const CorpusSet* tags = nullptr);

// Per-target held-out PER of the three strategies (taken from the final
// epoch of each run log) plus the cross-target average row.
struct ComparisonRow {
  std::string target_corpus_id;
  double pretrain_per = 0.0;
  double finetune_per = 0.0;
  double crs_per = 0.0;
};

struct StrategyComparison {
  std::vector<ComparisonRow> rows;   // sorted by target_corpus_id
  ComparisonRow average;             // target_corpus_id == "Average"
};

// Refuses (ValidationError) when the logs disagree on data_seed or corpus
// ids, or when a target is missing one of the three strategies.
StrategyComparison compare_strategies(const std::vector<RunLog>& logs);

void save_ranking_csv(const std::vector<RankingReport>& reports,
                      const std::filesystem::path& path);
void save_projection_csv(const Projection2D& projection,
                         const std::filesystem::path& path);
void save_comparison_csv(const StrategyComparison& comparison,
                         const std::filesystem::path& path);

}  // namespace crs
