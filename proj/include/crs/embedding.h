// crs/embedding.h

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

#include "crs/corpus.h"

namespace crs {

// One learnable vector per corpus, row-aligned with corpus_ids. The embedding
// dimension equals feature_dim because the vector is added to every input
// frame of that corpus's utterances.
struct EmbeddingMatrix {
  Eigen::MatrixXd rows;  // n x d_e
  std::vector<std::string> corpus_ids;

  std::size_t size() const { return corpus_ids.size(); }
  int dim() const { return static_cast<int>(rows.cols()); }
  // Throws ValidationError when the id is unknown.
  std::size_t index_of(const std::string& corpus_id) const;
};

bool operator==(const EmbeddingMatrix& a, const EmbeddingMatrix& b);

// Entries i.i.d. uniform in [-init_scale, +init_scale], filled row-major,
// deterministic in the seed.
EmbeddingMatrix init_embeddings(const CorpusSet& set, double init_scale,
                                std::uint64_t seed);

// Adds e to every frame of x; the input is left unmodified.
Eigen::MatrixXd bias_features(const Eigen::MatrixXd& x,
                              const Eigen::VectorXd& e);

// Each frame adds e once, so the gradient w.r.t. e is the column sum of the
// upstream gradient over frames.
Eigen::VectorXd embedding_gradient(const Eigen::MatrixXd& upstream);

// JSON document {format_version, dimension, embeddings:[{corpus_id, vector}]}.
// Numbers are serialized with round-trip-exact decimal output.
void save_embeddings(const EmbeddingMatrix& embeddings,
                     const std::filesystem::path& path);
EmbeddingMatrix load_embeddings(const std::filesystem::path& path);

}  // namespace crs
