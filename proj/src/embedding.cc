// crs/embedding.cc

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

#include "crs/embedding.h"

#include <fstream>

#include "crs/error.h"
#include "crs/rng.h"
#include "json.hpp"

namespace crs {

using nlohmann::json;

std::size_t EmbeddingMatrix::index_of(const std::string& corpus_id) const {
  for (std::size_t i = 0; i < corpus_ids.size(); ++i) {
    if (corpus_ids[i] == corpus_id) return i;
  }
  throw ValidationError("embedding matrix has no row for corpus_id '" +
                        corpus_id + "'");
}

bool operator==(const EmbeddingMatrix& a, const EmbeddingMatrix& b) {
  return a.corpus_ids == b.corpus_ids && a.rows.rows() == b.rows.rows() &&
         a.rows.cols() == b.rows.cols() &&
         (a.rows.array() == b.rows.array()).all();
}

EmbeddingMatrix init_embeddings(const CorpusSet& set, double init_scale,
                                std::uint64_t seed) {
  if (init_scale < 0.0) throw ValidationError("init_scale must be >= 0");
  const int dim = set.feature_dim();

  EmbeddingMatrix embeddings;
  embeddings.rows.resize(static_cast<Eigen::Index>(set.size()), dim);
  embeddings.corpus_ids.reserve(set.size());

  Rng rng = make_stream(seed, kStreamEmbedInit);
  for (std::size_t i = 0; i < set.size(); ++i) {
    embeddings.corpus_ids.push_back(set.corpora[i].meta.corpus_id);
    for (int f = 0; f < dim; ++f) {
      embeddings.rows(static_cast<Eigen::Index>(i), f) =
          next_uniform(rng, -init_scale, init_scale);
    }
  }
  return embeddings;
}

Eigen::MatrixXd bias_features(const Eigen::MatrixXd& x,
                              const Eigen::VectorXd& e) {
  if (x.cols() != e.size()) {
    throw ValidationError("bias_features: embedding dimension " +
                          std::to_string(e.size()) +
                          " does not match feature_dim " +
                          std::to_string(x.cols()));
  }
  return x.rowwise() + e.transpose();
}

Eigen::VectorXd embedding_gradient(const Eigen::MatrixXd& upstream) {
  if (upstream.rows() < 1) {
    throw ValidationError("embedding_gradient: empty upstream gradient");
  }
  return upstream.colwise().sum().transpose();
}

void save_embeddings(const EmbeddingMatrix& embeddings,
                     const std::filesystem::path& path) {
  json j;
  j["format_version"] = 1;
  j["dimension"] = embeddings.dim();
  j["embeddings"] = json::array();
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    json entry;
    entry["corpus_id"] = embeddings.corpus_ids[i];
    json vec = json::array();
    for (int f = 0; f < embeddings.dim(); ++f) {
      vec.push_back(embeddings.rows(static_cast<Eigen::Index>(i), f));
    }
    entry["vector"] = std::move(vec);
    j["embeddings"].push_back(std::move(entry));
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw IoError("write failure on " + path.string());
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError("malformed embedding file " + path.string() + ": " +
                  e.what());
  }

  EmbeddingMatrix embeddings;
  try {
    const int version = j.at("format_version").get<int>();
    if (version != 1) {
      throw IoError("embedding file format_version " +
                    std::to_string(version) + " is not supported");
    }
    const int dim = j.at("dimension").get<int>();
    const json& entries = j.at("embeddings");
    embeddings.rows.resize(static_cast<Eigen::Index>(entries.size()), dim);
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const json& entry = entries.at(i);
      embeddings.corpus_ids.push_back(entry.at("corpus_id").get<std::string>());
      const json& vec = entry.at("vector");
      if (static_cast<int>(vec.size()) != dim) {
        throw ValidationError("embedding vector for corpus '" +
                              embeddings.corpus_ids.back() +
                              "' has wrong dimension");
      }
      for (int f = 0; f < dim; ++f) {
        embeddings.rows(static_cast<Eigen::Index>(i), f) =
            vec.at(static_cast<std::size_t>(f)).get<double>();
      }
    }
  } catch (const json::exception& e) {
    throw IoError("malformed embedding file " + path.string() + ": " +
                  e.what());
  }

  for (std::size_t i = 0; i < embeddings.corpus_ids.size(); ++i) {
    for (std::size_t k = i + 1; k < embeddings.corpus_ids.size(); ++k) {
      if (embeddings.corpus_ids[i] == embeddings.corpus_ids[k]) {
        throw ValidationError("duplicate corpus_id '" +
                              embeddings.corpus_ids[i] +
                              "' in embedding file");
      }
    }
  }
  if (!embeddings.rows.allFinite()) {
    throw ValidationError("embedding file contains non-finite entries");
  }
  return embeddings;
}

}  // namespace crs
