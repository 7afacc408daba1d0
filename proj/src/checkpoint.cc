// crs/checkpoint.cc

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

#include "crs/checkpoint.h"

#include <fstream>

#include "crs/error.h"
#include "json.hpp"

namespace crs {

using nlohmann::json;

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& what) {
  const std::size_t rows = j.size();
  if (rows == 0) return Eigen::MatrixXd(0, 0);
  const std::size_t cols = j.at(0).size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows),
                    static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    const json& row = j.at(i);
    if (row.size() != cols) {
      throw IoError("checkpoint field '" + what + "' is ragged");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          row.at(c).get<double>();
    }
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = j.at(i).get<double>();
  }
  return v;
}

json cell_to_json(const GruCellParams& cell) {
  json j;
  j["wz"] = matrix_to_json(cell.wz);
  j["wr"] = matrix_to_json(cell.wr);
  j["wc"] = matrix_to_json(cell.wc);
  j["uz"] = matrix_to_json(cell.uz);
  j["ur"] = matrix_to_json(cell.ur);
  j["uc"] = matrix_to_json(cell.uc);
  j["bz"] = vector_to_json(cell.bz);
  j["br"] = vector_to_json(cell.br);
  j["bc"] = vector_to_json(cell.bc);
  return j;
}

GruCellParams cell_from_json(const json& j) {
  GruCellParams cell;
  cell.wz = matrix_from_json(j.at("wz"), "wz");
  cell.wr = matrix_from_json(j.at("wr"), "wr");
  cell.wc = matrix_from_json(j.at("wc"), "wc");
  cell.uz = matrix_from_json(j.at("uz"), "uz");
  cell.ur = matrix_from_json(j.at("ur"), "ur");
  cell.uc = matrix_from_json(j.at("uc"), "uc");
  cell.bz = vector_from_json(j.at("bz"));
  cell.br = vector_from_json(j.at("br"));
  cell.bc = vector_from_json(j.at("bc"));
  return cell;
}

}  // namespace

void save_checkpoint(const Checkpoint& checkpoint,
                     const std::filesystem::path& path) {
  json j;
  j["format_version"] = checkpoint.format_version;
  j["strategy"] = checkpoint.strategy;
  j["epochs_completed"] = checkpoint.epochs_completed;
  j["schedule"] = {{"t0", checkpoint.schedule.t0},
                   {"growth", checkpoint.schedule.growth}};
  j["data_seed"] = checkpoint.data_seed;

  json encoder;
  encoder["input_dim"] = checkpoint.params.config.input_dim;
  encoder["hidden_size"] = checkpoint.params.config.hidden_size;
  encoder["num_layers"] = checkpoint.params.config.num_layers;
  encoder["layers"] = json::array();
  for (const GruLayerParams& layer : checkpoint.params.layers) {
    json jl;
    jl["fwd"] = cell_to_json(layer.fwd);
    jl["bwd"] = cell_to_json(layer.bwd);
    encoder["layers"].push_back(std::move(jl));
  }
  json heads = json::object();
  for (const auto& [language_id, head] : checkpoint.params.heads) {
    json jh;
    jh["w"] = matrix_to_json(head.w);
    jh["b"] = vector_to_json(head.b);
    heads[language_id] = std::move(jh);
  }
  encoder["heads"] = std::move(heads);
  j["encoder"] = std::move(encoder);

  json embeddings;
  embeddings["corpus_ids"] = checkpoint.embeddings.corpus_ids;
  embeddings["rows"] = matrix_to_json(checkpoint.embeddings.rows);
  j["embeddings"] = std::move(embeddings);

  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string());
  out << j.dump(1) << "\n";
  if (!out) throw IoError("write failure on " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError("malformed checkpoint " + path.string() + ": " + e.what());
  }

  Checkpoint checkpoint;
  try {
    checkpoint.format_version = j.at("format_version").get<int>();
    if (checkpoint.format_version != 1) {
      throw IoError("checkpoint format_version " +
                    std::to_string(checkpoint.format_version) +
                    " is not supported");
    }
    checkpoint.strategy = j.at("strategy").get<std::string>();
    checkpoint.epochs_completed = j.at("epochs_completed").get<std::int64_t>();
    checkpoint.schedule.t0 = j.at("schedule").at("t0").get<double>();
    checkpoint.schedule.growth = j.at("schedule").at("growth").get<double>();
    checkpoint.data_seed = j.at("data_seed").get<std::uint64_t>();

    const json& encoder = j.at("encoder");
    checkpoint.params.config.input_dim = encoder.at("input_dim").get<int>();
    checkpoint.params.config.hidden_size =
        encoder.at("hidden_size").get<int>();
    checkpoint.params.config.num_layers = encoder.at("num_layers").get<int>();
    for (const json& jl : encoder.at("layers")) {
      GruLayerParams layer;
      layer.fwd = cell_from_json(jl.at("fwd"));
      layer.bwd = cell_from_json(jl.at("bwd"));
      checkpoint.params.layers.push_back(std::move(layer));
    }
    for (const auto& [language_id, jh] : encoder.at("heads").items()) {
      HeadParams head;
      head.w = matrix_from_json(jh.at("w"), "head w");
      head.b = vector_from_json(jh.at("b"));
      checkpoint.params.heads.emplace(language_id, std::move(head));
    }

    checkpoint.embeddings.corpus_ids =
        j.at("embeddings").at("corpus_ids").get<std::vector<std::string>>();
    checkpoint.embeddings.rows =
        matrix_from_json(j.at("embeddings").at("rows"), "embeddings");
    if (checkpoint.embeddings.corpus_ids.empty()) {
      checkpoint.embeddings.rows = Eigen::MatrixXd(0, 0);
    }
  } catch (const json::exception& e) {
    throw IoError("malformed checkpoint " + path.string() + ": " + e.what());
  }
  return checkpoint;
}

bool checkpoint_equal(const Checkpoint& a, const Checkpoint& b) {
  if (a.format_version != b.format_version || a.strategy != b.strategy ||
      a.epochs_completed != b.epochs_completed ||
      a.schedule.t0 != b.schedule.t0 || a.schedule.growth != b.schedule.growth ||
      a.data_seed != b.data_seed) {
    return false;
  }
  if (!(a.embeddings == b.embeddings)) return false;
  if (!(a.params.config == b.params.config)) return false;
  if (a.params.layers.size() != b.params.layers.size()) return false;

  bool equal = true;
  // const_cast is safe: the visitor only reads.
  auto& pa = const_cast<EncoderParams&>(a.params);
  auto& pb = const_cast<EncoderParams&>(b.params);
  try {
    for_each_param_pair(pa, pb, [&equal](double& x, double& y) {
      if (x != y) equal = false;
    });
  } catch (const ValidationError&) {
    return false;
  }
  return equal;
}

}  // namespace crs
