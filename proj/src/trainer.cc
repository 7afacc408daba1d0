// crs/trainer.cc

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

#include "crs/trainer.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "crs/error.h"
#include "crs/rng.h"
#include "json.hpp"

namespace crs {

using nlohmann::json;

Strategy strategy_from_string(const std::string& name) {
  if (name == "pretrain") return Strategy::kPretrain;
  if (name == "finetune") return Strategy::kFinetune;
  if (name == "crs") return Strategy::kCrs;
  throw ValidationError("unknown strategy '" + name +
                        "' (expected pretrain, finetune or crs)");
}

std::string strategy_to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::kPretrain: return "pretrain";
    case Strategy::kFinetune: return "finetune";
    case Strategy::kCrs: return "crs";
  }
  throw ValidationError("invalid strategy value");
}

TrainSplit split_corpus(std::size_t utterance_count, std::uint64_t data_seed,
                        std::size_t corpus_index, double test_fraction) {
  if (test_fraction < 0.0 || test_fraction >= 1.0) {
    throw ValidationError("test_fraction must be in [0, 1)");
  }
  std::vector<std::size_t> order(utterance_count);
  std::iota(order.begin(), order.end(), std::size_t{0});

  // Fisher-Yates driven by the split stream; depends only on
  // (data_seed, corpus_index), never on the run seed.
  Rng rng = make_stream(data_seed, kStreamSplit, corpus_index);
  for (std::size_t i = utterance_count; i > 1; --i) {
    const std::size_t j = next_index(rng, i);
    std::swap(order[i - 1], order[j]);
  }

  std::size_t test_count = static_cast<std::size_t>(
      std::floor(static_cast<double>(utterance_count) * test_fraction + 0.5));
  if (utterance_count >= 2) {
    test_count = std::clamp<std::size_t>(test_count, 1, utterance_count - 1);
  } else {
    test_count = 0;
  }

  TrainSplit split;
  split.test_indices.assign(order.begin(),
                            order.begin() + static_cast<std::ptrdiff_t>(test_count));
  split.train_indices.assign(order.begin() + static_cast<std::ptrdiff_t>(test_count),
                             order.end());
  std::sort(split.test_indices.begin(), split.test_indices.end());
  std::sort(split.train_indices.begin(), split.train_indices.end());
  return split;
}

BatchScheduler::BatchScheduler(RunKind kind, std::size_t num_corpora,
                               std::size_t target_index,
                               std::optional<SimilarityVector> similarity,
                               TemperatureSchedule schedule)
    : kind_(kind),
      num_corpora_(num_corpora),
      target_index_(target_index),
      similarity_(std::move(similarity)),
      schedule_(schedule) {
  if (num_corpora_ == 0) throw ValidationError("scheduler: no corpora");
  if (kind_ == RunKind::kCrs) {
    if (!similarity_.has_value()) {
      throw ValidationError("crs scheduling requires a similarity vector");
    }
    if (similarity_->size() != num_corpora_) {
      throw ValidationError("similarity vector size does not match corpus count");
    }
  }
  if ((kind_ == RunKind::kFinetune || kind_ == RunKind::kCrs) &&
      target_index_ >= num_corpora_) {
    throw ValidationError("scheduler: target index out of range");
  }
  begin_epoch(0);
}

void BatchScheduler::begin_epoch(std::int64_t epoch) {
  switch (kind_) {
    case RunKind::kEmbed:
    case RunKind::kPretrain:
      distribution_ = uniform_distribution(num_corpora_);
      temperature_ = 0.0;
      break;
    case RunKind::kFinetune:
      distribution_ = onehot_distribution(num_corpora_, target_index_);
      temperature_ = std::nullopt;
      break;
    case RunKind::kCrs: {
      const double t = temperature_at(schedule_, epoch);
      distribution_ = sampling_distribution(*similarity_, t);
      temperature_ = t;
      break;
    }
  }
}

std::size_t BatchScheduler::draw(Rng& rng) {
  return sample_corpus(distribution_, rng);
}

// --- Run logs ---------------------------------------------------------------

void save_run_log(const RunLog& log, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string());

  json header;
  header["record"] = "header";
  header["format_version"] = log.header.format_version;
  header["strategy"] = log.header.strategy;
  header["target_corpus_id"] = log.header.target_corpus_id;
  header["data_seed"] = log.header.data_seed;
  header["corpus_ids"] = log.header.corpus_ids;
  header["epochs"] = log.header.epochs;
  header["batches_per_epoch"] = log.header.batches_per_epoch;
  header["batch_size"] = log.header.batch_size;
  header["learning_rate"] = log.header.learning_rate;
  header["t0"] = log.header.t0;
  header["growth"] = log.header.growth;
  header["seed"] = log.header.seed;
  out << header.dump() << "\n";

  for (const EpochRecord& record : log.epochs) {
    json j;
    j["record"] = "epoch";
    j["epoch"] = record.epoch;
    j["temperature"] =
        record.temperature.has_value() ? json(*record.temperature) : json();
    j["target_probability"] = record.target_probability.has_value()
                                  ? json(*record.target_probability)
                                  : json();
    j["batch_counts"] = record.batch_counts;
    j["mean_train_loss"] = record.mean_train_loss;
    j["target_per"] =
        record.target_per.has_value() ? json(*record.target_per) : json();
    out << j.dump() << "\n";
  }
  if (!out) throw IoError("write failure on " + path.string());
}

RunLog load_run_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  RunLog log;
  std::string line;
  std::size_t line_number = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw IoError("malformed run log " + path.string() + " line " +
                    std::to_string(line_number) + ": " + e.what());
    }
    try {
      const std::string record = j.at("record").get<std::string>();
      if (record == "header") {
        log.header.format_version = j.at("format_version").get<int>();
        log.header.strategy = j.at("strategy").get<std::string>();
        log.header.target_corpus_id =
            j.at("target_corpus_id").get<std::string>();
        log.header.data_seed = j.at("data_seed").get<std::uint64_t>();
        log.header.corpus_ids =
            j.at("corpus_ids").get<std::vector<std::string>>();
        log.header.epochs = j.at("epochs").get<int>();
        log.header.batches_per_epoch = j.at("batches_per_epoch").get<int>();
        log.header.batch_size = j.at("batch_size").get<int>();
        log.header.learning_rate = j.at("learning_rate").get<double>();
        log.header.t0 = j.at("t0").get<double>();
        log.header.growth = j.at("growth").get<double>();
        log.header.seed = j.at("seed").get<std::uint64_t>();
        have_header = true;
      } else if (record == "epoch") {
        EpochRecord r;
        r.epoch = j.at("epoch").get<std::int64_t>();
        if (!j.at("temperature").is_null()) {
          r.temperature = j.at("temperature").get<double>();
        }
        if (!j.at("target_probability").is_null()) {
          r.target_probability = j.at("target_probability").get<double>();
        }
        r.batch_counts = j.at("batch_counts").get<std::vector<std::int64_t>>();
        r.mean_train_loss = j.at("mean_train_loss").get<double>();
        if (!j.at("target_per").is_null()) {
          r.target_per = j.at("target_per").get<double>();
        }
        log.epochs.push_back(std::move(r));
      } else {
        throw IoError("run log " + path.string() + " line " +
                      std::to_string(line_number) + ": unknown record type '" +
                      record + "'");
      }
    } catch (const json::exception& e) {
      throw IoError("malformed run log " + path.string() + " line " +
                    std::to_string(line_number) + ": " + e.what());
    }
  }
  if (!have_header) {
    throw IoError("run log " + path.string() + " has no header record");
  }
  return log;
}

// --- Training ---------------------------------------------------------------

namespace {

RunKind run_kind_of(Strategy strategy) {
  switch (strategy) {
    case Strategy::kPretrain: return RunKind::kPretrain;
    case Strategy::kFinetune: return RunKind::kFinetune;
    case Strategy::kCrs: return RunKind::kCrs;
  }
  throw ValidationError("invalid strategy value");
}

std::string run_kind_name(RunKind kind) {
  switch (kind) {
    case RunKind::kEmbed: return "embed";
    case RunKind::kPretrain: return "pretrain";
    case RunKind::kFinetune: return "finetune";
    case RunKind::kCrs: return "crs";
  }
  throw ValidationError("invalid run kind");
}

void validate_config(const TrainingRunConfig& config) {
  if (config.epochs < 1) throw ValidationError("config: epochs must be >= 1");
  if (config.batches_per_epoch < 1) {
    throw ValidationError("config: batches_per_epoch must be >= 1");
  }
  if (config.batch_size < 1) {
    throw ValidationError("config: batch_size must be >= 1");
  }
  if (!(config.learning_rate > 0.0)) {
    throw ValidationError("config: learning_rate must be > 0");
  }
  if (config.t0 < 0.0) throw ValidationError("config: t0 must be >= 0");
  if (config.growth < 1.0) throw ValidationError("config: growth must be >= 1");
  if (config.hidden_size < 1 || config.num_layers < 1) {
    throw ValidationError("config: hidden_size and num_layers must be >= 1");
  }
  if (config.embedding_init_scale < 0.0) {
    throw ValidationError("config: embedding_init_scale must be >= 0");
  }
  if (!(config.clip_norm > 0.0)) {
    throw ValidationError("config: clip_norm must be > 0");
  }
}

std::map<std::string, int> alphabet_sizes_of(const CorpusSet& set) {
  std::map<std::string, int> sizes;
  for (const Corpus& c : set.corpora) {
    sizes[c.meta.language_id] =
        static_cast<int>(c.meta.phone_alphabet.size());
  }
  return sizes;
}

EvalReport eval_on_split(const EncoderParams& params, const CorpusSet& set,
                         std::size_t corpus_index,
                         const std::vector<std::size_t>& test_indices,
                         const Eigen::VectorXd* embedding_row) {
  const Corpus& corpus = set.corpora[corpus_index];
  if (test_indices.empty()) {
    throw ValidationError("corpus '" + corpus.meta.corpus_id +
                          "' has an empty held-out split");
  }
  EvalReport report;
  report.corpus_id = corpus.meta.corpus_id;
  for (std::size_t idx : test_indices) {
    const Utterance& utt = corpus.utterances[idx];
    const Eigen::MatrixXd log_probs = utterance_log_probs(
        params, corpus.meta.language_id, utt.features, embedding_row);
    const std::vector<int> hyp = greedy_decode(log_probs);
    const EditCounts counts = edit_distance(hyp, utt.labels);
    report.substitutions += counts.substitutions;
    report.deletions += counts.deletions;
    report.insertions += counts.insertions;
    report.reference_phones += static_cast<std::int64_t>(utt.labels.size());
  }
  report.per = static_cast<double>(report.substitutions + report.deletions +
                                   report.insertions) /
               static_cast<double>(report.reference_phones);
  return report;
}

// Mean-gradient SGD step with global norm clipping over every updated
// parameter (encoder, heads and, when training embeddings, the sampled
// corpus's embedding row).
void apply_sgd_step(EncoderParams& params, EncoderParams& grads,
                    double learning_rate, double clip_norm, int batch_size,
                    Eigen::MatrixXd* embedding_rows,
                    const Eigen::VectorXd* d_embedding_row,
                    std::size_t embedding_row_index) {
  const double scale = 1.0 / static_cast<double>(batch_size);
  double squared_norm = 0.0;
  for_each_param_pair(params, grads, [&](double&, double& g) {
    const double v = g * scale;
    squared_norm += v * v;
  });
  if (d_embedding_row != nullptr) {
    squared_norm += (d_embedding_row->array() * scale).square().sum();
  }
  const double norm = std::sqrt(squared_norm);
  const double clip_factor = norm > clip_norm ? clip_norm / norm : 1.0;
  const double step = learning_rate * scale * clip_factor;

  for_each_param_pair(params, grads,
                      [step](double& p, double& g) { p -= step * g; });
  if (d_embedding_row != nullptr && embedding_rows != nullptr) {
    embedding_rows->row(static_cast<Eigen::Index>(embedding_row_index)) -=
        step * d_embedding_row->transpose();
  }
}

void check_finite(const EncoderParams& params,
                  const Eigen::MatrixXd* embedding_rows,
                  const std::string& provenance) {
  bool finite = true;
  auto& mutable_params = const_cast<EncoderParams&>(params);
  for_each_param(mutable_params, [&finite](double& p) {
    if (!std::isfinite(p)) finite = false;
  });
  if (embedding_rows != nullptr && !embedding_rows->allFinite()) finite = false;
  if (!finite) {
    throw NumericError("non-finite parameter after update (" + provenance +
                       "); consider lowering the learning rate");
  }
}

RunResult train_run(const CorpusSet& set, const TrainingRunConfig& config,
                    RunKind kind, const EmbeddingMatrix* provided_embeddings,
                    const Checkpoint* init_checkpoint) {
  validate_corpus_set(set);
  validate_config(config);
  const std::size_t n = set.size();
  const bool needs_target = kind != RunKind::kEmbed;
  const bool train_embeddings = kind == RunKind::kEmbed;

  std::size_t target_index = set.target_index;
  if (!config.target_corpus_id.empty()) {
    target_index = set.index_of(config.target_corpus_id);
  } else if (needs_target) {
    throw ValidationError("config: target_corpus_id is required for " +
                          run_kind_name(kind));
  }
  const bool have_target = !config.target_corpus_id.empty();

  if (kind == RunKind::kCrs && provided_embeddings == nullptr) {
    throw ValidationError("crs requires an embedding matrix");
  }
  if (kind == RunKind::kFinetune && init_checkpoint == nullptr) {
    throw ValidationError("finetune requires a source checkpoint");
  }
  const bool init_from_checkpoint =
      kind == RunKind::kFinetune ||
      (kind == RunKind::kCrs && config.init_from_embedding_phase);
  if (init_from_checkpoint && init_checkpoint == nullptr) {
    throw ValidationError(
        "crs with init_from_embedding_phase requires a source checkpoint");
  }

  // Held-out partitioning; the audit below guarantees training never touches
  // a test utterance.
  std::vector<TrainSplit> splits;
  splits.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    splits.push_back(split_corpus(set.corpora[i].utterances.size(),
                                  set.data_seed, i));
    if (splits.back().train_indices.empty()) {
      throw ValidationError("corpus '" + set.corpora[i].meta.corpus_id +
                            "' has no training utterances");
    }
  }

  // Parameters.
  EncoderParams params;
  if (init_from_checkpoint) {
    params = init_checkpoint->params;
    if (params.config.input_dim != set.feature_dim()) {
      throw ValidationError("source checkpoint input_dim does not match data");
    }
    for (const auto& [language_id, size] : alphabet_sizes_of(set)) {
      const auto it = params.heads.find(language_id);
      if (it == params.heads.end()) {
        throw ValidationError("source checkpoint has no head for language '" +
                              language_id + "'");
      }
      if (it->second.w.rows() != size + 1) {
        throw ValidationError("source checkpoint head for language '" +
                              language_id + "' has wrong output size");
      }
    }
  } else {
    EncoderConfig encoder_config;
    encoder_config.input_dim = set.feature_dim();
    encoder_config.hidden_size = config.hidden_size;
    encoder_config.num_layers = config.num_layers;
    params = init_encoder_params(encoder_config, alphabet_sizes_of(set),
                                 config.seed);
  }

  // Embeddings. The crs matrix is aligned to the set's corpus order and kept
  // frozen; the embed phase trains its own matrix from scratch.
  EmbeddingMatrix embeddings;
  std::optional<SimilarityVector> similarity;
  if (train_embeddings) {
    embeddings = init_embeddings(set, config.embedding_init_scale, config.seed);
  } else if (kind == RunKind::kCrs) {
    embeddings.rows.resize(static_cast<Eigen::Index>(n), set.feature_dim());
    embeddings.corpus_ids.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::string& id = set.corpora[i].meta.corpus_id;
      const std::size_t row = provided_embeddings->index_of(id);
      if (provided_embeddings->dim() != set.feature_dim()) {
        throw ValidationError("embedding dimension does not match feature_dim");
      }
      embeddings.rows.row(static_cast<Eigen::Index>(i)) =
          provided_embeddings->rows.row(static_cast<Eigen::Index>(row));
      embeddings.corpus_ids.push_back(id);
    }
    similarity = similarity_vector(embeddings, target_index);
  }

  TemperatureSchedule schedule{config.t0, config.growth};
  BatchScheduler scheduler(kind, n, target_index, similarity, schedule);

  Rng corpus_rng = make_stream(config.seed, kStreamCorpusChoice);
  Rng utterance_rng = make_stream(config.seed, kStreamUtterance);

  RunLog log;
  log.header.strategy = run_kind_name(kind);
  log.header.target_corpus_id = config.target_corpus_id;
  log.header.data_seed = set.data_seed;
  for (const Corpus& c : set.corpora) {
    log.header.corpus_ids.push_back(c.meta.corpus_id);
  }
  log.header.epochs = config.epochs;
  log.header.batches_per_epoch = config.batches_per_epoch;
  log.header.batch_size = config.batch_size;
  log.header.learning_rate = config.learning_rate;
  log.header.t0 = config.t0;
  log.header.growth = config.growth;
  log.header.seed = config.seed;

  Eigen::VectorXd d_embedding(set.feature_dim());

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    scheduler.begin_epoch(epoch);

    EpochRecord record;
    record.epoch = epoch;
    record.temperature = scheduler.temperature();
    if (have_target) {
      record.target_probability = scheduler.distribution().probs[target_index];
    }
    record.batch_counts.assign(n, 0);

    double loss_sum = 0.0;
    std::int64_t utterances_seen = 0;

    for (int batch = 0; batch < config.batches_per_epoch; ++batch) {
      const std::size_t corpus_index = scheduler.draw(corpus_rng);
      record.batch_counts[corpus_index] += 1;
      const Corpus& corpus = set.corpora[corpus_index];
      const TrainSplit& split = splits[corpus_index];
      const std::string provenance =
          "epoch " + std::to_string(epoch) + ", batch " +
          std::to_string(batch) + ", corpus '" + corpus.meta.corpus_id + "'";

      EncoderParams grads = zero_like(params);
      d_embedding.setZero();
      const Eigen::VectorXd bias_row =
          train_embeddings
              ? Eigen::VectorXd(embeddings.rows
                                    .row(static_cast<Eigen::Index>(corpus_index))
                                    .transpose())
              : Eigen::VectorXd();

      for (int b = 0; b < config.batch_size; ++b) {
        const std::size_t pick = next_index(utterance_rng,
                                            split.train_indices.size());
        const std::size_t utt_index = split.train_indices[pick];
        if (std::binary_search(split.test_indices.begin(),
                               split.test_indices.end(), utt_index)) {
          throw std::logic_error("train draw hit the held-out split");
        }
        const Utterance& utt = corpus.utterances[utt_index];
        try {
          loss_sum += utterance_forward_backward(
              params, corpus.meta.language_id, utt.features, utt.labels,
              train_embeddings ? &bias_row : nullptr, &grads,
              train_embeddings ? &d_embedding : nullptr);
        } catch (const ValidationError& e) {
          throw ValidationError(std::string(e.what()) + " (" + provenance +
                                ", utterance " + std::to_string(utt_index) +
                                ")");
        } catch (const NumericError& e) {
          throw NumericError(std::string(e.what()) + " (" + provenance +
                             ", utterance " + std::to_string(utt_index) + ")");
        }
        ++utterances_seen;
      }

      apply_sgd_step(params, grads, config.learning_rate, config.clip_norm,
                     config.batch_size,
                     train_embeddings ? &embeddings.rows : nullptr,
                     train_embeddings ? &d_embedding : nullptr, corpus_index);
      check_finite(params, train_embeddings ? &embeddings.rows : nullptr,
                   provenance);
    }

    record.mean_train_loss =
        loss_sum / static_cast<double>(utterances_seen);
    if (have_target && !splits[target_index].test_indices.empty()) {
      const Eigen::VectorXd target_bias =
          train_embeddings
              ? Eigen::VectorXd(embeddings.rows
                                    .row(static_cast<Eigen::Index>(target_index))
                                    .transpose())
              : Eigen::VectorXd();
      record.target_per =
          eval_on_split(params, set, target_index,
                        splits[target_index].test_indices,
                        train_embeddings ? &target_bias : nullptr)
              .per;
    }
    log.epochs.push_back(std::move(record));
  }

  RunResult result;
  result.checkpoint.strategy = run_kind_name(kind);
  result.checkpoint.epochs_completed = config.epochs;
  result.checkpoint.schedule = schedule;
  result.checkpoint.params = std::move(params);
  result.checkpoint.embeddings = std::move(embeddings);
  result.checkpoint.data_seed = set.data_seed;
  result.log = std::move(log);
  return result;
}

}  // namespace

RunResult train_embedding_phase(const CorpusSet& set,
                                const TrainingRunConfig& config) {
  return train_run(set, config, RunKind::kEmbed, nullptr, nullptr);
}

RunResult run_strategy(const CorpusSet& set, const TrainingRunConfig& config,
                       const EmbeddingMatrix* embeddings,
                       const Checkpoint* init) {
  return train_run(set, config, run_kind_of(config.strategy), embeddings,
                   init);
}

// --- Evaluation -------------------------------------------------------------

EditCounts edit_distance(const std::vector<int>& hyp,
                         const std::vector<int>& ref) {
  const std::size_t m = hyp.size();
  const std::size_t n = ref.size();

  // dist[i][j]: edit distance between hyp[0..i) and ref[0..j).
  std::vector<std::vector<std::int64_t>> dist(
      m + 1, std::vector<std::int64_t>(n + 1, 0));
  for (std::size_t i = 1; i <= m; ++i) dist[i][0] = static_cast<std::int64_t>(i);
  for (std::size_t j = 1; j <= n; ++j) dist[0][j] = static_cast<std::int64_t>(j);
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      const std::int64_t diagonal =
          dist[i - 1][j - 1] + (hyp[i - 1] == ref[j - 1] ? 0 : 1);
      dist[i][j] = std::min({diagonal, dist[i - 1][j] + 1, dist[i][j - 1] + 1});
    }
  }

  // Backtrace with a fixed preference order (match, substitution, deletion,
  // insertion) so the decomposition is deterministic.
  EditCounts counts;
  counts.distance = dist[m][n];
  std::size_t i = m;
  std::size_t j = n;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && hyp[i - 1] == ref[j - 1] &&
        dist[i][j] == dist[i - 1][j - 1]) {
      --i;
      --j;
    } else if (i > 0 && j > 0 && dist[i][j] == dist[i - 1][j - 1] + 1) {
      ++counts.substitutions;
      --i;
      --j;
    } else if (j > 0 && dist[i][j] == dist[i][j - 1] + 1) {
      ++counts.deletions;
      --j;
    } else {
      ++counts.insertions;
      --i;
    }
  }
  return counts;
}

EvalReport evaluate_per(const Checkpoint& checkpoint, const CorpusSet& set,
                        const std::string& corpus_id) {
  const std::size_t corpus_index = set.index_of(corpus_id);
  const Corpus& corpus = set.corpora[corpus_index];
  if (checkpoint.params.heads.find(corpus.meta.language_id) ==
      checkpoint.params.heads.end()) {
    throw ValidationError("checkpoint has no head for language '" +
                          corpus.meta.language_id + "'");
  }
  const auto& head = checkpoint.params.heads.at(corpus.meta.language_id);
  if (head.w.rows() !=
      static_cast<Eigen::Index>(corpus.meta.phone_alphabet.size()) + 1) {
    throw ValidationError("checkpoint head for language '" +
                          corpus.meta.language_id +
                          "' does not match the corpus alphabet");
  }

  const TrainSplit split =
      split_corpus(corpus.utterances.size(), set.data_seed, corpus_index);

  Eigen::VectorXd bias_row;
  const Eigen::VectorXd* bias = nullptr;
  if (checkpoint.strategy == "embed") {
    const std::size_t row = checkpoint.embeddings.index_of(corpus_id);
    bias_row = checkpoint.embeddings.rows.row(static_cast<Eigen::Index>(row))
                   .transpose();
    bias = &bias_row;
  }
  return eval_on_split(checkpoint.params, set, corpus_index,
                       split.test_indices, bias);
}

void save_eval_csv(const EvalReport& report,
                   const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string());
  out << "corpus_id,substitutions,deletions,insertions,reference_phones,per\n";
  out.precision(17);
  out << report.corpus_id << "," << report.substitutions << ","
      << report.deletions << "," << report.insertions << ","
      << report.reference_phones << "," << report.per << "\n";
  if (!out) throw IoError("write failure on " + path.string());
}

}  // namespace crs
