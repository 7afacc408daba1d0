// crs/trainer.h

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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "crs/checkpoint.h"
#include "crs/corpus.h"
#include "crs/sampler.h"

namespace crs {

enum class Strategy { kPretrain, kFinetune, kCrs };

Strategy strategy_from_string(const std::string& name);
std::string strategy_to_string(Strategy strategy);

// Internal run kinds: the embedding-training phase shares the training loop
// with the three strategies but additionally updates the embedding matrix and
// biases its inputs.
enum class RunKind { kEmbed, kPretrain, kFinetune, kCrs };

struct TrainingRunConfig {
  Strategy strategy = Strategy::kPretrain;
  std::string target_corpus_id;  // may be empty for the embedding phase
  int epochs = 1;
  int batches_per_epoch = 1;
  int batch_size = 1;
  double learning_rate = 0.1;
  double t0 = 0.01;
  double growth = 1.5;
  std::uint64_t seed = 0;
  std::optional<std::string> finetune_source_checkpoint;

  // Architecture and regularization knobs.
  int hidden_size = 32;
  int num_layers = 1;
  double embedding_init_scale = 0.1;
  double clip_norm = 5.0;

  // When true, a crs run starts from the embedding-phase encoder (passed as
  // the init checkpoint) instead of fresh weights.
  bool init_from_embedding_phase = false;
};

// Fixed held-out fraction; the partition depends only on (data_seed, corpus
// index), so it is identical across strategies and at evaluation time.
constexpr double kTestFraction = 0.1;

struct TrainSplit {
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;  // sorted
};

TrainSplit split_corpus(std::size_t utterance_count, std::uint64_t data_seed,
                        std::size_t corpus_index,
                        double test_fraction = kTestFraction);

// One corpus draw per batch; the whole batch then comes from that corpus.
// All strategies consume exactly one uniform draw per batch from the corpus
// stream, so runs with the same seed follow the same random path regardless
// of strategy.
class BatchScheduler {
 public:
  BatchScheduler(RunKind kind, std::size_t num_corpora,
                 std::size_t target_index,
                 std::optional<SimilarityVector> similarity,
                 TemperatureSchedule schedule);

  void begin_epoch(std::int64_t epoch);
  std::size_t draw(Rng& rng);
  const SamplingDistribution& distribution() const { return distribution_; }
  // Temperature used for the current epoch; meaningful for annealed runs.
  std::optional<double> temperature() const { return temperature_; }

 private:
  RunKind kind_;
  std::size_t num_corpora_;
  std::size_t target_index_;
  std::optional<SimilarityVector> similarity_;
  TemperatureSchedule schedule_;
  SamplingDistribution distribution_;
  std::optional<double> temperature_;
};

// --- Run logs ---------------------------------------------------------------

struct RunHeader {
  int format_version = 1;
  std::string strategy;  // "embed", "pretrain", "finetune" or "crs"
  std::string target_corpus_id;
  std::uint64_t data_seed = 0;
  std::vector<std::string> corpus_ids;
  int epochs = 0;
  int batches_per_epoch = 0;
  int batch_size = 0;
  double learning_rate = 0.0;
  double t0 = 0.0;
  double growth = 1.0;
  std::uint64_t seed = 0;
};

struct EpochRecord {
  std::int64_t epoch = 0;
  // Sampling temperature for the epoch; absent for target-only runs where the
  // softmax is never evaluated.
  std::optional<double> temperature;
  // Probability of drawing the target corpus under the epoch's distribution.
  std::optional<double> target_probability;
  std::vector<std::int64_t> batch_counts;  // aligned with header.corpus_ids
  double mean_train_loss = 0.0;
  std::optional<double> target_per;
};

struct RunLog {
  RunHeader header;
  std::vector<EpochRecord> epochs;
};

// JSON-lines: one header record followed by one record per epoch.
void save_run_log(const RunLog& log, const std::filesystem::path& path);
RunLog load_run_log(const std::filesystem::path& path);

// --- Training ---------------------------------------------------------------

struct RunResult {
  Checkpoint checkpoint;
  RunLog log;
};

// Uniform-sampling joint training of encoder weights and the embedding
// matrix; inputs are biased by the sampled corpus's embedding row. Returns
// the trained weights and the final embedding matrix (inside the checkpoint,
// strategy "embed").
RunResult train_embedding_phase(const CorpusSet& set,
                                const TrainingRunConfig& config);

// Runs one of the three strategies:
//   pretrain: per-batch corpus drawn uniformly, fresh weights;
//   finetune: every batch from the target corpus, weights from *init;
//   crs:      per-batch corpus drawn from the annealed softmax over
//             similarities computed from *embeddings (frozen), fresh weights.
// The embedding bias is not applied in any of the three; embeddings only
// shape the crs sampling distribution.
RunResult run_strategy(const CorpusSet& set, const TrainingRunConfig& config,
                       const EmbeddingMatrix* embeddings,
                       const Checkpoint* init);

// --- Evaluation -------------------------------------------------------------

struct EditCounts {
  std::int64_t distance = 0;
  std::int64_t substitutions = 0;
  std::int64_t deletions = 0;   // reference tokens missing from hyp
  std::int64_t insertions = 0;  // hyp tokens not in the reference
};

// Unit-cost Levenshtein distance with an operation decomposition
// (substitutions + deletions + insertions == distance).
EditCounts edit_distance(const std::vector<int>& hyp,
                         const std::vector<int>& ref);

struct EvalReport {
  std::string corpus_id;
  std::int64_t substitutions = 0;
  std::int64_t deletions = 0;
  std::int64_t insertions = 0;
  std::int64_t reference_phones = 0;
  double per = 0.0;
};

// Greedy-decodes the corpus's held-out split and accumulates phone error
// counts. Embedding-phase checkpoints bias inputs with their stored embedding
// row; strategy checkpoints run without a bias.
EvalReport evaluate_per(const Checkpoint& checkpoint, const CorpusSet& set,
                        const std::string& corpus_id);

void save_eval_csv(const EvalReport& report,
                   const std::filesystem::path& path);

}  // namespace crs
