// tools/crs_main.cc

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
//
// Command-line surface. Exit codes: 0 success, 2 validation error,
// 3 numeric error, 4 I/O error.

#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "crs/checkpoint.h"
#include "crs/corpus.h"
#include "crs/embedding.h"
#include "crs/error.h"
#include "crs/report.h"
#include "crs/sampler.h"
#include "crs/trainer.h"
#include "json.hpp"

namespace {

using crs::IoError;
using crs::NumericError;
using crs::ValidationError;
using nlohmann::json;

constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

// Training configuration file. Unknown keys are rejected so that a typo
// cannot silently fall back to a default.
crs::TrainingRunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError("malformed config file " + path + ": " + e.what());
  }

  static const std::set<std::string> known = {
      "target_corpus_id", "epochs", "batches_per_epoch", "batch_size",
      "learning_rate", "t0", "growth", "seed", "finetune_source_checkpoint",
      "hidden_size", "num_layers", "embedding_init_scale", "clip_norm",
      "init_from_embedding_phase"};
  for (const auto& [key, value] : j.items()) {
    if (known.find(key) == known.end()) {
      throw ValidationError("config file " + path + ": unknown key '" + key +
                            "'");
    }
  }

  crs::TrainingRunConfig config;
  try {
    if (j.contains("target_corpus_id")) {
      config.target_corpus_id = j["target_corpus_id"].get<std::string>();
    }
    config.epochs = j.at("epochs").get<int>();
    config.batches_per_epoch = j.at("batches_per_epoch").get<int>();
    config.batch_size = j.at("batch_size").get<int>();
    config.learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("t0")) config.t0 = j["t0"].get<double>();
    if (j.contains("growth")) config.growth = j["growth"].get<double>();
    if (j.contains("seed")) config.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("finetune_source_checkpoint")) {
      config.finetune_source_checkpoint =
          j["finetune_source_checkpoint"].get<std::string>();
    }
    if (j.contains("hidden_size")) {
      config.hidden_size = j["hidden_size"].get<int>();
    }
    if (j.contains("num_layers")) {
      config.num_layers = j["num_layers"].get<int>();
    }
    if (j.contains("embedding_init_scale")) {
      config.embedding_init_scale = j["embedding_init_scale"].get<double>();
    }
    if (j.contains("clip_norm")) config.clip_norm = j["clip_norm"].get<double>();
    if (j.contains("init_from_embedding_phase")) {
      config.init_from_embedding_phase =
          j["init_from_embedding_phase"].get<bool>();
    }
  } catch (const json::exception& e) {
    throw ValidationError("config file " + path + ": " + e.what());
  }
  return config;
}

int run(int argc, char** argv) {
  CLI::App app{"crs - multitask CTC training with corpus relatedness sampling"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data",
                                 "Generate a synthetic corpus set from a spec");
  std::string gen_spec, gen_out;
  gen->add_option("--spec", gen_spec, "Synthetic spec JSON file")->required();
  gen->add_option("--out", gen_out, "Output corpus directory")->required();

  // train-embed
  auto* embed = app.add_subcommand(
      "train-embed", "Jointly train encoder weights and corpus embeddings");
  std::string embed_data, embed_config, embed_out_embed, embed_out_ckpt,
      embed_log;
  embed->add_option("--data", embed_data, "Corpus directory")->required();
  embed->add_option("--config", embed_config, "Training config JSON")
      ->required();
  embed->add_option("--out-embed", embed_out_embed, "Output embedding JSON")
      ->required();
  embed->add_option("--out-ckpt", embed_out_ckpt, "Output checkpoint")
      ->required();
  embed->add_option("--log", embed_log, "Optional run log (JSON lines)");

  // similarity
  auto* sim = app.add_subcommand(
      "similarity", "Relatedness of every corpus to a target corpus");
  std::string sim_embed, sim_target, sim_out;
  double sim_temperature = 1.0;
  sim->add_option("--embed", sim_embed, "Embedding JSON file")->required();
  sim->add_option("--target", sim_target, "Target corpus_id")->required();
  sim->add_option("--out", sim_out, "Output CSV")->required();
  sim->add_option("--temperature", sim_temperature,
                  "Temperature for the prob column (default 1.0)");

  // train
  auto* train = app.add_subcommand("train", "Train one strategy");
  std::string train_data, train_strategy, train_target, train_config,
      train_embed_file, train_init, train_out, train_log;
  train->add_option("--data", train_data, "Corpus directory")->required();
  train->add_option("--strategy", train_strategy, "pretrain|finetune|crs")
      ->required();
  train->add_option("--target", train_target, "Target corpus_id")->required();
  train->add_option("--config", train_config, "Training config JSON")
      ->required();
  train->add_option("--embed", train_embed_file,
                    "Embedding JSON (required for crs)");
  train->add_option("--init", train_init,
                    "Source checkpoint (required for finetune)");
  train->add_option("--out", train_out, "Output checkpoint")->required();
  train->add_option("--log", train_log, "Output run log (JSON lines)")
      ->required();

  // eval
  auto* eval = app.add_subcommand("eval",
                                  "Held-out phone error rate of a checkpoint");
  std::string eval_ckpt, eval_data, eval_corpus, eval_out;
  eval->add_option("--ckpt", eval_ckpt, "Checkpoint file")->required();
  eval->add_option("--data", eval_data, "Corpus directory")->required();
  eval->add_option("--corpus", eval_corpus, "Corpus to evaluate")->required();
  eval->add_option("--out", eval_out, "Output CSV")->required();

  // report
  auto* report = app.add_subcommand("report", "Analysis reports (CSV)");
  report->require_subcommand(1);

  auto* rank = report->add_subcommand(
      "rank", "Most related corpora per target (top-k by cosine)");
  std::string rank_embed, rank_target, rank_out;
  std::size_t rank_k = 2;
  rank->add_option("--embed", rank_embed, "Embedding JSON file")->required();
  rank->add_option("--target", rank_target,
                   "Only this target (default: every corpus)");
  rank->add_option("--k", rank_k, "Entries per target (default 2)");
  rank->add_option("--out", rank_out, "Output CSV")->required();

  auto* project = report->add_subcommand(
      "project", "2D principal-component projection of the embeddings");
  std::string project_embed, project_data, project_out;
  project->add_option("--embed", project_embed, "Embedding JSON file")
      ->required();
  project->add_option("--data", project_data,
                      "Corpus directory for language/domain tags");
  project->add_option("--out", project_out, "Output CSV")->required();

  auto* compare = report->add_subcommand(
      "compare", "Per-target strategy comparison from run logs");
  std::vector<std::string> compare_logs;
  std::string compare_out;
  compare->add_option("--log", compare_logs, "Run log (repeatable)")
      ->required()
      ->expected(-1);
  compare->add_option("--out", compare_out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  if (gen->parsed()) {
    const crs::SyntheticSpec spec = crs::load_spec_file(gen_spec);
    const crs::CorpusSet set = crs::generate_corpus_set(spec);
    crs::save_corpus_set(set, gen_out, &spec);
    std::cout << "wrote " << set.size() << " corpora to " << gen_out << "\n";
    return 0;
  }

  if (embed->parsed()) {
    const crs::CorpusSet set = crs::load_corpus_set(embed_data);
    crs::TrainingRunConfig config = load_config(embed_config);
    const crs::RunResult result = crs::train_embedding_phase(set, config);
    crs::save_embeddings(result.checkpoint.embeddings, embed_out_embed);
    crs::save_checkpoint(result.checkpoint, embed_out_ckpt);
    if (!embed_log.empty()) crs::save_run_log(result.log, embed_log);
    std::cout << "trained embeddings for " << set.size() << " corpora\n";
    return 0;
  }

  if (sim->parsed()) {
    const crs::EmbeddingMatrix embeddings = crs::load_embeddings(sim_embed);
    const std::size_t target = embeddings.index_of(sim_target);
    const crs::SimilarityVector scores =
        crs::similarity_vector(embeddings, target);
    const crs::SamplingDistribution distribution =
        crs::sampling_distribution(scores, sim_temperature);
    crs::save_similarity_csv(embeddings.corpus_ids, scores, distribution,
                             sim_out);
    std::cout << "wrote similarity table to " << sim_out << "\n";
    return 0;
  }

  if (train->parsed()) {
    const crs::CorpusSet set = crs::load_corpus_set(train_data);
    crs::TrainingRunConfig config = load_config(train_config);
    config.strategy = crs::strategy_from_string(train_strategy);
    config.target_corpus_id = train_target;
    if (!train_init.empty()) config.finetune_source_checkpoint = train_init;

    crs::EmbeddingMatrix embeddings;
    const crs::EmbeddingMatrix* embeddings_ptr = nullptr;
    if (config.strategy == crs::Strategy::kCrs) {
      if (train_embed_file.empty()) {
        throw ValidationError("strategy crs requires --embed");
      }
      embeddings = crs::load_embeddings(train_embed_file);
      embeddings_ptr = &embeddings;
    }

    crs::Checkpoint init;
    const crs::Checkpoint* init_ptr = nullptr;
    if (config.strategy == crs::Strategy::kFinetune) {
      if (!config.finetune_source_checkpoint.has_value()) {
        throw ValidationError("strategy finetune requires --init");
      }
      init = crs::load_checkpoint(*config.finetune_source_checkpoint);
      init_ptr = &init;
    } else if (config.strategy == crs::Strategy::kCrs &&
               config.init_from_embedding_phase) {
      if (train_init.empty()) {
        throw ValidationError(
            "crs with init_from_embedding_phase requires --init");
      }
      init = crs::load_checkpoint(train_init);
      init_ptr = &init;
    }

    const crs::RunResult result =
        crs::run_strategy(set, config, embeddings_ptr, init_ptr);
    crs::save_checkpoint(result.checkpoint, train_out);
    crs::save_run_log(result.log, train_log);
    const auto& final_per = result.log.epochs.back().target_per;
    std::cout << "finished " << train_strategy << " on target " << train_target;
    if (final_per.has_value()) std::cout << ", held-out PER " << *final_per;
    std::cout << "\n";
    return 0;
  }

  if (eval->parsed()) {
    const crs::Checkpoint checkpoint = crs::load_checkpoint(eval_ckpt);
    const crs::CorpusSet set = crs::load_corpus_set(eval_data);
    const crs::EvalReport report_out =
        crs::evaluate_per(checkpoint, set, eval_corpus);
    crs::save_eval_csv(report_out, eval_out);
    std::cout << eval_corpus << " held-out PER " << report_out.per << "\n";
    return 0;
  }

  if (rank->parsed()) {
    const crs::EmbeddingMatrix embeddings = crs::load_embeddings(rank_embed);
    std::vector<crs::RankingReport> reports;
    if (!rank_target.empty()) {
      reports.push_back(crs::rank_related(
          embeddings, embeddings.index_of(rank_target), rank_k));
    } else {
      for (std::size_t i = 0; i < embeddings.size(); ++i) {
        reports.push_back(crs::rank_related(embeddings, i, rank_k));
      }
    }
    crs::save_ranking_csv(reports, rank_out);
    std::cout << "wrote rankings to " << rank_out << "\n";
    return 0;
  }

  if (project->parsed()) {
    const crs::EmbeddingMatrix embeddings = crs::load_embeddings(project_embed);
    crs::CorpusSet set;
    const crs::CorpusSet* tags = nullptr;
    if (!project_data.empty()) {
      set = crs::load_corpus_set(project_data);
      tags = &set;
    }
    const crs::Projection2D projection = crs::project_2d(embeddings, tags);
    crs::save_projection_csv(projection, project_out);
    std::cout << "wrote projection to " << project_out << "\n";
    return 0;
  }

  if (compare->parsed()) {
    std::vector<crs::RunLog> logs;
    logs.reserve(compare_logs.size());
    for (const std::string& path : compare_logs) {
      logs.push_back(crs::load_run_log(path));
    }
    const crs::StrategyComparison comparison = crs::compare_strategies(logs);
    crs::save_comparison_csv(comparison, compare_out);
    std::cout << "wrote comparison to " << compare_out << "\n";
    return 0;
  }

  return kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
}
