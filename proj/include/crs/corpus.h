// crs/corpus.h

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

namespace crs {

// Metadata for one labeled corpus. Phone alphabets are per-language and
// identical across corpora that share a language_id; the blank symbol is not
// part of the alphabet.
struct CorpusMeta {
  std::string corpus_id;
  std::string language_id;
  std::string domain_id;
  std::vector<std::string> phone_alphabet;
  std::size_t utterance_count = 0;

  bool operator==(const CorpusMeta&) const = default;
};

// A feature sequence (frames x feature_dim) with its phone-index labels.
// Labels index into the owning corpus's phone_alphabet.
struct Utterance {
  Eigen::MatrixXd features;
  std::vector<int> labels;
};

bool operator==(const Utterance& a, const Utterance& b);

struct Corpus {
  CorpusMeta meta;
  std::vector<Utterance> utterances;
};

bool operator==(const Corpus& a, const Corpus& b);

struct CorpusSet {
  std::vector<Corpus> corpora;
  std::size_t target_index = 0;
  // Seed of the generating process; also pins the train/test partition.
  std::uint64_t data_seed = 0;

  std::size_t size() const { return corpora.size(); }
  // Throws ValidationError when the id is unknown.
  std::size_t index_of(const std::string& corpus_id) const;
  int feature_dim() const;
};

bool operator==(const CorpusSet& a, const CorpusSet& b);

// --- Synthetic generation -------------------------------------------------

struct LanguageSpec {
  std::string language_id;
  Eigen::MatrixXd transition;      // alphabet x alphabet, rows sum to 1
  Eigen::MatrixXd emission_means;  // alphabet x feature_dim
};

struct DomainSpec {
  std::string domain_id;
  Eigen::VectorXd channel_offset;  // feature_dim
  double noise_sigma = 0.0;
  int min_frames_per_phone = 1;
  int max_frames_per_phone = 1;
};

struct CorpusSpec {
  std::string corpus_id;
  std::string language_id;
  std::string domain_id;
  std::size_t utterance_count = 0;
  int min_label_len = 1;
  int max_label_len = 1;
};

struct SyntheticSpec {
  std::vector<LanguageSpec> languages;
  std::vector<DomainSpec> domains;
  std::vector<CorpusSpec> corpora;
  int feature_dim = 0;
  std::uint64_t seed = 0;
};

// Throws ValidationError naming the offending field.
void validate_spec(const SyntheticSpec& spec);

// Deterministic function of the spec (including its seed). Labels follow the
// language's Markov chain (uniform initial phone); each phone emits between
// min and max frames of emission mean + domain offset + Gaussian noise.
// Every corpus draws from its own stream derived from (seed, corpus index),
// so corpora are independent of each other's draw counts.
CorpusSet generate_corpus_set(const SyntheticSpec& spec);

// Convenience builder for a languages x domains grid with seeded random
// transition matrices, emission means and channel offsets.
struct GridSpecOptions {
  int num_languages = 2;
  int num_domains = 2;
  int corpora_per_cell = 2;
  // One entry per corpus, ordered (language, domain, slot); empty means 100
  // utterances each.
  std::vector<std::size_t> utterance_counts;
  int phones_per_language = 6;
  int feature_dim = 8;
  int min_label_len = 2;
  int max_label_len = 6;
  int min_frames_per_phone = 2;
  int max_frames_per_phone = 3;
  double emission_spread = 1.0;
  double offset_scale = 2.0;
  double noise_sigma = 0.4;
  std::uint64_t seed = 0;
};

SyntheticSpec make_grid_spec(const GridSpecOptions& options);

// --- Persistence ----------------------------------------------------------
//
// A corpus set is a directory: meta.json (format_version, data_seed,
// target_index, corpus metadata, optional spec echo) plus one binary record
// stream per corpus. Record stream layout (little endian):
//   magic "CRSB", u32 format_version, u32 utterance_count, then per record
//   u32 frames, u32 feature_dim, f64 features[frames*feature_dim] row-major,
//   u32 label_len, i32 labels[label_len].

void save_corpus_set(const CorpusSet& set, const std::filesystem::path& dir,
                     const SyntheticSpec* spec_echo = nullptr);

CorpusSet load_corpus_set(const std::filesystem::path& dir);

SyntheticSpec load_spec_file(const std::filesystem::path& path);
void save_spec_file(const SyntheticSpec& spec,
                    const std::filesystem::path& path);

// Invariant checks shared by the generator and the loader (unique ids,
// alphabet consistency per language, label ranges, finite features, CTC
// feasibility). Throws ValidationError.
void validate_corpus_set(const CorpusSet& set);

}  // namespace crs
