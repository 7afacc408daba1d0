// tests/test_checkpoint.cc

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

#include <filesystem>
#include <fstream>

#include "crs/checkpoint.h"
#include "crs/corpus.h"
#include "crs/error.h"
#include "doctest.h"

using namespace crs;

namespace {

Checkpoint sample_checkpoint() {
  GridSpecOptions options;
  options.num_languages = 2;
  options.num_domains = 1;
  options.corpora_per_cell = 1;
  options.utterance_counts = {6, 6};
  options.feature_dim = 5;
  options.seed = 2;
  const CorpusSet set = generate_corpus_set(make_grid_spec(options));

  EncoderConfig config;
  config.input_dim = 5;
  config.hidden_size = 4;
  config.num_layers = 2;

  Checkpoint checkpoint;
  checkpoint.strategy = "crs";
  checkpoint.epochs_completed = 17;
  checkpoint.schedule = {0.01, 1.5};
  checkpoint.params = init_encoder_params(
      config,
      {{"L0", static_cast<int>(set.corpora[0].meta.phone_alphabet.size())},
       {"L1", static_cast<int>(set.corpora[1].meta.phone_alphabet.size())}},
      41);
  checkpoint.embeddings = init_embeddings(set, 0.1, 43);
  checkpoint.data_seed = set.data_seed;
  return checkpoint;
}

}  // namespace

TEST_CASE("checkpoints round-trip exactly") {
  const Checkpoint original = sample_checkpoint();
  const auto path =
      std::filesystem::temp_directory_path() / "crs_checkpoint.json";
  save_checkpoint(original, path);
  const Checkpoint loaded = load_checkpoint(path);
  CHECK(checkpoint_equal(original, loaded));

  // Saving the reloaded checkpoint reproduces the file byte for byte.
  const auto path2 =
      std::filesystem::temp_directory_path() / "crs_checkpoint2.json";
  save_checkpoint(loaded, path2);
  std::ifstream fa(path), fb(path2);
  const std::string bytes_a((std::istreambuf_iterator<char>(fa)),
                            std::istreambuf_iterator<char>());
  const std::string bytes_b((std::istreambuf_iterator<char>(fb)),
                            std::istreambuf_iterator<char>());
  CHECK(bytes_a == bytes_b);
}

TEST_CASE("checkpoint with empty embeddings round-trips") {
  Checkpoint checkpoint = sample_checkpoint();
  checkpoint.strategy = "pretrain";
  checkpoint.embeddings = EmbeddingMatrix{};
  const auto path =
      std::filesystem::temp_directory_path() / "crs_checkpoint_noembed.json";
  save_checkpoint(checkpoint, path);
  const Checkpoint loaded = load_checkpoint(path);
  CHECK(loaded.embeddings.size() == 0);
  CHECK(checkpoint_equal(checkpoint, loaded));
}

TEST_CASE("corrupted or version-mismatched checkpoints are rejected") {
  const Checkpoint original = sample_checkpoint();
  const auto path =
      std::filesystem::temp_directory_path() / "crs_checkpoint_bad.json";
  save_checkpoint(original, path);

  SUBCASE("truncated file") {
    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    in.close();
    std::ofstream out(path);
    out << text.substr(0, text.size() / 2);
    out.close();
    CHECK_THROWS_AS(load_checkpoint(path), IoError);
  }

  SUBCASE("unsupported format_version") {
    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    in.close();
    const auto at = text.find("\"format_version\": 1");
    REQUIRE(at != std::string::npos);
    text.replace(at, std::string("\"format_version\": 1").size(),
                 "\"format_version\": 99");
    std::ofstream out(path);
    out << text;
    out.close();
    CHECK_THROWS_WITH_AS(load_checkpoint(path),
                         doctest::Contains("format_version"), IoError);
  }

  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_checkpoint("/nonexistent/checkpoint.json"), IoError);
  }
}
