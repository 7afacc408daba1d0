// crs/checkpoint.h

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
#include <string>

#include "crs/acoustic.h"
#include "crs/embedding.h"
#include "crs/sampler.h"

namespace crs {

// Versioned JSON container for a finished run: model weights, the embedding
// matrix (empty for runs that never touched embeddings), the strategy name,
// the epoch counter and the schedule state. Doubles are serialized with
// round-trip-exact decimal output, so save/load is bit-identity.
struct Checkpoint {
  int format_version = 1;
  std::string strategy;  // "embed", "pretrain", "finetune" or "crs"
  std::int64_t epochs_completed = 0;
  TemperatureSchedule schedule;
  EncoderParams params;
  EmbeddingMatrix embeddings;  // may have zero rows
  std::uint64_t data_seed = 0;
};

void save_checkpoint(const Checkpoint& checkpoint,
                     const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

bool checkpoint_equal(const Checkpoint& a, const Checkpoint& b);

}  // namespace crs
