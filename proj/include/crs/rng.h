// crs/rng.h

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

#include <cmath>
#include <cstdint>
#include <random>

namespace crs {

// std::mt19937_64 has a standard-specified output sequence, so raw draws are
// identical on every platform. The distribution transforms below are
// hand-rolled because the std::*_distribution classes are
// implementation-defined and would break bitwise reproducibility.
using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Stream tags. Every consumer of randomness owns a stream derived from
// (seed, tag[, sub]); streams never share state, so adding draws to one
// consumer cannot shift any other consumer's sequence.
enum StreamTag : std::uint64_t {
  kStreamData = 1,       // synthetic corpus generation (sub = corpus index)
  kStreamSplit = 2,      // train/test partition (sub = corpus index)
  kStreamWeights = 3,    // encoder + head initialization
  kStreamEmbedInit = 4,  // embedding matrix initialization
  kStreamCorpusChoice = 5,  // per-batch corpus draw
  kStreamUtterance = 6,     // per-batch utterance draws
};

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
  return splitmix64(base ^ splitmix64(tag));
}

inline Rng make_stream(std::uint64_t seed, std::uint64_t tag) {
  return Rng(derive_seed(seed, tag));
}

inline Rng make_stream(std::uint64_t seed, std::uint64_t tag,
                       std::uint64_t sub) {
  return Rng(derive_seed(derive_seed(seed, tag), sub));
}

// Uniform in [0, 1) with 53 random bits.
inline double next_double(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform index in [0, n); consumes exactly one raw draw.
inline std::size_t next_index(Rng& rng, std::size_t n) {
  std::size_t i = static_cast<std::size_t>(next_double(rng) *
                                           static_cast<double>(n));
  return i >= n ? n - 1 : i;
}

inline double next_uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * next_double(rng);
}

// Box-Muller without spare caching: always consumes exactly two raw draws.
inline double next_gaussian(Rng& rng) {
  double u1 = next_double(rng);
  double u2 = next_double(rng);
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

}  // namespace crs
