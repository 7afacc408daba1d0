// crs/acoustic.h

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
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "crs/encoder.h"

namespace crs {

struct EncoderConfig {
  int input_dim = 0;
  int hidden_size = 32;
  int num_layers = 1;

  bool operator==(const EncoderConfig&) const = default;
};

// Affine map from the encoder output onto (alphabet size + 1) classes.
// Class 0 is the blank; class j
// corresponds to phone index j - 1 of the language's alphabet.
struct HeadParams {
  Eigen::MatrixXd w;  // (alphabet + 1) x encoder_output_dim
  Eigen::VectorXd b;  // alphabet + 1
};

// The whole trainable model: the shared recurrent stack plus one output head
// per language.
struct EncoderParams {
  EncoderConfig config;
  std::vector<GruLayerParams> layers;
  std::map<std::string, HeadParams> heads;  // keyed by language_id

  int output_dim() const { return 2 * config.hidden_size; }
};

// Weights uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)] filled row-major in a
// fixed order (layers, fwd before bwd, wz wr wc uz ur uc, then heads in
// language order); biases zero. Deterministic in the seed.
EncoderParams init_encoder_params(
    const EncoderConfig& config,
    const std::map<std::string, int>& alphabet_sizes, std::uint64_t seed);

EncoderParams zero_like(const EncoderParams& params);

// Visits every parameter scalar in a fixed order; used for the SGD update,
// gradient clipping, finite checks and the finite-difference tests.
void for_each_param(EncoderParams& params,
                    const std::function<void(double&)>& fn);
void for_each_param_pair(EncoderParams& params, EncoderParams& other,
                         const std::function<void(double&, double&)>& fn);

// Forward pass of the recurrent stack; frame count is preserved and the
// output width is 2 * hidden_size.
Eigen::MatrixXd encode(const Eigen::MatrixXd& x_biased,
                       const EncoderParams& params,
                       EncoderCache* cache = nullptr);

// Per-frame affine map + log-softmax for the given language's head. Rows of
// the result exponentiate-and-sum to 1.
Eigen::MatrixXd head_log_probs(const Eigen::MatrixXd& hidden,
                               const EncoderParams& params,
                               const std::string& language_id);

struct CtcResult {
  double loss = 0.0;
  // Gradient of the loss w.r.t. the pre-softmax logits, frames x (alphabet+1).
  Eigen::MatrixXd d_logits;
};

// -log P(labels | log_probs) by the forward-backward recursion over the
// blank-augmented label lattice, evaluated in log space. labels are 0-based
// phone indices. Throws ValidationError when frames < |labels| + (number of
// adjacent equal label pairs), i.e. when no alignment exists.
CtcResult ctc_loss(const Eigen::MatrixXd& log_probs,
                   const std::vector<int>& labels);

// Per-frame argmax (ties to the lowest class), collapse repeats, drop blanks.
std::vector<int> greedy_decode(const Eigen::MatrixXd& log_probs);

// Forward + backward for one utterance through bias -> encode -> head -> CTC.
// Parameter gradients are accumulated into *grads (heads entry for
// language_id and all layer weights); when d_embedding is non-null the
// gradient w.r.t. the corpus embedding row is accumulated there. Returns the
// CTC loss. embedding_row == nullptr runs the model without an input bias.
double utterance_forward_backward(const EncoderParams& params,
                                  const std::string& language_id,
                                  const Eigen::MatrixXd& features,
                                  const std::vector<int>& labels,
                                  const Eigen::VectorXd* embedding_row,
                                  EncoderParams* grads,
                                  Eigen::VectorXd* d_embedding);

// Forward-only convenience used by evaluation.
Eigen::MatrixXd utterance_log_probs(const EncoderParams& params,
                                    const std::string& language_id,
                                    const Eigen::MatrixXd& features,
                                    const Eigen::VectorXd* embedding_row);

}  // namespace crs
