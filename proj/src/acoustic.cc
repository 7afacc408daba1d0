// crs/acoustic.cc

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

#include "crs/acoustic.h"

#include <cmath>
#include <limits>

#include "crs/embedding.h"
#include "crs/error.h"
#include "crs/rng.h"

namespace crs {

namespace {

constexpr double kLogZero = -std::numeric_limits<double>::infinity();

double log_sum_exp(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

void fill_uniform(Eigen::MatrixXd& m, double bound, Rng& rng) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = next_uniform(rng, -bound, bound);
    }
  }
}

GruCellParams init_cell(int input_dim, int hidden, Rng& rng) {
  GruCellParams cell;
  const double w_bound = 1.0 / std::sqrt(static_cast<double>(input_dim));
  const double u_bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  cell.wz.resize(hidden, input_dim);
  cell.wr.resize(hidden, input_dim);
  cell.wc.resize(hidden, input_dim);
  cell.uz.resize(hidden, hidden);
  cell.ur.resize(hidden, hidden);
  cell.uc.resize(hidden, hidden);
  fill_uniform(cell.wz, w_bound, rng);
  fill_uniform(cell.wr, w_bound, rng);
  fill_uniform(cell.wc, w_bound, rng);
  fill_uniform(cell.uz, u_bound, rng);
  fill_uniform(cell.ur, u_bound, rng);
  fill_uniform(cell.uc, u_bound, rng);
  cell.bz = Eigen::VectorXd::Zero(hidden);
  cell.br = Eigen::VectorXd::Zero(hidden);
  cell.bc = Eigen::VectorXd::Zero(hidden);
  return cell;
}

void for_each_in_cell(GruCellParams& cell,
                      const std::function<void(double&)>& fn) {
  for (Eigen::MatrixXd* m : {&cell.wz, &cell.wr, &cell.wc, &cell.uz, &cell.ur,
                             &cell.uc}) {
    for (Eigen::Index i = 0; i < m->rows(); ++i) {
      for (Eigen::Index j = 0; j < m->cols(); ++j) fn((*m)(i, j));
    }
  }
  for (Eigen::VectorXd* v : {&cell.bz, &cell.br, &cell.bc}) {
    for (Eigen::Index i = 0; i < v->size(); ++i) fn((*v)(i));
  }
}

void for_each_in_cell_pair(GruCellParams& a, GruCellParams& b,
                           const std::function<void(double&, double&)>& fn) {
  const auto mats_a = {&a.wz, &a.wr, &a.wc, &a.uz, &a.ur, &a.uc};
  const auto mats_b = {&b.wz, &b.wr, &b.wc, &b.uz, &b.ur, &b.uc};
  auto ita = mats_a.begin();
  auto itb = mats_b.begin();
  for (; ita != mats_a.end(); ++ita, ++itb) {
    for (Eigen::Index i = 0; i < (*ita)->rows(); ++i) {
      for (Eigen::Index j = 0; j < (*ita)->cols(); ++j) {
        fn((**ita)(i, j), (**itb)(i, j));
      }
    }
  }
  const auto vecs_a = {&a.bz, &a.br, &a.bc};
  const auto vecs_b = {&b.bz, &b.br, &b.bc};
  auto va = vecs_a.begin();
  auto vb = vecs_b.begin();
  for (; va != vecs_a.end(); ++va, ++vb) {
    for (Eigen::Index i = 0; i < (*va)->size(); ++i) {
      fn((**va)(i), (**vb)(i));
    }
  }
}

}  // namespace

EncoderParams init_encoder_params(
    const EncoderConfig& config,
    const std::map<std::string, int>& alphabet_sizes, std::uint64_t seed) {
  if (config.input_dim < 1 || config.hidden_size < 1 || config.num_layers < 1) {
    throw ValidationError("encoder config must have positive dimensions");
  }
  if (alphabet_sizes.empty()) {
    throw ValidationError("init_encoder_params: no languages");
  }

  EncoderParams params;
  params.config = config;
  Rng rng = make_stream(seed, kStreamWeights);

  int layer_input = config.input_dim;
  for (int l = 0; l < config.num_layers; ++l) {
    GruLayerParams layer;
    layer.fwd = init_cell(layer_input, config.hidden_size, rng);
    layer.bwd = init_cell(layer_input, config.hidden_size, rng);
    params.layers.push_back(std::move(layer));
    layer_input = 2 * config.hidden_size;
  }

  const double head_bound =
      1.0 / std::sqrt(static_cast<double>(params.output_dim()));
  for (const auto& [language_id, alphabet_size] : alphabet_sizes) {
    if (alphabet_size < 1) {
      throw ValidationError("language '" + language_id +
                            "' has an empty alphabet");
    }
    HeadParams head;
    head.w.resize(alphabet_size + 1, params.output_dim());
    fill_uniform(head.w, head_bound, rng);
    head.b = Eigen::VectorXd::Zero(alphabet_size + 1);
    params.heads.emplace(language_id, std::move(head));
  }
  return params;
}

EncoderParams zero_like(const EncoderParams& params) {
  EncoderParams zero;
  zero.config = params.config;
  zero.layers.reserve(params.layers.size());
  for (const GruLayerParams& layer : params.layers) {
    zero.layers.push_back(zero_like(layer));
  }
  for (const auto& [language_id, head] : params.heads) {
    HeadParams zh;
    zh.w = Eigen::MatrixXd::Zero(head.w.rows(), head.w.cols());
    zh.b = Eigen::VectorXd::Zero(head.b.size());
    zero.heads.emplace(language_id, std::move(zh));
  }
  return zero;
}

void for_each_param(EncoderParams& params,
                    const std::function<void(double&)>& fn) {
  for (GruLayerParams& layer : params.layers) {
    for_each_in_cell(layer.fwd, fn);
    for_each_in_cell(layer.bwd, fn);
  }
  for (auto& [language_id, head] : params.heads) {
    for (Eigen::Index i = 0; i < head.w.rows(); ++i) {
      for (Eigen::Index j = 0; j < head.w.cols(); ++j) fn(head.w(i, j));
    }
    for (Eigen::Index i = 0; i < head.b.size(); ++i) fn(head.b(i));
  }
}

void for_each_param_pair(EncoderParams& params, EncoderParams& other,
                         const std::function<void(double&, double&)>& fn) {
  if (params.layers.size() != other.layers.size() ||
      params.heads.size() != other.heads.size()) {
    throw ValidationError("for_each_param_pair: shape mismatch");
  }
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    for_each_in_cell_pair(params.layers[l].fwd, other.layers[l].fwd, fn);
    for_each_in_cell_pair(params.layers[l].bwd, other.layers[l].bwd, fn);
  }
  auto ita = params.heads.begin();
  auto itb = other.heads.begin();
  for (; ita != params.heads.end(); ++ita, ++itb) {
    if (ita->first != itb->first) {
      throw ValidationError("for_each_param_pair: head key mismatch");
    }
    for (Eigen::Index i = 0; i < ita->second.w.rows(); ++i) {
      for (Eigen::Index j = 0; j < ita->second.w.cols(); ++j) {
        fn(ita->second.w(i, j), itb->second.w(i, j));
      }
    }
    for (Eigen::Index i = 0; i < ita->second.b.size(); ++i) {
      fn(ita->second.b(i), itb->second.b(i));
    }
  }
}

Eigen::MatrixXd encode(const Eigen::MatrixXd& x_biased,
                       const EncoderParams& params, EncoderCache* cache) {
  if (x_biased.cols() != params.config.input_dim) {
    throw ValidationError("encode: input width " +
                          std::to_string(x_biased.cols()) +
                          " does not match encoder input_dim " +
                          std::to_string(params.config.input_dim));
  }
  return encode_layers(params.layers, x_biased, cache);
}

Eigen::MatrixXd head_log_probs(const Eigen::MatrixXd& hidden,
                               const EncoderParams& params,
                               const std::string& language_id) {
  const auto it = params.heads.find(language_id);
  if (it == params.heads.end()) {
    throw ValidationError("no output head for language_id '" + language_id +
                          "'");
  }
  const HeadParams& head = it->second;
  if (hidden.cols() != head.w.cols()) {
    throw ValidationError("head_log_probs: hidden width mismatch");
  }

  Eigen::MatrixXd logits =
      (hidden * head.w.transpose()).rowwise() + head.b.transpose();
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    const double m = logits.row(t).maxCoeff();
    const double lse =
        m + std::log((logits.row(t).array() - m).exp().sum());
    logits.row(t).array() -= lse;
  }
  return logits;
}

CtcResult ctc_loss(const Eigen::MatrixXd& log_probs,
                   const std::vector<int>& labels) {
  const Eigen::Index frames = log_probs.rows();
  const Eigen::Index classes = log_probs.cols();
  if (frames < 1 || classes < 2) {
    throw ValidationError("ctc_loss: need at least 1 frame and 2 classes");
  }
  if (labels.empty()) throw ValidationError("ctc_loss: empty label sequence");

  int duplicates = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] + 1 >= classes) {
      throw ValidationError("ctc_loss: label index " +
                            std::to_string(labels[i]) + " out of range");
    }
    if (i > 0 && labels[i] == labels[i - 1]) ++duplicates;
  }
  const Eigen::Index min_frames =
      static_cast<Eigen::Index>(labels.size()) + duplicates;
  if (frames < min_frames) {
    throw ValidationError(
        "ctc_loss: infeasible alignment, " + std::to_string(frames) +
        " frames cannot carry " + std::to_string(labels.size()) +
        " labels with " + std::to_string(duplicates) + " adjacent repeats");
  }

  // Blank-augmented label lattice: blank, y1, blank, y2, ..., blank.
  const Eigen::Index s_len = 2 * static_cast<Eigen::Index>(labels.size()) + 1;
  std::vector<int> ext(static_cast<std::size_t>(s_len), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ext[2 * i + 1] = labels[i] + 1;
  }

  Eigen::MatrixXd alpha =
      Eigen::MatrixXd::Constant(frames, s_len, kLogZero);
  alpha(0, 0) = log_probs(0, ext[0]);
  if (s_len > 1) alpha(0, 1) = log_probs(0, ext[1]);
  for (Eigen::Index t = 1; t < frames; ++t) {
    for (Eigen::Index s = 0; s < s_len; ++s) {
      double a = alpha(t - 1, s);
      if (s >= 1) a = log_sum_exp(a, alpha(t - 1, s - 1));
      if (s >= 2 && ext[static_cast<std::size_t>(s)] != 0 &&
          ext[static_cast<std::size_t>(s)] !=
              ext[static_cast<std::size_t>(s - 2)]) {
        a = log_sum_exp(a, alpha(t - 1, s - 2));
      }
      alpha(t, s) =
          a == kLogZero ? kLogZero
                        : a + log_probs(t, ext[static_cast<std::size_t>(s)]);
    }
  }

  double log_p = alpha(frames - 1, s_len - 1);
  if (s_len > 1) log_p = log_sum_exp(log_p, alpha(frames - 1, s_len - 2));
  if (!std::isfinite(log_p)) {
    throw NumericError("ctc_loss: vanishing path probability");
  }

  // beta(t, s) includes the emission at frame t, mirroring alpha.
  Eigen::MatrixXd beta = Eigen::MatrixXd::Constant(frames, s_len, kLogZero);
  beta(frames - 1, s_len - 1) = log_probs(frames - 1, ext[s_len - 1]);
  if (s_len > 1) {
    beta(frames - 1, s_len - 2) =
        log_probs(frames - 1, ext[static_cast<std::size_t>(s_len - 2)]);
  }
  for (Eigen::Index t = frames - 2; t >= 0; --t) {
    for (Eigen::Index s = 0; s < s_len; ++s) {
      double b = beta(t + 1, s);
      if (s + 1 < s_len) b = log_sum_exp(b, beta(t + 1, s + 1));
      if (s + 2 < s_len && ext[static_cast<std::size_t>(s + 2)] != 0 &&
          ext[static_cast<std::size_t>(s + 2)] !=
              ext[static_cast<std::size_t>(s)]) {
        b = log_sum_exp(b, beta(t + 1, s + 2));
      }
      beta(t, s) =
          b == kLogZero ? kLogZero
                        : b + log_probs(t, ext[static_cast<std::size_t>(s)]);
    }
  }

  // Gradient w.r.t. pre-softmax logits: softmax(logits) - occupancy.
  CtcResult result;
  result.loss = -log_p;
  result.d_logits.resize(frames, classes);
  for (Eigen::Index t = 0; t < frames; ++t) {
    std::vector<double> occupancy(static_cast<std::size_t>(classes), kLogZero);
    for (Eigen::Index s = 0; s < s_len; ++s) {
      const int k = ext[static_cast<std::size_t>(s)];
      if (alpha(t, s) == kLogZero || beta(t, s) == kLogZero) continue;
      // alpha and beta both carry the emission at (t, s); divide one out.
      const double through = alpha(t, s) + beta(t, s) - log_probs(t, k);
      occupancy[static_cast<std::size_t>(k)] =
          log_sum_exp(occupancy[static_cast<std::size_t>(k)], through);
    }
    for (Eigen::Index k = 0; k < classes; ++k) {
      const double gamma = occupancy[static_cast<std::size_t>(k)];
      const double occ = gamma == kLogZero ? 0.0 : std::exp(gamma - log_p);
      result.d_logits(t, k) = std::exp(log_probs(t, k)) - occ;
    }
  }
  return result;
}

std::vector<int> greedy_decode(const Eigen::MatrixXd& log_probs) {
  std::vector<int> decoded;
  int previous = 0;  // blank
  for (Eigen::Index t = 0; t < log_probs.rows(); ++t) {
    Eigen::Index best = 0;
    log_probs.row(t).maxCoeff(&best);
    const int cls = static_cast<int>(best);
    if (cls != 0 && cls != previous) decoded.push_back(cls - 1);
    previous = cls;
  }
  return decoded;
}

double utterance_forward_backward(const EncoderParams& params,
                                  const std::string& language_id,
                                  const Eigen::MatrixXd& features,
                                  const std::vector<int>& labels,
                                  const Eigen::VectorXd* embedding_row,
                                  EncoderParams* grads,
                                  Eigen::VectorXd* d_embedding) {
  const Eigen::MatrixXd x_biased =
      embedding_row != nullptr ? bias_features(features, *embedding_row)
                               : features;

  EncoderCache cache;
  const Eigen::MatrixXd hidden = encode(x_biased, params, &cache);
  const Eigen::MatrixXd log_probs =
      head_log_probs(hidden, params, language_id);
  CtcResult ctc = ctc_loss(log_probs, labels);

  if (grads == nullptr) return ctc.loss;

  const HeadParams& head = params.heads.at(language_id);
  HeadParams& head_grads = grads->heads.at(language_id);
  head_grads.w.noalias() += ctc.d_logits.transpose() * hidden;
  head_grads.b += ctc.d_logits.colwise().sum().transpose();

  const Eigen::MatrixXd d_hidden = ctc.d_logits * head.w;
  const Eigen::MatrixXd d_input =
      encode_layers_backward(params.layers, cache, d_hidden, &grads->layers);

  if (d_embedding != nullptr) {
    *d_embedding += embedding_gradient(d_input);
  }
  return ctc.loss;
}

Eigen::MatrixXd utterance_log_probs(const EncoderParams& params,
                                    const std::string& language_id,
                                    const Eigen::MatrixXd& features,
                                    const Eigen::VectorXd* embedding_row) {
  const Eigen::MatrixXd x_biased =
      embedding_row != nullptr ? bias_features(features, *embedding_row)
                               : features;
  const Eigen::MatrixXd hidden = encode(x_biased, params, nullptr);
  return head_log_probs(hidden, params, language_id);
}

}  // namespace crs
