// crs/encoder.cc

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

#include "crs/encoder.h"

#include <string>

#include "crs/error.h"

namespace crs {

namespace {

inline Eigen::ArrayXd sigmoid(const Eigen::ArrayXd& v) {
  return 1.0 / (1.0 + (-v).exp());
}

}  // namespace

Eigen::MatrixXd gru_forward(const GruCellParams& cell, const Eigen::MatrixXd& x,
                            GruDirCache* cache) {
  const Eigen::Index frames = x.rows();
  const Eigen::Index hidden = cell.wz.rows();
  if (x.cols() != cell.wz.cols()) {
    throw ValidationError("gru_forward: input width " + std::to_string(x.cols()) +
                          " does not match cell input size " +
                          std::to_string(cell.wz.cols()));
  }

  Eigen::MatrixXd h_seq(frames, hidden);
  Eigen::MatrixXd z_seq, r_seq, c_seq;
  if (cache != nullptr) {
    z_seq.resize(frames, hidden);
    r_seq.resize(frames, hidden);
    c_seq.resize(frames, hidden);
  }

  Eigen::VectorXd h_prev = Eigen::VectorXd::Zero(hidden);
  for (Eigen::Index t = 0; t < frames; ++t) {
    const Eigen::VectorXd x_t = x.row(t).transpose();
    const Eigen::ArrayXd z =
        sigmoid((cell.wz * x_t + cell.uz * h_prev + cell.bz).array());
    const Eigen::ArrayXd r =
        sigmoid((cell.wr * x_t + cell.ur * h_prev + cell.br).array());
    const Eigen::VectorXd rh = (r * h_prev.array()).matrix();
    const Eigen::ArrayXd c =
        ((cell.wc * x_t + cell.uc * rh + cell.bc).array()).tanh();
    const Eigen::VectorXd h =
        ((1.0 - z) * h_prev.array() + z * c).matrix();

    h_seq.row(t) = h.transpose();
    if (cache != nullptr) {
      z_seq.row(t) = z.transpose();
      r_seq.row(t) = r.transpose();
      c_seq.row(t) = c.transpose();
    }
    h_prev = h;
  }

  if (cache != nullptr) {
    cache->input = x;
    cache->z = std::move(z_seq);
    cache->r = std::move(r_seq);
    cache->c = std::move(c_seq);
    cache->h = h_seq;
  }
  return h_seq;
}

Eigen::MatrixXd gru_backward(const GruCellParams& cell,
                             const GruDirCache& cache,
                             const Eigen::MatrixXd& d_h, GruCellParams* grads) {
  const Eigen::Index frames = cache.input.rows();
  const Eigen::Index hidden = cell.wz.rows();
  if (d_h.rows() != frames || d_h.cols() != hidden) {
    throw ValidationError("gru_backward: upstream gradient shape mismatch");
  }

  Eigen::MatrixXd d_x(frames, cache.input.cols());
  Eigen::VectorXd d_h_next = Eigen::VectorXd::Zero(hidden);

  for (Eigen::Index t = frames - 1; t >= 0; --t) {
    const Eigen::ArrayXd z = cache.z.row(t).transpose().array();
    const Eigen::ArrayXd r = cache.r.row(t).transpose().array();
    const Eigen::ArrayXd c = cache.c.row(t).transpose().array();
    const Eigen::VectorXd h_prev =
        t > 0 ? Eigen::VectorXd(cache.h.row(t - 1).transpose())
              : Eigen::VectorXd(Eigen::VectorXd::Zero(hidden));
    const Eigen::VectorXd x_t = cache.input.row(t).transpose();

    // Total gradient at h_t: from the layer output plus the recurrence.
    const Eigen::ArrayXd dh = d_h.row(t).transpose().array() + d_h_next.array();

    const Eigen::ArrayXd dz = dh * (c - h_prev.array());
    const Eigen::ArrayXd dc = dh * z;
    Eigen::ArrayXd dh_prev = dh * (1.0 - z);

    const Eigen::VectorXd dc_raw = (dc * (1.0 - c * c)).matrix();
    const Eigen::VectorXd dz_raw = (dz * z * (1.0 - z)).matrix();

    const Eigen::ArrayXd drh = (cell.uc.transpose() * dc_raw).array();
    const Eigen::VectorXd dr_raw =
        (drh * h_prev.array() * r * (1.0 - r)).matrix();
    dh_prev += drh * r;

    if (grads != nullptr) {
      grads->wz.noalias() += dz_raw * x_t.transpose();
      grads->wr.noalias() += dr_raw * x_t.transpose();
      grads->wc.noalias() += dc_raw * x_t.transpose();
      grads->uz.noalias() += dz_raw * h_prev.transpose();
      grads->ur.noalias() += dr_raw * h_prev.transpose();
      grads->uc.noalias() += dc_raw * (r * h_prev.array()).matrix().transpose();
      grads->bz += dz_raw;
      grads->br += dr_raw;
      grads->bc += dc_raw;
    }

    d_x.row(t) = (cell.wz.transpose() * dz_raw + cell.wr.transpose() * dr_raw +
                  cell.wc.transpose() * dc_raw)
                     .transpose();
    d_h_next = dh_prev.matrix() + cell.uz.transpose() * dz_raw +
               cell.ur.transpose() * dr_raw;
  }
  return d_x;
}

Eigen::MatrixXd encode_layers(const std::vector<GruLayerParams>& layers,
                              const Eigen::MatrixXd& x, EncoderCache* cache) {
  if (layers.empty()) throw ValidationError("encode_layers: no layers");
  if (x.rows() < 1) throw ValidationError("encode_layers: empty input");

  if (cache != nullptr) cache->layers.resize(layers.size());

  Eigen::MatrixXd input = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    GruDirCache* fwd_cache =
        cache != nullptr ? &cache->layers[l].fwd : nullptr;
    GruDirCache* bwd_cache =
        cache != nullptr ? &cache->layers[l].bwd : nullptr;

    const Eigen::MatrixXd h_fwd = gru_forward(layers[l].fwd, input, fwd_cache);
    const Eigen::MatrixXd reversed = input.colwise().reverse();
    const Eigen::MatrixXd h_bwd_local =
        gru_forward(layers[l].bwd, reversed, bwd_cache);

    Eigen::MatrixXd out(input.rows(), h_fwd.cols() + h_bwd_local.cols());
    out.leftCols(h_fwd.cols()) = h_fwd;
    out.rightCols(h_bwd_local.cols()) = h_bwd_local.colwise().reverse();
    input = std::move(out);
  }
  return input;
}

Eigen::MatrixXd encode_layers_backward(const std::vector<GruLayerParams>& layers,
                                       const EncoderCache& cache,
                                       const Eigen::MatrixXd& d_out,
                                       std::vector<GruLayerParams>* grads) {
  if (cache.layers.size() != layers.size()) {
    throw ValidationError("encode_layers_backward: cache/layer count mismatch");
  }
  if (grads != nullptr && grads->size() != layers.size()) {
    throw ValidationError("encode_layers_backward: grads/layer count mismatch");
  }

  Eigen::MatrixXd d_current = d_out;
  for (std::size_t li = layers.size(); li-- > 0;) {
    const Eigen::Index hidden = layers[li].fwd.wz.rows();
    const Eigen::MatrixXd d_fwd = d_current.leftCols(hidden);
    // The backward direction produced its output in reversed time order.
    const Eigen::MatrixXd d_bwd_local =
        d_current.rightCols(hidden).colwise().reverse();

    GruCellParams* fwd_grads = grads != nullptr ? &(*grads)[li].fwd : nullptr;
    GruCellParams* bwd_grads = grads != nullptr ? &(*grads)[li].bwd : nullptr;

    const Eigen::MatrixXd d_in_fwd =
        gru_backward(layers[li].fwd, cache.layers[li].fwd, d_fwd, fwd_grads);
    const Eigen::MatrixXd d_in_bwd_local =
        gru_backward(layers[li].bwd, cache.layers[li].bwd, d_bwd_local,
                     bwd_grads);

    d_current = d_in_fwd + d_in_bwd_local.colwise().reverse();
  }
  return d_current;
}

GruCellParams zero_like(const GruCellParams& cell) {
  GruCellParams zero;
  zero.wz = Eigen::MatrixXd::Zero(cell.wz.rows(), cell.wz.cols());
  zero.wr = Eigen::MatrixXd::Zero(cell.wr.rows(), cell.wr.cols());
  zero.wc = Eigen::MatrixXd::Zero(cell.wc.rows(), cell.wc.cols());
  zero.uz = Eigen::MatrixXd::Zero(cell.uz.rows(), cell.uz.cols());
  zero.ur = Eigen::MatrixXd::Zero(cell.ur.rows(), cell.ur.cols());
  zero.uc = Eigen::MatrixXd::Zero(cell.uc.rows(), cell.uc.cols());
  zero.bz = Eigen::VectorXd::Zero(cell.bz.size());
  zero.br = Eigen::VectorXd::Zero(cell.br.size());
  zero.bc = Eigen::VectorXd::Zero(cell.bc.size());
  return zero;
}

GruLayerParams zero_like(const GruLayerParams& layer) {
  return GruLayerParams{zero_like(layer.fwd), zero_like(layer.bwd)};
}

}  // namespace crs
