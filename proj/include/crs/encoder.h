// crs/encoder.h

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
#include <vector>

namespace crs {

// Gated recurrent cell. Update equations, with x_t the frame input, h_{t-1}
// the previous hidden state (h_{-1} = 0) and sigma the logistic function:
//
//   z_t = sigma(wz x_t + uz h_{t-1} + bz)         update gate
//   r_t = sigma(wr x_t + ur h_{t-1} + br)         reset gate
//   c_t = tanh(wc x_t + uc (r_t . h_{t-1}) + bc)  candidate state
//   h_t = (1 - z_t) . h_{t-1} + z_t . c_t
//
// ('.' is the elementwise product.) The backward pass in gru_backward is the
// hand-derived reverse of these equations and is checked against central
// finite differences in the tests.
struct GruCellParams {
  Eigen::MatrixXd wz, wr, wc;  // hidden x input
  Eigen::MatrixXd uz, ur, uc;  // hidden x hidden
  Eigen::VectorXd bz, br, bc;  // hidden
};

// One bidirectional layer: the backward-direction cell runs over the
// time-reversed sequence with its own weights.
struct GruLayerParams {
  GruCellParams fwd, bwd;
};

// Per-direction activations kept for the backward pass. All matrices are in
// the direction's own time order.
struct GruDirCache {
  Eigen::MatrixXd input;         // frames x input_dim
  Eigen::MatrixXd z, r, c, h;    // frames x hidden
};

struct GruLayerCache {
  GruDirCache fwd, bwd;
};

struct EncoderCache {
  std::vector<GruLayerCache> layers;
};

// Runs one direction over x (frames x input_dim) and returns the hidden
// sequence (frames x hidden). When cache is non-null the activations are
// recorded for gru_backward.
Eigen::MatrixXd gru_forward(const GruCellParams& cell, const Eigen::MatrixXd& x,
                            GruDirCache* cache);

// Backpropagates d_h (frames x hidden, gradient w.r.t. the direction's hidden
// sequence) through the cached run. Accumulates parameter gradients into
// *grads and returns the gradient w.r.t. the direction's input sequence.
Eigen::MatrixXd gru_backward(const GruCellParams& cell,
                             const GruDirCache& cache,
                             const Eigen::MatrixXd& d_h, GruCellParams* grads);

// Stacked bidirectional forward pass. Output frame t is the concatenation
// [fwd_h(t), bwd_h(t)] where bwd_h is time-aligned back to the input order;
// output width is 2 * hidden per layer, and deeper layers consume the
// previous layer's concatenated output.
Eigen::MatrixXd encode_layers(const std::vector<GruLayerParams>& layers,
                              const Eigen::MatrixXd& x, EncoderCache* cache);

// Reverse pass over the whole stack; accumulates into *grads (same shapes as
// layers) and returns the gradient w.r.t. the stack input.
Eigen::MatrixXd encode_layers_backward(const std::vector<GruLayerParams>& layers,
                                       const EncoderCache& cache,
                                       const Eigen::MatrixXd& d_out,
                                       std::vector<GruLayerParams>* grads);

GruCellParams zero_like(const GruCellParams& cell);
GruLayerParams zero_like(const GruLayerParams& layer);

}  // namespace crs
