// Copyright 2026 The QualityNet Authors. All Rights Reserved.
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

#ifndef QUALITYNET_MODEL_HPP_
#define QUALITYNET_MODEL_HPP_

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "qualitynet/stft.hpp"

namespace qnet {

struct ModelDims {
  int input_dim = 257;  // feature bins per frame
  int hidden = 100;     // LSTM units per direction
  static constexpr int kHeadWidth = 50;
};

inline double elu(double x) { return x > 0.0 ? x : std::expm1(x); }
inline double elu_derivative(double pre_activation) {
  return pre_activation > 0.0 ? 1.0 : std::exp(pre_activation);
}
inline double sigmoid(double x) { return 0.5 * (1.0 + std::tanh(0.5 * x)); }

// One LSTM direction. Gate blocks are stored concatenated along columns in
// the order [input | forget | cell | output]; the per-gate accessors expose
// the conventional W_*, U_*, b_* tensors as views.
struct LstmDirectionParams {
  int input_dim = 0;
  int hidden = 0;
  Eigen::MatrixXd w_in;     // input_dim x 4*hidden
  Eigen::MatrixXd w_rec;    // hidden x 4*hidden
  Eigen::RowVectorXd bias;  // 4*hidden

  auto w_i() const { return w_in.middleCols(0 * hidden, hidden); }
  auto w_f() const { return w_in.middleCols(1 * hidden, hidden); }
  auto w_g() const { return w_in.middleCols(2 * hidden, hidden); }
  auto w_o() const { return w_in.middleCols(3 * hidden, hidden); }
  auto u_i() const { return w_rec.middleCols(0 * hidden, hidden); }
  auto u_f() const { return w_rec.middleCols(1 * hidden, hidden); }
  auto u_g() const { return w_rec.middleCols(2 * hidden, hidden); }
  auto u_o() const { return w_rec.middleCols(3 * hidden, hidden); }
  auto b_i() const { return bias.segment(0 * hidden, hidden); }
  auto b_f() const { return bias.segment(1 * hidden, hidden); }
  auto b_g() const { return bias.segment(2 * hidden, hidden); }
  auto b_o() const { return bias.segment(3 * hidden, hidden); }
  auto b_f() { return bias.segment(1 * hidden, hidden); }
};

struct DenseParams {
  Eigen::MatrixXd w;        // in x out
  Eigen::RowVectorXd b;     // out
};

// Full parameter set: BLSTM, two ELU dense layers applied per frame, and
// the linear frame-score node. Serializable via optim's checkpoint format.
struct ModelParams {
  ModelDims dims;
  double forget_gate_bias_init = -3.0;
  LstmDirectionParams fwd, bwd;
  DenseParams dense1;  // 2*hidden -> 50, ELU
  DenseParams dense2;  // 50 -> 50, ELU
  DenseParams out;     // 50 -> 1, linear
};

// Gradients share the parameter layout.
using ParamGrads = ModelParams;

ModelParams zeros_like(const ModelParams& p);

// Contiguous spans over every parameter tensor (for the optimizer, gradient
// clipping and finite differences). Order: fwd{w_in,w_rec,bias},
// bwd{w_in,w_rec,bias}, dense1{w,b}, dense2{w,b}, out{w,b}.
std::vector<std::span<double>> tensor_views(ModelParams& p);
std::vector<std::span<const double>> tensor_views(const ModelParams& p);

// Glorot-uniform weights (s = sqrt(6/(fan_in+fan_out))) for every weight
// matrix including the recurrent ones; biases zero except the forget gate
// bias, which is filled with forget_gate_bias everywhere. Deterministic in
// the seed.
ModelParams init_model(const ModelDims& dims, double forget_gate_bias, std::uint64_t seed);

// The direction-swapped model: fwd/bwd LSTM parameters exchanged and the
// first dense layer's input blocks exchanged to match the concat order.
// Running it on a time-reversed input reverses the frame scores.
ModelParams swap_directions(const ModelParams& p);

// Single LSTM step; returns (h_t, c_t). Exposed mainly for oracles and
// bindings - forward() uses a batched path with identical arithmetic.
std::pair<Eigen::RowVectorXd, Eigen::RowVectorXd> lstm_cell(
    const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& h_prev,
    const Eigen::RowVectorXd& c_prev, const LstmDirectionParams& p);

struct DirectionTrace {
  // T x hidden each, rows in scan order; the backward direction scans the
  // reversed input, so its row s corresponds to frame T-1-s.
  Eigen::MatrixXd gate_i, gate_f, gate_g, gate_o;
  Eigen::MatrixXd cell, cell_tanh, hidden;
};

struct ForwardTrace {
  Eigen::MatrixXd input;    // T x F
  DirectionTrace fwd, bwd;
  Eigen::MatrixXd concat;   // T x 2*hidden, time order [h_fwd ; h_bwd]
  Eigen::MatrixXd pre1, act1, pre2, act2;  // T x kHeadWidth
  Eigen::VectorXd frame_scores;
  double utterance_score = 0.0;
};

struct AssessmentResult {
  double utterance_score = 0.0;       // Q, the global average of the frames
  Eigen::VectorXd frame_scores;       // q_1..q_T
};

// Runs both directions from zero state, applies the dense head per frame
// and averages the frame scores left to right. Pass a trace to enable
// backward().
AssessmentResult forward(const Spectrogram& spec, const ModelParams& p,
                         ForwardTrace* trace = nullptr);

// Backpropagation through time for the scalar loss whose partials are
// d_utterance (w.r.t. the utterance score) and d_frames (w.r.t. each frame
// score). The global average contributes d_utterance/T to every frame path.
ParamGrads backward(const ForwardTrace& trace, double d_utterance,
                    const Eigen::VectorXd& d_frames, const ModelParams& p);

}  // namespace qnet

#endif  // QUALITYNET_MODEL_HPP_
