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

#include "qualitynet/model.hpp"

#include <stdexcept>

#include "qualitynet/rng.hpp"

namespace qnet {

namespace {

LstmDirectionParams make_direction(int input_dim, int hidden) {
  LstmDirectionParams p;
  p.input_dim = input_dim;
  p.hidden = hidden;
  p.w_in = Eigen::MatrixXd::Zero(input_dim, 4 * hidden);
  p.w_rec = Eigen::MatrixXd::Zero(hidden, 4 * hidden);
  p.bias = Eigen::RowVectorXd::Zero(4 * hidden);
  return p;
}

DenseParams make_dense(int in, int out) {
  return {Eigen::MatrixXd::Zero(in, out), Eigen::RowVectorXd::Zero(out)};
}

void fill_glorot(Eigen::Ref<Eigen::MatrixXd> m, double fan_in, double fan_out, Rng& rng) {
  const double s = std::sqrt(6.0 / (fan_in + fan_out));
  // Column-major element order, fixed so a seed always yields the same net.
  for (long c = 0; c < m.cols(); ++c) {
    for (long r = 0; r < m.rows(); ++r) m(r, c) = rng.uniform(-s, s);
  }
}

inline void check(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

// Scans X (rows = steps) from zero state, filling the trace.
void run_direction(const Eigen::MatrixXd& x, const LstmDirectionParams& p,
                   DirectionTrace& tr) {
  const long t_steps = x.rows();
  const int h = p.hidden;

  tr.gate_i.resize(t_steps, h);
  tr.gate_f.resize(t_steps, h);
  tr.gate_g.resize(t_steps, h);
  tr.gate_o.resize(t_steps, h);
  tr.cell.resize(t_steps, h);
  tr.cell_tanh.resize(t_steps, h);
  tr.hidden.resize(t_steps, h);

  // Input contributions for all steps at once.
  Eigen::MatrixXd preact = x * p.w_in;
  preact.rowwise() += p.bias;

  Eigen::RowVectorXd h_prev = Eigen::RowVectorXd::Zero(h);
  Eigen::RowVectorXd c_prev = Eigen::RowVectorXd::Zero(h);
  Eigen::RowVectorXd z(4 * h);

  for (long s = 0; s < t_steps; ++s) {
    z.noalias() = h_prev * p.w_rec;
    z += preact.row(s);

    auto gi = tr.gate_i.row(s);
    auto gf = tr.gate_f.row(s);
    auto gg = tr.gate_g.row(s);
    auto go = tr.gate_o.row(s);
    gi = (0.5 * (1.0 + (0.5 * z.segment(0 * h, h).array()).tanh())).matrix();
    gf = (0.5 * (1.0 + (0.5 * z.segment(1 * h, h).array()).tanh())).matrix();
    gg = z.segment(2 * h, h).array().tanh().matrix();
    go = (0.5 * (1.0 + (0.5 * z.segment(3 * h, h).array()).tanh())).matrix();

    tr.cell.row(s) = (gf.array() * c_prev.array() + gi.array() * gg.array()).matrix();
    tr.cell_tanh.row(s) = tr.cell.row(s).array().tanh().matrix();
    tr.hidden.row(s) = (go.array() * tr.cell_tanh.row(s).array()).matrix();

    c_prev = tr.cell.row(s);
    h_prev = tr.hidden.row(s);
  }
}

// BPTT over one direction. x and d_hidden are in scan order; returns the
// parameter gradients for this direction.
void backprop_direction(const Eigen::MatrixXd& x, const DirectionTrace& tr,
                        const Eigen::MatrixXd& d_hidden,
                        const LstmDirectionParams& p, LstmDirectionParams& grads) {
  const long t_steps = x.rows();
  const int h = p.hidden;

  Eigen::MatrixXd d_gates(t_steps, 4 * h);
  Eigen::RowVectorXd dh_next = Eigen::RowVectorXd::Zero(h);
  Eigen::RowVectorXd dc_next = Eigen::RowVectorXd::Zero(h);

  for (long s = t_steps - 1; s >= 0; --s) {
    Eigen::ArrayXd dh = (d_hidden.row(s) + dh_next).transpose().array();

    auto gi = tr.gate_i.row(s).transpose().array();
    auto gf = tr.gate_f.row(s).transpose().array();
    auto gg = tr.gate_g.row(s).transpose().array();
    auto go = tr.gate_o.row(s).transpose().array();
    auto tc = tr.cell_tanh.row(s).transpose().array();

    Eigen::ArrayXd dc = dh * go * (1.0 - tc * tc) + dc_next.transpose().array();

    Eigen::ArrayXd dz_o = dh * tc * go * (1.0 - go);
    Eigen::ArrayXd dz_g = dc * gi * (1.0 - gg * gg);
    Eigen::ArrayXd dz_i = dc * gg * gi * (1.0 - gi);
    Eigen::ArrayXd dz_f(h);
    if (s > 0) {
      dz_f = dc * tr.cell.row(s - 1).transpose().array() * gf * (1.0 - gf);
    } else {
      dz_f.setZero();  // zero initial cell state
    }

    d_gates.row(s).segment(0 * h, h) = dz_i.matrix().transpose();
    d_gates.row(s).segment(1 * h, h) = dz_f.matrix().transpose();
    d_gates.row(s).segment(2 * h, h) = dz_g.matrix().transpose();
    d_gates.row(s).segment(3 * h, h) = dz_o.matrix().transpose();

    dh_next.noalias() = d_gates.row(s) * p.w_rec.transpose();
    dc_next = (dc * gf).matrix().transpose();
  }

  grads.w_in.noalias() = x.transpose() * d_gates;
  grads.w_rec.setZero();
  if (t_steps > 1) {
    grads.w_rec.noalias() =
        tr.hidden.topRows(t_steps - 1).transpose() * d_gates.bottomRows(t_steps - 1);
  }
  grads.bias = d_gates.colwise().sum();
}

}  // namespace

ModelParams zeros_like(const ModelParams& p) {
  ModelParams z;
  z.dims = p.dims;
  z.forget_gate_bias_init = 0.0;
  z.fwd = make_direction(p.dims.input_dim, p.dims.hidden);
  z.bwd = make_direction(p.dims.input_dim, p.dims.hidden);
  z.dense1 = make_dense(2 * p.dims.hidden, ModelDims::kHeadWidth);
  z.dense2 = make_dense(ModelDims::kHeadWidth, ModelDims::kHeadWidth);
  z.out = make_dense(ModelDims::kHeadWidth, 1);
  return z;
}

std::vector<std::span<double>> tensor_views(ModelParams& p) {
  std::vector<std::span<double>> v;
  auto add = [&](double* data, std::size_t n) { v.emplace_back(data, n); };
  for (LstmDirectionParams* d : {&p.fwd, &p.bwd}) {
    add(d->w_in.data(), static_cast<std::size_t>(d->w_in.size()));
    add(d->w_rec.data(), static_cast<std::size_t>(d->w_rec.size()));
    add(d->bias.data(), static_cast<std::size_t>(d->bias.size()));
  }
  for (DenseParams* d : {&p.dense1, &p.dense2, &p.out}) {
    add(d->w.data(), static_cast<std::size_t>(d->w.size()));
    add(d->b.data(), static_cast<std::size_t>(d->b.size()));
  }
  return v;
}

std::vector<std::span<const double>> tensor_views(const ModelParams& p) {
  auto mutable_views = tensor_views(const_cast<ModelParams&>(p));
  return {mutable_views.begin(), mutable_views.end()};
}

ModelParams init_model(const ModelDims& dims, double forget_gate_bias, std::uint64_t seed) {
  check(dims.input_dim >= 1 && dims.hidden >= 1, "init_model: invalid dims");

  ModelParams p;
  p.dims = dims;
  p.forget_gate_bias_init = forget_gate_bias;
  p.fwd = make_direction(dims.input_dim, dims.hidden);
  p.bwd = make_direction(dims.input_dim, dims.hidden);
  p.dense1 = make_dense(2 * dims.hidden, ModelDims::kHeadWidth);
  p.dense2 = make_dense(ModelDims::kHeadWidth, ModelDims::kHeadWidth);
  p.out = make_dense(ModelDims::kHeadWidth, 1);

  Rng rng(seed);
  for (LstmDirectionParams* d : {&p.fwd, &p.bwd}) {
    fill_glorot(d->w_in, dims.input_dim, dims.hidden, rng);
    fill_glorot(d->w_rec, dims.hidden, dims.hidden, rng);
    d->b_f().setConstant(forget_gate_bias);
  }
  fill_glorot(p.dense1.w, 2 * dims.hidden, ModelDims::kHeadWidth, rng);
  fill_glorot(p.dense2.w, ModelDims::kHeadWidth, ModelDims::kHeadWidth, rng);
  fill_glorot(p.out.w, ModelDims::kHeadWidth, 1, rng);
  return p;
}

ModelParams swap_directions(const ModelParams& p) {
  ModelParams swapped = p;
  std::swap(swapped.fwd, swapped.bwd);
  const int h = p.dims.hidden;
  swapped.dense1.w.topRows(h) = p.dense1.w.bottomRows(h);
  swapped.dense1.w.bottomRows(h) = p.dense1.w.topRows(h);
  return swapped;
}

std::pair<Eigen::RowVectorXd, Eigen::RowVectorXd> lstm_cell(
    const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& h_prev,
    const Eigen::RowVectorXd& c_prev, const LstmDirectionParams& p) {
  check(x.size() == p.input_dim, "lstm_cell: input dimension mismatch");
  check(h_prev.size() == p.hidden && c_prev.size() == p.hidden,
        "lstm_cell: state dimension mismatch");

  const int h = p.hidden;
  Eigen::RowVectorXd z = x * p.w_in + h_prev * p.w_rec + p.bias;
  Eigen::ArrayXd gi = (0.5 * (1.0 + (0.5 * z.segment(0 * h, h).transpose().array()).tanh()));
  Eigen::ArrayXd gf = (0.5 * (1.0 + (0.5 * z.segment(1 * h, h).transpose().array()).tanh()));
  Eigen::ArrayXd gg = z.segment(2 * h, h).transpose().array().tanh();
  Eigen::ArrayXd go = (0.5 * (1.0 + (0.5 * z.segment(3 * h, h).transpose().array()).tanh()));

  Eigen::RowVectorXd c = (gf * c_prev.transpose().array() + gi * gg).matrix().transpose();
  Eigen::RowVectorXd h_new = (go * c.transpose().array().tanh()).matrix().transpose();
  return {h_new, c};
}

AssessmentResult forward(const Spectrogram& spec, const ModelParams& p, ForwardTrace* trace) {
  const long t_frames = spec.num_frames();
  check(t_frames >= 1, "forward: need at least one frame");
  check(spec.num_bins() == p.dims.input_dim, "forward: feature dimension mismatch");

  ForwardTrace local;
  ForwardTrace& tr = trace ? *trace : local;

  tr.input = spec.frames;
  Eigen::MatrixXd reversed = tr.input.colwise().reverse();

  run_direction(tr.input, p.fwd, tr.fwd);
  run_direction(reversed, p.bwd, tr.bwd);

  const int h = p.dims.hidden;
  tr.concat.resize(t_frames, 2 * h);
  tr.concat.leftCols(h) = tr.fwd.hidden;
  tr.concat.rightCols(h) = tr.bwd.hidden.colwise().reverse();

  tr.pre1 = tr.concat * p.dense1.w;
  tr.pre1.rowwise() += p.dense1.b;
  tr.act1 = tr.pre1.unaryExpr([](double v) { return elu(v); });

  tr.pre2 = tr.act1 * p.dense2.w;
  tr.pre2.rowwise() += p.dense2.b;
  tr.act2 = tr.pre2.unaryExpr([](double v) { return elu(v); });

  tr.frame_scores = (tr.act2 * p.out.w).col(0);
  tr.frame_scores.array() += p.out.b(0);

  // Global average, summed left to right.
  double acc = 0.0;
  for (long t = 0; t < t_frames; ++t) acc += tr.frame_scores(t);
  tr.utterance_score = acc / static_cast<double>(t_frames);

  AssessmentResult result;
  result.utterance_score = tr.utterance_score;
  result.frame_scores = tr.frame_scores;
  return result;
}

ParamGrads backward(const ForwardTrace& trace, double d_utterance,
                    const Eigen::VectorXd& d_frames, const ModelParams& p) {
  const long t_frames = trace.input.rows();
  check(d_frames.size() == t_frames, "backward: d_frames length mismatch");
  check(trace.concat.cols() == 2 * p.dims.hidden, "backward: trace/params mismatch");

  ParamGrads grads = zeros_like(p);
  const int h = p.dims.hidden;

  Eigen::VectorXd dq = d_frames;
  dq.array() += d_utterance / static_cast<double>(t_frames);

  // Linear output node.
  grads.out.w.noalias() = trace.act2.transpose() * dq;
  grads.out.b(0) = dq.sum();

  Eigen::MatrixXd d_act2 = dq * p.out.w.transpose();  // T x head
  Eigen::MatrixXd d_pre2 =
      d_act2.cwiseProduct(trace.pre2.unaryExpr([](double v) { return elu_derivative(v); }));
  grads.dense2.w.noalias() = trace.act1.transpose() * d_pre2;
  grads.dense2.b = d_pre2.colwise().sum();

  Eigen::MatrixXd d_act1 = d_pre2 * p.dense2.w.transpose();
  Eigen::MatrixXd d_pre1 =
      d_act1.cwiseProduct(trace.pre1.unaryExpr([](double v) { return elu_derivative(v); }));
  grads.dense1.w.noalias() = trace.concat.transpose() * d_pre1;
  grads.dense1.b = d_pre1.colwise().sum();

  Eigen::MatrixXd d_concat = d_pre1 * p.dense1.w.transpose();  // T x 2h

  Eigen::MatrixXd d_hidden_fwd = d_concat.leftCols(h);
  Eigen::MatrixXd d_hidden_bwd = d_concat.rightCols(h).colwise().reverse();
  Eigen::MatrixXd reversed_input = trace.input.colwise().reverse();

  backprop_direction(trace.input, trace.fwd, d_hidden_fwd, p.fwd, grads.fwd);
  backprop_direction(reversed_input, trace.bwd, d_hidden_bwd, p.bwd, grads.bwd);

  return grads;
}

}  // namespace qnet
