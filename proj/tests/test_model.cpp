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

#include <doctest.h>

#include <cmath>
#include <vector>

#include "qualitynet/grad_check.hpp"
#include "qualitynet/loss.hpp"
#include "qualitynet/model.hpp"
#include "qualitynet/rng.hpp"

using namespace qnet;

namespace {

// Independent scalar reference: plain exp-based sigmoid/tanh, no shared code
// with the implementation's tanh-half trick.
double ref_sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Spectrogram random_spectrogram(int t, int f, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  Spectrogram spec;
  spec.frames.resize(t, f);
  for (int i = 0; i < t; ++i) {
    for (int k = 0; k < f; ++k) spec.frames(i, k) = scale * rng.uniform(0.0, 1.0);
  }
  return spec;
}

ModelParams random_model(int f, int h, std::uint64_t seed, double fgb = -3.0) {
  return init_model(ModelDims{f, h}, fgb, seed);
}

// Naive per-frame reference forward pass built on lstm_cell and explicit
// head loops; used as the independent re-evaluation oracle.
std::pair<double, std::vector<double>> reference_forward(const Spectrogram& spec,
                                                         const ModelParams& p) {
  const int t_frames = spec.num_frames();
  const int h = p.dims.hidden;

  std::vector<Eigen::RowVectorXd> h_fwd(static_cast<std::size_t>(t_frames));
  std::vector<Eigen::RowVectorXd> h_bwd(static_cast<std::size_t>(t_frames));

  Eigen::RowVectorXd state_h = Eigen::RowVectorXd::Zero(h);
  Eigen::RowVectorXd state_c = Eigen::RowVectorXd::Zero(h);
  for (int t = 0; t < t_frames; ++t) {
    auto [hh, cc] = lstm_cell(spec.frames.row(t), state_h, state_c, p.fwd);
    h_fwd[static_cast<std::size_t>(t)] = hh;
    state_h = hh;
    state_c = cc;
  }
  state_h.setZero();
  state_c.setZero();
  for (int t = t_frames - 1; t >= 0; --t) {
    auto [hh, cc] = lstm_cell(spec.frames.row(t), state_h, state_c, p.bwd);
    h_bwd[static_cast<std::size_t>(t)] = hh;
    state_h = hh;
    state_c = cc;
  }

  std::vector<double> q(static_cast<std::size_t>(t_frames));
  for (int t = 0; t < t_frames; ++t) {
    Eigen::RowVectorXd concat(2 * h);
    concat << h_fwd[static_cast<std::size_t>(t)], h_bwd[static_cast<std::size_t>(t)];
    Eigen::RowVectorXd a1 = concat * p.dense1.w + p.dense1.b;
    for (int i = 0; i < a1.size(); ++i) a1(i) = a1(i) > 0 ? a1(i) : std::exp(a1(i)) - 1.0;
    Eigen::RowVectorXd a2 = a1 * p.dense2.w + p.dense2.b;
    for (int i = 0; i < a2.size(); ++i) a2(i) = a2(i) > 0 ? a2(i) : std::exp(a2(i)) - 1.0;
    q[static_cast<std::size_t>(t)] = (a2 * p.out.w)(0, 0) + p.out.b(0);
  }
  double acc = 0.0;
  for (double v : q) acc += v;
  return {acc / t_frames, q};
}

}  // namespace

TEST_CASE("elu branches") {
  CHECK(elu(0.0) == 0.0);
  CHECK(elu(2.0) == 2.0);
  CHECK(elu(-1.0) == doctest::Approx(std::exp(-1.0) - 1.0).epsilon(1e-12));
  CHECK(elu(-1.0) == doctest::Approx(-0.63212).epsilon(1e-5));
}

TEST_CASE("init_model: forget gate bias policy and determinism") {
  ModelParams p = init_model(ModelDims{8, 4}, -3.0, 123);
  CHECK((p.fwd.b_f().array() == -3.0).all());
  CHECK((p.bwd.b_f().array() == -3.0).all());
  CHECK((p.fwd.b_i().array() == 0.0).all());
  CHECK((p.fwd.b_g().array() == 0.0).all());
  CHECK((p.fwd.b_o().array() == 0.0).all());
  CHECK((p.dense1.b.array() == 0.0).all());

  ModelParams fgb1 = init_model(ModelDims{8, 4}, 1.0, 123);
  CHECK((fgb1.fwd.b_f().array() == 1.0).all());
  CHECK((fgb1.bwd.b_f().array() == 1.0).all());

  ModelParams again = init_model(ModelDims{8, 4}, -3.0, 123);
  CHECK(p.fwd.w_in == again.fwd.w_in);
  CHECK(p.bwd.w_rec == again.bwd.w_rec);
  CHECK(p.dense2.w == again.dense2.w);

  ModelParams other_seed = init_model(ModelDims{8, 4}, -3.0, 124);
  CHECK(p.fwd.w_in != other_seed.fwd.w_in);

  // Glorot bound for the input weights.
  double s = std::sqrt(6.0 / (8 + 4));
  CHECK(p.fwd.w_in.cwiseAbs().maxCoeff() <= s);
}

TEST_CASE("lstm_cell: zero parameters force zero state") {
  LstmDirectionParams p;
  p.input_dim = 3;
  p.hidden = 2;
  p.w_in = Eigen::MatrixXd::Zero(3, 8);
  p.w_rec = Eigen::MatrixXd::Zero(2, 8);
  p.bias = Eigen::RowVectorXd::Zero(8);

  Eigen::RowVectorXd x(3);
  x << 1.0, -2.0, 0.5;
  auto [h, c] = lstm_cell(x, Eigen::RowVectorXd::Zero(2), Eigen::RowVectorXd::Zero(2), p);
  CHECK(h.cwiseAbs().maxCoeff() == 0.0);
  CHECK(c.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("lstm_cell scalar oracle") {
  // H = F = 1, all weights 1, biases 0 except b_f = -3.
  LstmDirectionParams p;
  p.input_dim = 1;
  p.hidden = 1;
  p.w_in = Eigen::MatrixXd::Ones(1, 4);
  p.w_rec = Eigen::MatrixXd::Ones(1, 4);
  p.bias = Eigen::RowVectorXd::Zero(4);
  p.bias(1) = -3.0;

  Eigen::RowVectorXd x(1), zero(1);
  x << 1.0;
  zero << 0.0;

  auto [h, c] = lstm_cell(x, zero, zero, p);

  // Independent scalar evaluation.
  double gi = ref_sigmoid(1.0);
  double gf = ref_sigmoid(1.0 - 3.0);
  double gg = std::tanh(1.0);
  double go = ref_sigmoid(1.0);
  double expect_c = gf * 0.0 + gi * gg;
  double expect_h = go * std::tanh(expect_c);

  CHECK(gi == doctest::Approx(0.73106).epsilon(1e-5));
  CHECK(gf == doctest::Approx(0.11920).epsilon(1e-4));
  CHECK(gg == doctest::Approx(0.76159).epsilon(1e-5));
  CHECK(expect_c == doctest::Approx(0.55677).epsilon(1e-4));
  CHECK(expect_h == doctest::Approx(0.369606).epsilon(1e-5));

  CHECK(c(0) == doctest::Approx(expect_c).epsilon(1e-12));
  CHECK(h(0) == doctest::Approx(expect_h).epsilon(1e-12));
}

TEST_CASE("lstm_cell carries the previous cell through the forget gate") {
  LstmDirectionParams p;
  p.input_dim = 1;
  p.hidden = 1;
  p.w_in = Eigen::MatrixXd::Zero(1, 4);
  p.w_rec = Eigen::MatrixXd::Zero(1, 4);
  p.bias = Eigen::RowVectorXd::Zero(4);
  p.bias(1) = -3.0;

  Eigen::RowVectorXd x(1), h0(1), c0(1);
  x << 0.0;
  h0 << 0.0;
  c0 << 10.0;
  auto [h, c] = lstm_cell(x, h0, c0, p);
  // i*g vanishes (tanh(0) = 0), so c = sigmoid(-3) * 10.
  CHECK(c(0) == doctest::Approx(0.4742587317756678).epsilon(1e-12));
}

TEST_CASE("forward: zero model yields zero scores; output bias propagates") {
  Spectrogram spec = random_spectrogram(6, 5, 77);
  ModelParams zero = zeros_like(random_model(5, 3, 1));
  AssessmentResult r = forward(spec, zero);
  CHECK(r.utterance_score == 0.0);
  CHECK(r.frame_scores.cwiseAbs().maxCoeff() == 0.0);

  zero.out.b(0) = 2.5;
  AssessmentResult biased = forward(spec, zero);
  CHECK(biased.utterance_score == doctest::Approx(2.5).epsilon(1e-15));
  for (int t = 0; t < 6; ++t) CHECK(biased.frame_scores(t) == doctest::Approx(2.5).epsilon(1e-15));
}

TEST_CASE("forward matches the independent per-step oracle") {
  for (std::uint64_t seed : {10ULL, 11ULL, 12ULL}) {
    Spectrogram spec = random_spectrogram(5, 4, seed);
    ModelParams p = random_model(4, 3, seed + 100);
    AssessmentResult fast = forward(spec, p);
    auto [q_ref, frames_ref] = reference_forward(spec, p);
    CHECK(std::abs(fast.utterance_score - q_ref) < 1e-12);
    for (int t = 0; t < 5; ++t) {
      CHECK(std::abs(fast.frame_scores(t) - frames_ref[static_cast<std::size_t>(t)]) < 1e-12);
    }
  }
}

TEST_CASE("forward: T=1 gives Q == q_1 exactly and containment holds") {
  Spectrogram spec = random_spectrogram(1, 4, 5);
  ModelParams p = random_model(4, 3, 6);
  AssessmentResult r = forward(spec, p);
  CHECK(r.frame_scores.size() == 1);
  CHECK(r.utterance_score == r.frame_scores(0));

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Spectrogram s = random_spectrogram(7, 4, 1000 + seed);
    ModelParams m = random_model(4, 3, 2000 + seed);
    AssessmentResult res = forward(s, m);
    CHECK(res.utterance_score >= res.frame_scores.minCoeff() - 1e-15);
    CHECK(res.utterance_score <= res.frame_scores.maxCoeff() + 1e-15);
  }
}

TEST_CASE("forward is bitwise deterministic") {
  Spectrogram spec = random_spectrogram(9, 6, 21);
  ModelParams p = random_model(6, 4, 22);
  AssessmentResult a = forward(spec, p);
  AssessmentResult b = forward(spec, p);
  CHECK(a.utterance_score == b.utterance_score);
  CHECK(a.frame_scores == b.frame_scores);
}

TEST_CASE("reversal symmetry: swapped directions on reversed input") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Spectrogram spec = random_spectrogram(8, 5, 3000 + seed);
    ModelParams p = random_model(5, 4, 4000 + seed);

    ModelParams swapped = swap_directions(p);

    Spectrogram reversed;
    reversed.config = spec.config;
    reversed.frames = spec.frames.colwise().reverse();

    AssessmentResult straight = forward(spec, p);
    AssessmentResult mirrored = forward(reversed, swapped);

    CHECK(std::abs(straight.utterance_score - mirrored.utterance_score) < 1e-9);
    for (int t = 0; t < 8; ++t) {
      CHECK(std::abs(straight.frame_scores(t) - mirrored.frame_scores(7 - t)) < 1e-9);
    }
  }
}

TEST_CASE("forward rejects mismatched feature dimension") {
  Spectrogram spec = random_spectrogram(4, 6, 1);
  ModelParams p = random_model(5, 3, 2);
  CHECK_THROWS_AS(forward(spec, p), std::invalid_argument);
}

TEST_CASE("backward: zero upstream gradients give zero parameter gradients") {
  Spectrogram spec = random_spectrogram(5, 4, 31);
  ModelParams p = random_model(4, 3, 32);
  ForwardTrace trace;
  forward(spec, p, &trace);
  ParamGrads g = backward(trace, 0.0, Eigen::VectorXd::Zero(5), p);
  for (const auto& view : tensor_views(g)) {
    for (double v : view) CHECK(v == 0.0);
  }
}

TEST_CASE("gradients match central finite differences") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    Spectrogram spec = random_spectrogram(4, 4, 500 + seed);
    ModelParams p = random_model(4, 3, 600 + seed);
    QualityLabel label{3.7, 4.5};
    double err = grad_check(p, spec, label, 1e-5);
    CHECK(err < 1e-4);
  }
}

TEST_CASE("frame isolation: one-hot frame gradient leaves later forward steps untouched") {
  // With basis-vector inputs, row s of the forward-direction input-weight
  // gradient is exactly the gate delta of step s.
  const int t_frames = 6;
  Spectrogram spec;
  spec.frames = Eigen::MatrixXd::Identity(t_frames, t_frames) * 0.8;
  ModelParams p = random_model(t_frames, 3, 71);

  const int target = 2;
  Eigen::VectorXd dq = Eigen::VectorXd::Zero(t_frames);
  dq(target) = 1.0;

  ForwardTrace trace;
  forward(spec, p, &trace);
  ParamGrads g = backward(trace, 0.0, dq, p);

  for (int s = 0; s < t_frames; ++s) {
    double row_norm = g.fwd.w_in.row(s).norm();
    if (s > target) {
      CHECK(row_norm == 0.0);  // forward states after t cannot affect q_t
    }
  }
  // The backward direction mirrors this: q_t only sees frames >= t through
  // it, so input rows with time index < target are dead.
  for (int s = 0; s < target; ++s) {
    CHECK(g.bwd.w_in.row(s).norm() == 0.0);
  }

  // And the finite-difference oracle agrees on this configuration.
  QualityLabel label{4.0, 4.5};
  CHECK(grad_check(p, spec, label, 1e-5) < 1e-4);
}

TEST_CASE("grad_check input validation and determinism") {
  Spectrogram spec = random_spectrogram(3, 4, 81);
  ModelParams p = random_model(4, 2, 82);
  QualityLabel label{2.5, 4.5};
  CHECK_THROWS_WITH_AS(grad_check(p, spec, label, 0.0), doctest::Contains("epsilon"),
                       std::invalid_argument);
  CHECK_THROWS_AS(grad_check(p, spec, label, -1e-5), std::invalid_argument);

  double a = grad_check(p, spec, label, 1e-5);
  double b = grad_check(p, spec, label, 1e-5);
  CHECK(a == b);
}

TEST_CASE("a perturbed analytic gradient is flagged by the comparison rule") {
  // Negative control for the gradient gate: corrupt one analytic entry and
  // recompute the worst relative error by hand.
  Spectrogram spec = random_spectrogram(4, 3, 91);
  ModelParams p = random_model(3, 2, 92);
  QualityLabel label{3.0, 4.5};

  ForwardTrace trace;
  AssessmentResult res = forward(spec, p, &trace);
  auto [d_utt, d_frames] = loss_grads(label, res);
  ParamGrads analytic = backward(trace, d_utt, d_frames, p);

  auto views = tensor_views(analytic);
  double bugged = views[0][0] + 0.5;  // injected fault

  ModelParams probe = p;
  auto probe_views = tensor_views(probe);
  const double eps = 1e-5;
  double saved = probe_views[0][0];
  probe_views[0][0] = saved + eps;
  double hi = utterance_loss(label, forward(spec, probe)).total;
  probe_views[0][0] = saved - eps;
  double lo = utterance_loss(label, forward(spec, probe)).total;
  probe_views[0][0] = saved;
  double numeric = (hi - lo) / (2 * eps);

  double rel = std::abs(bugged - numeric) / std::max(1e-3, std::abs(bugged) + std::abs(numeric));
  CHECK(rel >= 1e-4);
}
