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

#include "qualitynet/loss.hpp"
#include "qualitynet/rng.hpp"

using namespace qnet;

namespace {

AssessmentResult result_of(std::vector<double> frames) {
  AssessmentResult r;
  r.frame_scores = Eigen::Map<Eigen::VectorXd>(frames.data(), static_cast<long>(frames.size()));
  double acc = 0.0;
  for (double v : frames) acc += v;
  r.utterance_score = acc / static_cast<double>(frames.size());
  return r;
}

}  // namespace

TEST_CASE("alpha_weight powers of ten") {
  CHECK(alpha_weight(4.5, 4.5) == 1.0);
  CHECK(alpha_weight(3.5, 4.5) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(alpha_weight(1.0, 4.5) == doctest::Approx(3.1623e-4).epsilon(1e-4));
  CHECK_THROWS_AS(alpha_weight(4.6, 4.5), std::invalid_argument);
}

TEST_CASE("alpha_weight is strictly increasing in the label") {
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    double a = rng.uniform(1.0, 4.5);
    double b = rng.uniform(1.0, 4.5);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    CHECK(alpha_weight(a) < alpha_weight(b));
  }
}

TEST_CASE("utterance_loss on the worked examples") {
  // Exact fit.
  CHECK(utterance_loss({4.0, 4.5}, result_of({4.0, 4.0, 4.0})).total == 0.0);

  // T=1, label 4.5, frame 4.0: 0.25 + 1.0*0.25.
  LossBreakdown one = utterance_loss({4.5, 4.5}, result_of({4.0}));
  CHECK(one.total == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(one.utterance_term == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(one.alpha == 1.0);

  // T=2, q = (4.5, 3.5), Q = 4.0: 0.25 + 1.0*(0 + 1.0).
  LossBreakdown two = utterance_loss({4.5, 4.5}, result_of({4.5, 3.5}));
  CHECK(two.total == doctest::Approx(1.25).epsilon(1e-12));
  CHECK(two.frame_term == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("utterance_loss nonnegativity and zero condition") {
  Rng rng(6);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> frames(static_cast<std::size_t>(1 + rng.index(6)));
    for (auto& f : frames) f = rng.uniform(0.0, 5.0);
    double label = rng.uniform(1.0, 4.5);
    LossBreakdown b = utterance_loss({label, 4.5}, result_of(frames));
    CHECK(b.total >= 0.0);
    CHECK(b.utterance_term >= 0.0);
    CHECK(b.frame_term >= 0.0);
  }
  // Zero iff Q == q_hat and every frame equals q_hat (alpha > 0).
  CHECK(utterance_loss({3.0, 4.5}, result_of({3.0, 3.0})).total == 0.0);
  CHECK(utterance_loss({3.0, 4.5}, result_of({2.0, 4.0})).total > 0.0);
}

TEST_CASE("alpha disabled reduces to the plain utterance MSE term") {
  LossConfig no_constraint{false, false};
  AssessmentResult r = result_of({4.2, 2.8, 3.1});
  QualityLabel label{3.9, 4.5};
  LossBreakdown b = utterance_loss(label, r, no_constraint);
  double err = label.q_hat - r.utterance_score;
  CHECK(b.alpha == 0.0);
  CHECK(b.total == doctest::Approx(err * err).epsilon(1e-12));
}

TEST_CASE("frame_term_mean divides the constraint by T") {
  AssessmentResult r = result_of({4.5, 3.5, 2.5, 1.5});
  QualityLabel label{4.5, 4.5};
  LossBreakdown sum_form = utterance_loss(label, r);
  LossBreakdown mean_form = utterance_loss(label, r, {true, true});
  CHECK(mean_form.frame_term == doctest::Approx(sum_form.frame_term / 4.0).epsilon(1e-12));
}

TEST_CASE("loss_grads worked example and perfect fit") {
  auto [d0, dq0] = loss_grads({3.0, 4.5}, result_of({3.0, 3.0}));
  CHECK(d0 == 0.0);
  CHECK(dq0.cwiseAbs().maxCoeff() == 0.0);

  auto [d1, dq1] = loss_grads({4.5, 4.5}, result_of({4.5, 3.5}));
  CHECK(d1 == 0.0);
  CHECK(dq1(0) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(dq1(1) == doctest::Approx(-2.5).epsilon(1e-12));
}

TEST_CASE("loss_grads matches finite differences of utterance_loss") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t t_frames = 1 + rng.index(7);
    std::vector<double> frames(t_frames);
    for (auto& f : frames) f = rng.uniform(0.5, 5.0);
    QualityLabel label{rng.uniform(1.0, 4.5), 4.5};
    LossConfig cfg{true, trial % 2 == 0};

    auto [d_utt, dq] = loss_grads(label, result_of(frames), cfg);
    CHECK(d_utt == 0.0);

    const double eps = 1e-6;
    for (std::size_t t = 0; t < t_frames; ++t) {
      std::vector<double> hi = frames, lo = frames;
      hi[t] += eps;
      lo[t] -= eps;
      // Q re-averages the perturbed frame, so the mean path is included.
      double numeric = (utterance_loss(label, result_of(hi), cfg).total -
                        utterance_loss(label, result_of(lo), cfg).total) /
                       (2 * eps);
      double analytic = dq(static_cast<long>(t));
      CHECK(std::abs(analytic - numeric) <
            1e-8 * std::max(1.0, std::abs(analytic) + std::abs(numeric)));
    }
  }
}

TEST_CASE("batch_loss averages per-utterance losses") {
  std::vector<QualityLabel> labels{{4.5, 4.5}, {4.5, 4.5}};
  std::vector<AssessmentResult> results{result_of({4.0}), result_of({4.5, 3.5})};
  CHECK(batch_loss(labels, results) == doctest::Approx(0.875).epsilon(1e-12));

  std::vector<QualityLabel> single{{4.5, 4.5}};
  std::vector<AssessmentResult> single_r{result_of({4.0})};
  CHECK(batch_loss(single, single_r) ==
        doctest::Approx(utterance_loss(single[0], single_r[0]).total).epsilon(1e-12));

  std::vector<QualityLabel> empty;
  std::vector<AssessmentResult> empty_r;
  CHECK_THROWS_AS(batch_loss(empty, empty_r), std::invalid_argument);
  CHECK_THROWS_AS(batch_loss(labels, single_r), std::invalid_argument);
}

TEST_CASE("empty frame scores rejected") {
  AssessmentResult empty;
  CHECK_THROWS_AS(utterance_loss({3.0, 4.5}, empty), std::invalid_argument);
  CHECK_THROWS_AS(loss_grads({3.0, 4.5}, empty), std::invalid_argument);
}
