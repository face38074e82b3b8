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

#ifndef QUALITYNET_LOSS_HPP_
#define QUALITYNET_LOSS_HPP_

#include <span>
#include <utility>

#include "qualitynet/audio.hpp"
#include "qualitynet/model.hpp"

namespace qnet {

// True utterance-level quality score and the metric's maximum.
struct QualityLabel {
  double q_hat = kQualityMax;
  double q_max = kQualityMax;
};

struct LossConfig {
  // When off, the frame constraint is dropped entirely (alpha treated as 0).
  bool alpha_enabled = true;
  // Off by default: the frame term is summed over frames, not averaged, so
  // the constraint scales with utterance length.
  bool frame_term_mean = false;
};

struct LossBreakdown {
  double total = 0.0;
  double utterance_term = 0.0;  // (q_hat - Q)^2
  double frame_term = 0.0;      // sum_t (q_hat - q_t)^2 (or mean, per config)
  double alpha = 0.0;
};

// 10^(q_hat - q_max): the conditional weight of the frame constraint,
// computed from the true label. Strictly increasing in q_hat; equals 1 at
// the metric maximum.
double alpha_weight(double q_hat, double q_max = kQualityMax);

// Single-utterance objective: (q_hat - Q)^2 + alpha(q_hat) * frame_term.
LossBreakdown utterance_loss(const QualityLabel& label, const AssessmentResult& result,
                             const LossConfig& cfg = {});

// Exact partials of utterance_loss. The mean path through Q is folded into
// the per-frame gradients, so the returned d_utterance is always 0 and
// dq_t = 2*(Q - q_hat)/T + 2*alpha*(q_t - q_hat).
std::pair<double, Eigen::VectorXd> loss_grads(const QualityLabel& label,
                                              const AssessmentResult& result,
                                              const LossConfig& cfg = {});

// Arithmetic mean of per-utterance losses.
double batch_loss(std::span<const QualityLabel> labels,
                  std::span<const AssessmentResult> results,
                  const LossConfig& cfg = {});

}  // namespace qnet

#endif  // QUALITYNET_LOSS_HPP_
