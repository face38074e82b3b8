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

#include "qualitynet/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace qnet {

double alpha_weight(double q_hat, double q_max) {
  if (q_hat > q_max) throw std::invalid_argument("alpha_weight: q_hat exceeds q_max");
  return std::pow(10.0, q_hat - q_max);
}

LossBreakdown utterance_loss(const QualityLabel& label, const AssessmentResult& result,
                             const LossConfig& cfg) {
  const long t_frames = result.frame_scores.size();
  if (t_frames == 0) throw std::invalid_argument("utterance_loss: empty frame scores");

  LossBreakdown b;
  const double err = label.q_hat - result.utterance_score;
  b.utterance_term = err * err;
  b.alpha = cfg.alpha_enabled ? alpha_weight(label.q_hat, label.q_max) : 0.0;

  double frame_sum = 0.0;
  for (long t = 0; t < t_frames; ++t) {
    const double d = label.q_hat - result.frame_scores(t);
    frame_sum += d * d;
  }
  b.frame_term = cfg.frame_term_mean ? frame_sum / static_cast<double>(t_frames) : frame_sum;
  b.total = b.utterance_term + b.alpha * b.frame_term;
  return b;
}

std::pair<double, Eigen::VectorXd> loss_grads(const QualityLabel& label,
                                              const AssessmentResult& result,
                                              const LossConfig& cfg) {
  const long t_frames = result.frame_scores.size();
  if (t_frames == 0) throw std::invalid_argument("loss_grads: empty frame scores");

  const double alpha = cfg.alpha_enabled ? alpha_weight(label.q_hat, label.q_max) : 0.0;
  const double frame_weight =
      cfg.frame_term_mean ? alpha / static_cast<double>(t_frames) : alpha;
  const double mean_path =
      2.0 * (result.utterance_score - label.q_hat) / static_cast<double>(t_frames);

  Eigen::VectorXd dq(t_frames);
  for (long t = 0; t < t_frames; ++t) {
    dq(t) = mean_path + 2.0 * frame_weight * (result.frame_scores(t) - label.q_hat);
  }
  return {0.0, dq};
}

double batch_loss(std::span<const QualityLabel> labels,
                  std::span<const AssessmentResult> results, const LossConfig& cfg) {
  if (labels.empty()) throw std::invalid_argument("batch_loss: empty batch");
  if (labels.size() != results.size()) {
    throw std::invalid_argument("batch_loss: label/result length mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    acc += utterance_loss(labels[i], results[i], cfg).total;
  }
  return acc / static_cast<double>(labels.size());
}

}  // namespace qnet
