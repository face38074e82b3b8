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

#include "qualitynet/grad_check.hpp"

#include <cmath>
#include <stdexcept>

namespace qnet {

double grad_check(const ModelParams& params, const Spectrogram& spec,
                  const QualityLabel& label, double eps, const LossConfig& loss_cfg) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw std::invalid_argument("grad_check: invalid epsilon");
  }

  ForwardTrace trace;
  AssessmentResult result = forward(spec, params, &trace);
  auto [d_utt, d_frames] = loss_grads(label, result, loss_cfg);
  ParamGrads analytic = backward(trace, d_utt, d_frames, params);

  ModelParams probe = params;
  auto probe_views = tensor_views(probe);
  auto grad_views = tensor_views(analytic);

  double worst = 0.0;
  for (std::size_t t = 0; t < probe_views.size(); ++t) {
    for (std::size_t i = 0; i < probe_views[t].size(); ++i) {
      double& value = probe_views[t][i];
      const double saved = value;

      value = saved + eps;
      double loss_hi = utterance_loss(label, forward(spec, probe), loss_cfg).total;
      value = saved - eps;
      double loss_lo = utterance_loss(label, forward(spec, probe), loss_cfg).total;
      value = saved;

      double numeric = (loss_hi - loss_lo) / (2.0 * eps);
      double analytic_g = grad_views[t][i];
      double rel = std::abs(analytic_g - numeric) /
                   std::max(1e-3, std::abs(analytic_g) + std::abs(numeric));
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

}  // namespace qnet
