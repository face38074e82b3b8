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

#ifndef QUALITYNET_GRAD_CHECK_HPP_
#define QUALITYNET_GRAD_CHECK_HPP_

#include "qualitynet/loss.hpp"
#include "qualitynet/model.hpp"

namespace qnet {

// Central finite differences of the full objective against the analytic
// gradients, over every parameter. Returns the worst relative error
// |g_a - g_n| / max(1e-3, |g_a| + |g_n|). Intended for small dims; eps must
// be positive (1e-5 is a good choice in double precision).
double grad_check(const ModelParams& params, const Spectrogram& spec,
                  const QualityLabel& label, double eps,
                  const LossConfig& loss_cfg = {});

}  // namespace qnet

#endif  // QUALITYNET_GRAD_CHECK_HPP_
