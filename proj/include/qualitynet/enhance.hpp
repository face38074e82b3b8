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

#ifndef QUALITYNET_ENHANCE_HPP_
#define QUALITYNET_ENHANCE_HPP_

#include "qualitynet/audio.hpp"
#include "qualitynet/stft.hpp"

namespace qnet {

// Magnitude spectral subtraction. The noise magnitude is estimated per bin
// as the mean over the first 10 frames; each bin then becomes
// max(|Y| - noise_est, 0.002*|Y|) and the frame is resynthesized with the
// noisy phase via overlap-add. Output length equals input length. The input
// must span at least 10 analysis frames.
AudioClip spectral_subtract(const AudioClip& noisy, const StftConfig& cfg = {});

}  // namespace qnet

#endif  // QUALITYNET_ENHANCE_HPP_
