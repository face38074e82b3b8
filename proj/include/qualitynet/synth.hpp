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

#ifndef QUALITYNET_SYNTH_HPP_
#define QUALITYNET_SYNTH_HPP_

#include <cstdint>
#include <string>

#include "qualitynet/audio.hpp"

namespace qnet {

enum class NoiseKind { kWhite, kPink, kEngine, kBabble };

std::string to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& name);

// Deterministic speech-like utterance: voiced stretches (harmonic source,
// f0 drifting in 100-220 Hz, shaped by 2-3 slowly moving resonators)
// alternating with unvoiced bursts and near-silent pauses. Peak amplitude
// is normalized to exactly 0.5. duration_s must lie in [1, 5].
AudioClip synth_speechlike(std::uint64_t seed, double duration_s);

// Deterministic noise, RMS normalized to exactly 0.1.
//   white  - Gaussian
//   pink   - 1/f power spectrum (-3 dB/octave), synthesized spectrally
//   engine - amplitude-modulated harmonic stack below 300 Hz plus
//            low-passed rumble
//   babble - sum of 6 independent speech-like clips
AudioClip synth_noise(NoiseKind kind, std::uint64_t seed, double duration_s);

}  // namespace qnet

#endif  // QUALITYNET_SYNTH_HPP_
