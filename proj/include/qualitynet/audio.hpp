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

#ifndef QUALITYNET_AUDIO_HPP_
#define QUALITYNET_AUDIO_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace qnet {

inline constexpr int kCorpusSampleRateHz = 16000;

// Mono waveform, samples nominally in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate_hz = kCorpusSampleRateHz;

  std::size_t size() const { return samples.size(); }
  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

// Mean square of the samples.
double signal_power(std::span<const double> samples);

// Root mean square.
double signal_rms(std::span<const double> samples);

// Reads a RIFF/WAVE file. Only PCM, 16-bit, mono is accepted; samples are
// scaled by 1/32768 into [-1, 1). Malformed containers and unsupported
// encodings/channel counts/bit depths are reported as distinct errors.
AudioClip read_wav(const std::filesystem::path& path);

// Writes PCM16 mono little-endian. Samples outside [-1, 1] are clamped;
// the return value is the number of clamped samples.
std::size_t write_wav(const AudioClip& clip, const std::filesystem::path& path);

// 10*log10(sum ref^2 / sum (degraded-ref)^2), capped at +60 dB once the
// residual power drops to 1e-6 of the reference power. Lengths must match.
double global_snr_db(const AudioClip& reference, const AudioClip& degraded);

// clean + g * noise with g chosen so the mix hits snr_db against the noise
// segment actually used. The noise is tiled cyclically from noise_offset
// when shorter than the clean signal.
AudioClip mix_at_snr(const AudioClip& clean, const AudioClip& noise,
                     double snr_db, std::size_t noise_offset = 0);

inline constexpr double kQualityFloor = 1.0;
inline constexpr double kQualityMax = 4.5;

// Intrusive quality label: clamp(1 + 3.5*(snr_db + 5)/30, 1.0, 4.5) with
// snr_db = global_snr_db(reference, degraded). An unchanged signal lands on
// the +60 dB cap and therefore scores 4.5.
double proxy_quality(const AudioClip& reference, const AudioClip& degraded);

}  // namespace qnet

#endif  // QUALITYNET_AUDIO_HPP_
