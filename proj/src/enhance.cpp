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

#include "qualitynet/enhance.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "qualitynet/fft.hpp"

namespace qnet {

namespace {
constexpr int kNoiseEstimateFrames = 10;
constexpr double kSpectralFloor = 0.002;
}  // namespace

AudioClip spectral_subtract(const AudioClip& noisy, const StftConfig& cfg) {
  cfg.validate();
  const std::size_t n = noisy.samples.size();
  if (n < static_cast<std::size_t>(cfg.frame_len) ||
      frame_count(static_cast<long>(n), cfg) < kNoiseEstimateFrames) {
    throw std::invalid_argument("spectral_subtract: input shorter than 10 analysis frames");
  }

  // Zero-pad the tail so overlap-add covers every input sample.
  std::vector<double> padded(noisy.samples);
  padded.resize(n + static_cast<std::size_t>(cfg.frame_len), 0.0);
  const long t_frames = 1 + static_cast<long>(n) / cfg.hop;

  const int bins = cfg.num_bins();
  const std::vector<double> window = hann_window_periodic(cfg.frame_len);

  // Analysis pass: complex spectra of every frame.
  std::vector<std::vector<std::complex<double>>> spectra(static_cast<std::size_t>(t_frames));
  std::vector<std::complex<double>> buf(static_cast<std::size_t>(cfg.fft_size));
  for (long t = 0; t < t_frames; ++t) {
    const std::size_t start = static_cast<std::size_t>(t) * cfg.hop;
    for (int i = 0; i < cfg.frame_len; ++i) {
      buf[static_cast<std::size_t>(i)] = padded[start + i] * window[static_cast<std::size_t>(i)];
    }
    fft_inplace(buf, /*inverse=*/false);
    spectra[static_cast<std::size_t>(t)] = buf;
  }

  // Noise profile: mean magnitude per bin over the leading frames.
  std::vector<double> noise_est(static_cast<std::size_t>(bins), 0.0);
  for (int t = 0; t < kNoiseEstimateFrames; ++t) {
    for (int k = 0; k < bins; ++k) {
      noise_est[static_cast<std::size_t>(k)] += std::abs(spectra[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)]);
    }
  }
  for (double& v : noise_est) v /= kNoiseEstimateFrames;

  // Subtract and resynthesize with the noisy phase.
  std::vector<double> acc(padded.size(), 0.0);
  std::vector<double> wsum(padded.size(), 0.0);
  for (long t = 0; t < t_frames; ++t) {
    auto& spec = spectra[static_cast<std::size_t>(t)];
    for (int k = 0; k < bins; ++k) {
      double mag = std::abs(spec[static_cast<std::size_t>(k)]);
      double out_mag = std::max(mag - noise_est[static_cast<std::size_t>(k)], kSpectralFloor * mag);
      double ratio = mag > 0.0 ? out_mag / mag : 0.0;
      spec[static_cast<std::size_t>(k)] *= ratio;
      // Mirror bins carry the conjugate so the inverse transform stays real.
      if (k > 0 && k < cfg.fft_size - k) {
        spec[static_cast<std::size_t>(cfg.fft_size - k)] = std::conj(spec[static_cast<std::size_t>(k)]);
      }
    }
    fft_inplace(spec, /*inverse=*/true);
    const std::size_t start = static_cast<std::size_t>(t) * cfg.hop;
    for (int i = 0; i < cfg.frame_len; ++i) {
      acc[start + i] += spec[static_cast<std::size_t>(i)].real();
      wsum[start + i] += window[static_cast<std::size_t>(i)];
    }
  }

  AudioClip out;
  out.sample_rate_hz = noisy.sample_rate_hz;
  out.samples.resize(n);
  // Interior samples are covered by two frames whose windows sum to exactly
  // one; the divisor floor keeps the quarter-frame edge fades from
  // amplifying spectral leakage through a near-zero window sum.
  for (std::size_t i = 0; i < n; ++i) {
    out.samples[i] = acc[i] / std::max(wsum[i], 0.5);
  }
  return out;
}

}  // namespace qnet
