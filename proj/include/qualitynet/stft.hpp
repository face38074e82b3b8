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

#ifndef QUALITYNET_STFT_HPP_
#define QUALITYNET_STFT_HPP_

#include <Eigen/Core>
#include <filesystem>
#include <vector>

#include "qualitynet/audio.hpp"

namespace qnet {

// Analysis settings: 512/256 periodic Hann at 16 kHz (32 ms / 16 ms),
// giving 257 feature bins per frame. Magnitudes are used raw; `log1p`
// switches on log(1+m) compression and defaults off.
struct StftConfig {
  int frame_len = 512;
  int hop = 256;
  int fft_size = 512;
  bool log1p = false;

  int num_bins() const { return fft_size / 2 + 1; }
  void validate() const;
};

// T x F nonnegative magnitude matrix, one row per frame.
struct Spectrogram {
  Eigen::MatrixXd frames;
  StftConfig config;

  int num_frames() const { return static_cast<int>(frames.rows()); }
  int num_bins() const { return static_cast<int>(frames.cols()); }
};

// Periodic Hann window w[n] = 0.5*(1 - cos(2*pi*n/N)).
std::vector<double> hann_window_periodic(int n);

// 1 + floor((signal_len - frame_len)/hop); trailing samples that do not
// fill a frame are dropped. Throws if the signal is shorter than one frame.
long frame_count(long signal_len, const StftConfig& cfg = {});

Spectrogram magnitude_spectrogram(const AudioClip& clip, const StftConfig& cfg = {});

// Per-utterance feature cache blob: header {magic "QNFT", version u32,
// T u32, F u32}, then T*F float32 little-endian magnitudes, row-major.
void save_feature_cache(const Spectrogram& spec, const std::filesystem::path& path);
Spectrogram load_feature_cache(const std::filesystem::path& path);

}  // namespace qnet

#endif  // QUALITYNET_STFT_HPP_
