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

#include "qualitynet/stft.hpp"

#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "qualitynet/fft.hpp"
#include "qualitynet/io_util.hpp"

namespace qnet {

namespace {
constexpr char kCacheMagic[4] = {'Q', 'N', 'F', 'T'};
constexpr std::uint32_t kCacheVersion = 1;
}  // namespace

void StftConfig::validate() const {
  if (frame_len <= 0 || hop <= 0) throw std::invalid_argument("stft: nonpositive frame/hop");
  if (hop > frame_len) throw std::invalid_argument("stft: hop must not exceed frame_len");
  if (fft_size != frame_len) throw std::invalid_argument("stft: fft_size must equal frame_len");
  if ((fft_size & (fft_size - 1)) != 0) throw std::invalid_argument("stft: fft_size must be a power of two");
}

std::vector<double> hann_window_periodic(int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    w[static_cast<std::size_t>(i)] = 0.5 * (1.0 - std::cos(2.0 * M_PI * i / n));
  }
  return w;
}

long frame_count(long signal_len, const StftConfig& cfg) {
  cfg.validate();
  if (signal_len < cfg.frame_len) {
    throw std::invalid_argument("signal shorter than one analysis frame");
  }
  return 1 + (signal_len - cfg.frame_len) / cfg.hop;
}

Spectrogram magnitude_spectrogram(const AudioClip& clip, const StftConfig& cfg) {
  const long t_frames = frame_count(static_cast<long>(clip.samples.size()), cfg);
  const int bins = cfg.num_bins();
  const std::vector<double> window = hann_window_periodic(cfg.frame_len);

  Spectrogram spec;
  spec.config = cfg;
  spec.frames.resize(t_frames, bins);

  std::vector<std::complex<double>> buf(static_cast<std::size_t>(cfg.fft_size));
  for (long t = 0; t < t_frames; ++t) {
    const std::size_t start = static_cast<std::size_t>(t) * cfg.hop;
    for (int i = 0; i < cfg.frame_len; ++i) {
      buf[static_cast<std::size_t>(i)] = clip.samples[start + i] * window[static_cast<std::size_t>(i)];
    }
    fft_inplace(buf, /*inverse=*/false);
    for (int k = 0; k < bins; ++k) {
      double mag = std::abs(buf[static_cast<std::size_t>(k)]);
      if (cfg.log1p) mag = std::log1p(mag);
      spec.frames(t, k) = mag;
    }
  }
  return spec;
}

void save_feature_cache(const Spectrogram& spec, const std::filesystem::path& path) {
  write_file_atomic(path, [&](std::ostream& out) {
    out.write(kCacheMagic, 4);
    std::uint32_t header[3] = {kCacheVersion,
                               static_cast<std::uint32_t>(spec.num_frames()),
                               static_cast<std::uint32_t>(spec.num_bins())};
    out.write(reinterpret_cast<const char*>(header), sizeof(header));
    // Row-major by frame, float32 storage.
    for (int t = 0; t < spec.num_frames(); ++t) {
      for (int k = 0; k < spec.num_bins(); ++k) {
        float v = static_cast<float>(spec.frames(t, k));
        out.write(reinterpret_cast<const char*>(&v), sizeof(v));
      }
    }
  }, /*binary=*/true);
}

Spectrogram load_feature_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open feature cache: " + path.string());

  char magic[4];
  std::uint32_t header[3];
  if (!in.read(magic, 4) || std::memcmp(magic, kCacheMagic, 4) != 0) {
    throw std::runtime_error("corrupt feature cache (bad magic): " + path.string());
  }
  if (!in.read(reinterpret_cast<char*>(header), sizeof(header))) {
    throw std::runtime_error("corrupt feature cache (short header): " + path.string());
  }
  if (header[0] != kCacheVersion) {
    throw std::runtime_error("unsupported feature cache version: " + path.string());
  }

  Spectrogram spec;
  spec.frames.resize(static_cast<long>(header[1]), static_cast<long>(header[2]));
  for (long t = 0; t < spec.frames.rows(); ++t) {
    for (long k = 0; k < spec.frames.cols(); ++k) {
      float v;
      if (!in.read(reinterpret_cast<char*>(&v), sizeof(v))) {
        throw std::runtime_error("corrupt feature cache (truncated): " + path.string());
      }
      spec.frames(t, k) = static_cast<double>(v);
    }
  }
  return spec;
}

}  // namespace qnet
