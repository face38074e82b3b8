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

#include "qualitynet/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "qualitynet/io_util.hpp"

namespace qnet {

namespace {

constexpr double kSnrCapDb = 60.0;
constexpr double kResidualCapRatio = 1e-6;

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

double signal_power(std::span<const double> samples) {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (double s : samples) acc += s * s;
  return acc / static_cast<double>(samples.size());
}

double signal_rms(std::span<const double> samples) {
  return std::sqrt(signal_power(samples));
}

AudioClip read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open wav file: " + path.string());

  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw std::runtime_error("malformed wav header: " + path.string());
  }

  bool have_fmt = false;
  std::uint16_t format_tag = 0, channels = 0, bits_per_sample = 0;
  std::uint32_t sample_rate = 0;
  const unsigned char* data_ptr = nullptr;
  std::uint32_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    std::uint32_t chunk_size = read_u32(chunk + 4);
    std::size_t body = pos + 8;
    if (body + chunk_size > bytes.size()) {
      throw std::runtime_error("malformed wav header: truncated chunk in " + path.string());
    }
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (chunk_size < 16) throw std::runtime_error("malformed wav header: short fmt chunk");
      format_tag = read_u16(bytes.data() + body);
      channels = read_u16(bytes.data() + body + 2);
      sample_rate = read_u32(bytes.data() + body + 4);
      bits_per_sample = read_u16(bytes.data() + body + 14);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data_ptr = bytes.data() + body;
      data_size = chunk_size;
    }
    pos = body + chunk_size + (chunk_size & 1);  // chunks are word-aligned
  }

  if (!have_fmt || data_ptr == nullptr) {
    throw std::runtime_error("malformed wav header: missing fmt or data chunk in " + path.string());
  }
  if (format_tag != 1) throw std::runtime_error("unsupported encoding (want PCM): " + path.string());
  if (channels != 1) throw std::runtime_error("unsupported channel count (want mono): " + path.string());
  if (bits_per_sample != 16) throw std::runtime_error("unsupported bit depth (want 16): " + path.string());

  AudioClip clip;
  clip.sample_rate_hz = static_cast<int>(sample_rate);
  std::size_t n = data_size / 2;
  clip.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::int16_t v = static_cast<std::int16_t>(read_u16(data_ptr + 2 * i));
    clip.samples[i] = static_cast<double>(v) / 32768.0;
  }
  return clip;
}

std::size_t write_wav(const AudioClip& clip, const std::filesystem::path& path) {
  if (clip.samples.empty()) throw std::invalid_argument("refusing to write empty clip");

  std::size_t clamped = 0;
  std::string payload;
  payload.reserve(44 + 2 * clip.samples.size());

  std::uint32_t data_bytes = static_cast<std::uint32_t>(2 * clip.samples.size());
  payload.append("RIFF");
  put_u32(payload, 36 + data_bytes);
  payload.append("WAVE");
  payload.append("fmt ");
  put_u32(payload, 16);
  put_u16(payload, 1);  // PCM
  put_u16(payload, 1);  // mono
  put_u32(payload, static_cast<std::uint32_t>(clip.sample_rate_hz));
  put_u32(payload, static_cast<std::uint32_t>(clip.sample_rate_hz * 2));
  put_u16(payload, 2);   // block align
  put_u16(payload, 16);  // bits per sample
  payload.append("data");
  put_u32(payload, data_bytes);

  for (double s : clip.samples) {
    if (s < -1.0 || s > 1.0) ++clamped;
    double scaled = std::round(s * 32768.0);
    scaled = std::clamp(scaled, -32768.0, 32767.0);
    put_u16(payload, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
  }

  write_file_atomic(path, [&](std::ostream& out) {
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  }, /*binary=*/true);
  return clamped;
}

double global_snr_db(const AudioClip& reference, const AudioClip& degraded) {
  if (reference.samples.size() != degraded.samples.size()) {
    throw std::invalid_argument("global_snr_db: length mismatch");
  }
  double ref_energy = 0.0, residual_energy = 0.0;
  for (std::size_t i = 0; i < reference.samples.size(); ++i) {
    double r = reference.samples[i];
    double d = degraded.samples[i] - r;
    ref_energy += r * r;
    residual_energy += d * d;
  }
  if (ref_energy <= 0.0) throw std::invalid_argument("global_snr_db: zero reference power");
  if (residual_energy <= kResidualCapRatio * ref_energy) return kSnrCapDb;
  return 10.0 * std::log10(ref_energy / residual_energy);
}

AudioClip mix_at_snr(const AudioClip& clean, const AudioClip& noise,
                     double snr_db, std::size_t noise_offset) {
  if (clean.sample_rate_hz != noise.sample_rate_hz) {
    throw std::invalid_argument("mix_at_snr: sample rate mismatch");
  }
  if (clean.samples.empty() || noise.samples.empty()) {
    throw std::invalid_argument("mix_at_snr: empty input");
  }

  const std::size_t n = clean.samples.size();
  std::vector<double> segment(n);
  for (std::size_t i = 0; i < n; ++i) {
    segment[i] = noise.samples[(noise_offset + i) % noise.samples.size()];
  }

  double p_clean = signal_power(clean.samples);
  double p_noise = signal_power(segment);
  if (p_clean <= 0.0) throw std::invalid_argument("mix_at_snr: zero-power clean signal");
  if (p_noise <= 0.0) throw std::invalid_argument("mix_at_snr: zero-power noise segment");

  double gain = std::sqrt(p_clean / (p_noise * std::pow(10.0, snr_db / 10.0)));

  AudioClip mix;
  mix.sample_rate_hz = clean.sample_rate_hz;
  mix.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    mix.samples[i] = clean.samples[i] + gain * segment[i];
  }
  return mix;
}

double proxy_quality(const AudioClip& reference, const AudioClip& degraded) {
  double snr_db = global_snr_db(reference, degraded);
  double q = 1.0 + 3.5 * (snr_db + 5.0) / 30.0;
  return std::clamp(q, kQualityFloor, kQualityMax);
}

}  // namespace qnet
