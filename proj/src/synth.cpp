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

#include "qualitynet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "qualitynet/fft.hpp"
#include "qualitynet/rng.hpp"

namespace qnet {

namespace {

constexpr double kTwoPi = 6.283185307179586;
constexpr int kFs = kCorpusSampleRateHz;

// Two-pole resonator with per-sample center frequency, applied in place.
class Resonator {
 public:
  Resonator(double bandwidth_hz) : r_(std::exp(-M_PI * bandwidth_hz / kFs)) {}

  double step(double x, double fc_hz) {
    double theta = kTwoPi * fc_hz / kFs;
    double y = (1.0 - r_) * x + 2.0 * r_ * std::cos(theta) * y1_ - r_ * r_ * y2_;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

 private:
  double r_;
  double y1_ = 0.0, y2_ = 0.0;
};

void scale_to_rms(std::vector<double>& x, double target_rms) {
  double rms = signal_rms(x);
  if (rms <= 0.0) throw std::runtime_error("synth: degenerate zero-power segment");
  double s = target_rms / rms;
  for (double& v : x) v *= s;
}

// Raised-cosine fade at both ends of a segment.
void apply_fade(std::vector<double>& seg, int fade_samples) {
  int n = static_cast<int>(seg.size());
  int f = std::min(fade_samples, n / 2);
  for (int i = 0; i < f; ++i) {
    double w = 0.5 * (1.0 - std::cos(M_PI * i / f));
    seg[static_cast<std::size_t>(i)] *= w;
    seg[static_cast<std::size_t>(n - 1 - i)] *= w;
  }
}

std::vector<double> voiced_segment(Rng& rng, int len) {
  double f0 = rng.uniform(100.0, 220.0);
  // Linear f0 target over the segment, walked toward with slight jitter.
  double f0_end = std::clamp(f0 + rng.uniform(-40.0, 40.0), 100.0, 220.0);
  int harmonics = std::max(3, static_cast<int>(4000.0 / f0));

  int n_res = 2 + (rng.uniform() < 0.5 ? 1 : 0);
  struct Formant { double start, end, bw; };
  std::vector<Formant> formants;
  const double lo[3] = {300.0, 900.0, 2000.0};
  const double hi[3] = {900.0, 1800.0, 3000.0};
  for (int i = 0; i < n_res; ++i) {
    double a = rng.uniform(lo[i], hi[i]);
    double b = std::clamp(a + rng.uniform(-200.0, 200.0), lo[i], hi[i]);
    formants.push_back({a, b, rng.uniform(80.0, 180.0)});
  }

  std::vector<Resonator> bank;
  for (const auto& fm : formants) bank.emplace_back(fm.bw);

  std::vector<double> seg(static_cast<std::size_t>(len));
  double phase = rng.uniform(0.0, 1.0);
  for (int i = 0; i < len; ++i) {
    double frac = static_cast<double>(i) / len;
    double f = f0 + (f0_end - f0) * frac;
    phase += f / kFs;
    double src = 0.0;
    for (int k = 1; k <= harmonics; ++k) {
      src += std::sin(kTwoPi * k * phase) / k;
    }
    double y = src;
    for (std::size_t b = 0; b < bank.size(); ++b) {
      double fc = formants[b].start + (formants[b].end - formants[b].start) * frac;
      y = bank[b].step(y, fc);
    }
    seg[static_cast<std::size_t>(i)] = y;
  }

  scale_to_rms(seg, 0.15 * rng.uniform(0.7, 1.0));
  apply_fade(seg, kFs / 100);  // 10 ms
  return seg;
}

std::vector<double> unvoiced_segment(Rng& rng, int len) {
  Resonator res(rng.uniform(600.0, 1200.0));
  double fc = rng.uniform(2500.0, 5000.0);
  std::vector<double> seg(static_cast<std::size_t>(len));
  for (int i = 0; i < len; ++i) {
    seg[static_cast<std::size_t>(i)] = res.step(rng.normal(), fc);
  }
  scale_to_rms(seg, 0.04 * rng.uniform(0.6, 1.0));
  apply_fade(seg, kFs / 200);
  return seg;
}

std::vector<double> pause_segment(Rng& rng, int len) {
  std::vector<double> seg(static_cast<std::size_t>(len));
  for (int i = 0; i < len; ++i) {
    seg[static_cast<std::size_t>(i)] = 1e-3 * rng.normal();
  }
  return seg;
}

std::vector<double> white_noise(Rng& rng, std::size_t n) {
  std::vector<double> x(n);
  for (auto& v : x) v = rng.normal();
  return x;
}

// Exact 1/f power shaping in the frequency domain.
std::vector<double> pink_noise(Rng& rng, std::size_t n) {
  std::size_t m = 1;
  while (m < n) m <<= 1;
  std::vector<std::complex<double>> spec(m, {0.0, 0.0});
  for (std::size_t k = 1; k <= m / 2; ++k) {
    double amp = 1.0 / std::sqrt(static_cast<double>(k));
    double re = rng.normal() * amp;
    double im = (k == m / 2) ? 0.0 : rng.normal() * amp;
    spec[k] = {re, im};
    if (k != m / 2) spec[m - k] = std::conj(spec[k]);
  }
  fft_inplace(spec, /*inverse=*/true);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = spec[i].real();
  return x;
}

std::vector<double> engine_noise(Rng& rng, std::size_t n) {
  double f0 = rng.uniform(35.0, 55.0);
  int harmonics = static_cast<int>(290.0 / f0);
  std::vector<double> phases;
  for (int k = 0; k < harmonics; ++k) phases.push_back(rng.uniform(0.0, 1.0));
  double am_rate = rng.uniform(2.0, 6.0);
  double am_phase = rng.uniform(0.0, 1.0);

  // One-pole lowpass rumble under the tone stack.
  double alpha = std::exp(-kTwoPi * 200.0 / kFs);
  double lp = 0.0;

  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    double t = static_cast<double>(i) / kFs;
    double tones = 0.0;
    for (int k = 1; k <= harmonics; ++k) {
      tones += std::sin(kTwoPi * (k * f0 * t + phases[static_cast<std::size_t>(k - 1)])) / k;
    }
    double am = 1.0 + 0.5 * std::sin(kTwoPi * (am_rate * t + am_phase));
    lp = alpha * lp + (1.0 - alpha) * rng.normal();
    x[i] = am * tones + 3.0 * lp;
  }
  return x;
}

}  // namespace

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::kWhite: return "white";
    case NoiseKind::kPink: return "pink";
    case NoiseKind::kEngine: return "engine";
    case NoiseKind::kBabble: return "babble";
  }
  throw std::logic_error("unreachable noise kind");
}

NoiseKind noise_kind_from_string(const std::string& name) {
  if (name == "white") return NoiseKind::kWhite;
  if (name == "pink") return NoiseKind::kPink;
  if (name == "engine") return NoiseKind::kEngine;
  if (name == "babble") return NoiseKind::kBabble;
  throw std::invalid_argument("unknown noise kind: " + name);
}

AudioClip synth_speechlike(std::uint64_t seed, double duration_s) {
  if (duration_s < 1.0 || duration_s > 5.0) {
    throw std::invalid_argument("synth_speechlike: duration must be in [1, 5] s");
  }
  Rng rng(derive_seed(seed, 0x5bee5));
  const std::size_t n = static_cast<std::size_t>(std::llround(duration_s * kFs));

  AudioClip clip;
  clip.sample_rate_hz = kFs;
  clip.samples.reserve(n);

  bool voiced = true;
  while (clip.samples.size() < n) {
    std::vector<double> seg;
    if (voiced) {
      int len = static_cast<int>(rng.uniform(0.15, 0.35) * kFs);
      seg = voiced_segment(rng, len);
    } else if (rng.uniform() < 0.5) {
      int len = static_cast<int>(rng.uniform(0.06, 0.15) * kFs);
      seg = unvoiced_segment(rng, len);
    } else {
      int len = static_cast<int>(rng.uniform(0.06, 0.20) * kFs);
      seg = pause_segment(rng, len);
    }
    voiced = !voiced;
    for (double v : seg) {
      if (clip.samples.size() == n) break;
      clip.samples.push_back(v);
    }
  }

  double peak = 0.0;
  for (double v : clip.samples) peak = std::max(peak, std::abs(v));
  double s = 0.5 / peak;
  for (double& v : clip.samples) v *= s;
  return clip;
}

AudioClip synth_noise(NoiseKind kind, std::uint64_t seed, double duration_s) {
  if (duration_s <= 0.0 || duration_s > 30.0) {
    throw std::invalid_argument("synth_noise: duration must be in (0, 30] s");
  }
  const std::size_t n = static_cast<std::size_t>(std::llround(duration_s * kFs));
  Rng rng(derive_seed(seed, 0x4015e));

  AudioClip clip;
  clip.sample_rate_hz = kFs;
  switch (kind) {
    case NoiseKind::kWhite:
      clip.samples = white_noise(rng, n);
      break;
    case NoiseKind::kPink:
      clip.samples = pink_noise(rng, n);
      break;
    case NoiseKind::kEngine:
      clip.samples = engine_noise(rng, n);
      break;
    case NoiseKind::kBabble: {
      double dur = std::clamp(duration_s, 1.0, 5.0);
      clip.samples.assign(n, 0.0);
      for (int v = 0; v < 6; ++v) {
        AudioClip talker = synth_speechlike(derive_seed(seed, 0xbabb1e + static_cast<std::uint64_t>(v)), dur);
        for (std::size_t i = 0; i < n; ++i) {
          clip.samples[i] += talker.samples[i % talker.samples.size()];
        }
      }
      break;
    }
  }

  scale_to_rms(clip.samples, 0.1);
  return clip;
}

}  // namespace qnet
