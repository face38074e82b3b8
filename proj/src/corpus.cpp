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

#include "qualitynet/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "qualitynet/enhance.hpp"
#include "qualitynet/io_util.hpp"
#include "qualitynet/rng.hpp"
#include "qualitynet/threading.hpp"

namespace qnet {

namespace {

const char kManifestHeader[] = "utterance_id,condition,audio_path,noise_kind,snr_db,label_q";

std::string format_double(double v, const char* fmt) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

struct SplitPlan {
  Split split;
  std::string prefix;
  int count;
  std::uint64_t salt;
};

}  // namespace

std::string to_string(Condition c) {
  switch (c) {
    case Condition::kClean: return "clean";
    case Condition::kNoisy: return "noisy";
    case Condition::kEnhanced: return "enhanced";
  }
  throw std::logic_error("unreachable condition");
}

Condition condition_from_string(const std::string& name) {
  if (name == "clean") return Condition::kClean;
  if (name == "noisy") return Condition::kNoisy;
  if (name == "enhanced") return Condition::kEnhanced;
  throw std::invalid_argument("unknown condition: " + name);
}

std::string to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  throw std::logic_error("unreachable split");
}

void SynthConfig::validate() const {
  if (n_train < 1 || n_val < 1 || n_test < 1) {
    throw std::invalid_argument("corpus: split counts must be >= 1");
  }
  if (snr_levels_db.empty() || noise_kinds.empty()) {
    throw std::invalid_argument("corpus: need at least one SNR level and noise kind");
  }
  for (double s : snr_levels_db) {
    if (!std::isfinite(s)) throw std::invalid_argument("corpus: non-finite SNR level");
  }
  if (!(min_duration_s >= 1.0 && max_duration_s <= 5.0 && min_duration_s <= max_duration_s)) {
    throw std::invalid_argument("corpus: duration range must lie within [1, 5] s");
  }
}

void write_manifest_csv(const CorpusManifest& manifest, const std::filesystem::path& path) {
  write_file_atomic(path, [&](std::ostream& out) {
    out << kManifestHeader << "\n";
    for (const auto& e : manifest.entries) {
      out << e.utterance_id << ',' << to_string(e.condition) << ',' << e.audio_path << ','
          << e.noise_kind << ',' << (e.snr_db ? format_double(*e.snr_db, "%.6g") : "") << ','
          << format_double(e.label_q, "%.4f") << "\n";
    }
  });
}

CorpusManifest read_manifest_csv(const std::filesystem::path& path, Split split) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path.string());

  CorpusManifest manifest;
  manifest.split = split;
  manifest.base_dir = path.parent_path();

  std::string line;
  if (!std::getline(in, line) || line != kManifestHeader) {
    throw std::runtime_error("manifest header mismatch in " + path.string() +
                             " (expected \"" + kManifestHeader + "\")");
  }

  std::unordered_set<std::string> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 6) {
      throw std::runtime_error("manifest line " + std::to_string(line_no) + ": expected 6 fields");
    }
    ManifestEntry e;
    e.utterance_id = fields[0];
    e.condition = condition_from_string(fields[1]);
    e.audio_path = fields[2];
    e.noise_kind = fields[3];
    if (!fields[4].empty()) e.snr_db = std::stod(fields[4]);
    e.label_q = std::stod(fields[5]);
    if (e.label_q < kQualityFloor || e.label_q > kQualityMax) {
      throw std::runtime_error("manifest line " + std::to_string(line_no) +
                               ": label_q outside [1.0, 4.5]");
    }
    if (!seen.insert(e.utterance_id).second) {
      throw std::runtime_error("duplicate utterance_id: " + e.utterance_id);
    }
    manifest.entries.push_back(std::move(e));
  }
  if (manifest.entries.empty()) throw std::runtime_error("empty manifest: " + path.string());
  return manifest;
}

BuiltCorpus build_corpus(const SynthConfig& cfg, const std::filesystem::path& out_dir) {
  cfg.validate();
  namespace fs = std::filesystem;
  fs::create_directories(out_dir / "wav");

  const SplitPlan plans[3] = {
      {Split::kTrain, "tr", cfg.n_train, 1},
      {Split::kVal, "va", cfg.n_val, 2},
      {Split::kTest, "te", cfg.n_test, 3},
  };

  BuiltCorpus corpus;
  CorpusManifest* manifests[3] = {&corpus.train, &corpus.val, &corpus.test};

  for (int p = 0; p < 3; ++p) {
    const SplitPlan& plan = plans[p];
    const int n = plan.count;
    const int n_clean = static_cast<int>(std::lround(0.05 * n));
    const int n_noisy = (n - n_clean + 1) / 2;

    CorpusManifest& manifest = *manifests[p];
    manifest.split = plan.split;
    manifest.base_dir = out_dir;
    manifest.entries.resize(static_cast<std::size_t>(n));

    const std::uint64_t split_seed = derive_seed(cfg.master_seed, plan.salt);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
      Rng rng(derive_seed(split_seed, i));
      char idbuf[32];
      std::snprintf(idbuf, sizeof(idbuf), "%s_%04zu", plan.prefix.c_str(), i);

      ManifestEntry e;
      e.utterance_id = idbuf;
      e.audio_path = "wav/" + e.utterance_id + ".wav";

      double duration = rng.uniform(cfg.min_duration_s, cfg.max_duration_s);
      AudioClip clean = synth_speechlike(rng.next_u64(), duration);

      AudioClip to_write;
      if (static_cast<int>(i) < n_clean) {
        e.condition = Condition::kClean;
        e.label_q = proxy_quality(clean, clean);
        to_write = clean;
      } else {
        e.condition = static_cast<int>(i) < n_clean + n_noisy ? Condition::kNoisy
                                                              : Condition::kEnhanced;
        NoiseKind kind = cfg.noise_kinds[rng.index(cfg.noise_kinds.size())];
        double snr = cfg.snr_levels_db[rng.index(cfg.snr_levels_db.size())];
        AudioClip noise = synth_noise(kind, rng.next_u64(), duration);
        std::size_t offset = rng.index(noise.samples.size());
        AudioClip degraded = mix_at_snr(clean, noise, snr, offset);
        if (e.condition == Condition::kEnhanced) degraded = spectral_subtract(degraded);
        e.noise_kind = to_string(kind);
        e.snr_db = snr;
        e.label_q = proxy_quality(clean, degraded);
        to_write = std::move(degraded);
      }

      write_wav(to_write, out_dir / e.audio_path);
      manifest.entries[i] = std::move(e);
    });

    write_manifest_csv(manifest, out_dir / (to_string(plan.split) + ".csv"));
  }

  // Combined view, rows sorted by utterance_id.
  CorpusManifest combined;
  combined.base_dir = out_dir;
  for (auto* m : manifests) {
    combined.entries.insert(combined.entries.end(), m->entries.begin(), m->entries.end());
  }
  std::sort(combined.entries.begin(), combined.entries.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) {
              return a.utterance_id < b.utterance_id;
            });
  write_manifest_csv(combined, out_dir / "manifest.csv");

  return corpus;
}

}  // namespace qnet
