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

#ifndef QUALITYNET_CORPUS_HPP_
#define QUALITYNET_CORPUS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qualitynet/audio.hpp"
#include "qualitynet/synth.hpp"

namespace qnet {

enum class Condition { kClean, kNoisy, kEnhanced };
std::string to_string(Condition c);
Condition condition_from_string(const std::string& name);

enum class Split { kTrain, kVal, kTest };
std::string to_string(Split s);

struct ManifestEntry {
  std::string utterance_id;
  Condition condition = Condition::kClean;
  std::string audio_path;            // relative to the manifest's directory
  std::string noise_kind;            // empty for clean entries
  std::optional<double> snr_db;      // empty for clean entries
  double label_q = 0.0;              // quality score in [1.0, 4.5]
};

struct CorpusManifest {
  Split split = Split::kTrain;
  std::vector<ManifestEntry> entries;
  std::filesystem::path base_dir;    // directory audio paths resolve against

  std::filesystem::path resolve_audio(const ManifestEntry& e) const {
    std::filesystem::path p(e.audio_path);
    return p.is_absolute() ? p : base_dir / p;
  }
};

// CSV header: utterance_id,condition,audio_path,noise_kind,snr_db,label_q
// snr_db is empty for clean entries; label_q carries 4 decimal places.
void write_manifest_csv(const CorpusManifest& manifest, const std::filesystem::path& path);
CorpusManifest read_manifest_csv(const std::filesystem::path& path, Split split);

struct SynthConfig {
  int n_train = 500;
  int n_val = 100;
  int n_test = 100;
  std::vector<double> snr_levels_db = {-10, -5, 0, 5, 10, 15, 20, 25};
  std::vector<NoiseKind> noise_kinds = {NoiseKind::kWhite, NoiseKind::kPink,
                                        NoiseKind::kEngine, NoiseKind::kBabble};
  double min_duration_s = 1.0;
  double max_duration_s = 3.0;
  std::uint64_t master_seed = 7;

  void validate() const;
};

struct BuiltCorpus {
  CorpusManifest train, val, test;
};

// Synthesizes a labeled corpus under out_dir. Each split is ~5% clean,
// ~47.5% noisy (one noise kind at one SNR level per utterance) and ~47.5%
// enhanced (spectral subtraction applied to an independently mixed noisy
// clip). Every entry is labeled with proxy_quality against its clean
// source. Writes wav/ plus train.csv, val.csv, test.csv and a combined
// manifest.csv; byte-identical across runs for the same master_seed.
BuiltCorpus build_corpus(const SynthConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace qnet

#endif  // QUALITYNET_CORPUS_HPP_
