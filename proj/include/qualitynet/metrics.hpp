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

#ifndef QUALITYNET_METRICS_HPP_
#define QUALITYNET_METRICS_HPP_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "qualitynet/corpus.hpp"
#include "qualitynet/model.hpp"

namespace qnet {

double mse(std::span<const double> truth, std::span<const double> pred);

// Sample Pearson correlation. Throws "undefined correlation" when either
// input is constant; the result is clamped into [-1, 1] against rounding.
double pearson_lcc(std::span<const double> x, std::span<const double> y);

// 1-based ranks; ties receive the mean of their rank span.
std::vector<double> average_ranks(std::span<const double> x);

// Pearson correlation of the average-ranked data.
double spearman_srcc(std::span<const double> x, std::span<const double> y);

// Mean over utterances of the population variance of the frame scores.
// Every utterance must have at least 2 frames.
double frame_variance_clean(const std::vector<AssessmentResult>& clean_results);

struct EvalRow {
  std::string utterance_id;
  std::string condition;
  double label_q = 0.0;
  double pred_q = 0.0;
};

struct EvalReport {
  double mse = std::numeric_limits<double>::quiet_NaN();
  double lcc = std::numeric_limits<double>::quiet_NaN();
  double srcc = std::numeric_limits<double>::quiet_NaN();
  std::size_t n = 0;
  // Mean population variance of frame scores over clean utterances; NaN
  // when the manifest has no clean entries.
  double clean_frame_variance = std::numeric_limits<double>::quiet_NaN();
  std::vector<EvalRow> rows;
  std::size_t excluded = 0;                 // entries that failed to score
  std::vector<std::string> failures;        // one message per excluded entry
  std::string correlation_error;            // set when lcc/srcc are undefined
};

struct EvalConfig {
  StftConfig stft;
  bool clamp_predictions = false;  // clamp into [1.0, 4.5] when set
};

// Scores every manifest entry with the model. Per-utterance failures are
// excluded and counted instead of aborting the run.
EvalReport evaluate(const ModelParams& model, const CorpusManifest& manifest,
                    const EvalConfig& cfg = {});

std::string eval_report_json(const EvalReport& report);

// Per-utterance CSV (utterance_id,condition,label_q,pred_q) for external
// scatter plots.
void write_scatter_csv(const EvalReport& report, const std::filesystem::path& path);

// JSON summary plus the scatter CSV.
void write_eval_report(const EvalReport& report, const std::filesystem::path& json_path,
                       const std::filesystem::path& rows_csv_path);

}  // namespace qnet

#endif  // QUALITYNET_METRICS_HPP_
