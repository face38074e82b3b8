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

#include "qualitynet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "qualitynet/io_util.hpp"
#include "qualitynet/threading.hpp"

namespace qnet {

double mse(std::span<const double> truth, std::span<const double> pred) {
  if (truth.size() != pred.size()) throw std::invalid_argument("mse: length mismatch");
  if (truth.empty()) throw std::invalid_argument("mse: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    double d = truth[i] - pred[i];
    acc += d * d;
  }
  return acc / static_cast<double>(truth.size());
}

double pearson_lcc(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson_lcc: length mismatch");
  const std::size_t n = x.size();
  if (n < 2) throw std::invalid_argument("pearson_lcc: need at least 2 points");

  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);

  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw std::invalid_argument("undefined correlation: constant input");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // mean of ranks i+1..j+1
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double spearman_srcc(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman_srcc: length mismatch");
  std::vector<double> rx = average_ranks(x);
  std::vector<double> ry = average_ranks(y);
  return pearson_lcc(rx, ry);
}

double frame_variance_clean(const std::vector<AssessmentResult>& clean_results) {
  if (clean_results.empty()) {
    throw std::invalid_argument("frame_variance_clean: empty input");
  }
  double acc = 0.0;
  for (const auto& r : clean_results) {
    const long t = r.frame_scores.size();
    if (t < 2) throw std::invalid_argument("frame_variance_clean: utterance with < 2 frames");
    double mean = r.frame_scores.mean();
    double var = (r.frame_scores.array() - mean).square().sum() / static_cast<double>(t);
    acc += var;
  }
  return acc / static_cast<double>(clean_results.size());
}

EvalReport evaluate(const ModelParams& model, const CorpusManifest& manifest,
                    const EvalConfig& cfg) {
  if (manifest.entries.empty()) throw std::invalid_argument("evaluate: empty manifest");

  const std::size_t n = manifest.entries.size();
  struct Slot {
    bool ok = false;
    std::string error;
    AssessmentResult result;
  };
  std::vector<Slot> slots(n);

  parallel_for(n, [&](std::size_t i) {
    const ManifestEntry& e = manifest.entries[i];
    try {
      AudioClip clip = read_wav(manifest.resolve_audio(e));
      if (clip.sample_rate_hz != kCorpusSampleRateHz) {
        throw std::runtime_error("expected 16 kHz audio, got " +
                                 std::to_string(clip.sample_rate_hz) + " Hz");
      }
      Spectrogram spec = magnitude_spectrogram(clip, cfg.stft);
      slots[i].result = forward(spec, model);
      slots[i].ok = true;
    } catch (const std::exception& ex) {
      slots[i].error = e.utterance_id + ": " + ex.what();
    }
  });

  EvalReport report;
  std::vector<double> labels, preds;
  std::vector<AssessmentResult> clean_results;
  for (std::size_t i = 0; i < n; ++i) {
    const ManifestEntry& e = manifest.entries[i];
    if (!slots[i].ok) {
      ++report.excluded;
      report.failures.push_back(slots[i].error);
      continue;
    }
    double pred = slots[i].result.utterance_score;
    if (cfg.clamp_predictions) pred = std::clamp(pred, kQualityFloor, kQualityMax);
    report.rows.push_back({e.utterance_id, to_string(e.condition), e.label_q, pred});
    labels.push_back(e.label_q);
    preds.push_back(pred);
    if (e.condition == Condition::kClean && slots[i].result.frame_scores.size() >= 2) {
      clean_results.push_back(std::move(slots[i].result));
    }
  }

  report.n = labels.size();
  if (!labels.empty()) report.mse = mse(labels, preds);
  try {
    report.lcc = pearson_lcc(labels, preds);
    report.srcc = spearman_srcc(labels, preds);
  } catch (const std::exception& ex) {
    report.correlation_error = ex.what();
  }
  if (!clean_results.empty()) {
    report.clean_frame_variance = frame_variance_clean(clean_results);
  }
  return report;
}

std::string eval_report_json(const EvalReport& report) {
  nlohmann::json j;
  auto put = [&](const char* key, double v) {
    if (std::isfinite(v)) j[key] = v; else j[key] = nullptr;
  };
  put("mse", report.mse);
  put("lcc", report.lcc);
  put("srcc", report.srcc);
  j["n"] = report.n;
  put("clean_frame_variance", report.clean_frame_variance);
  j["excluded"] = report.excluded;
  if (!report.correlation_error.empty()) j["correlation_error"] = report.correlation_error;
  if (!report.failures.empty()) j["failures"] = report.failures;
  return j.dump(2) + "\n";
}

void write_scatter_csv(const EvalReport& report, const std::filesystem::path& path) {
  write_file_atomic(path, [&](std::ostream& out) {
    out << "utterance_id,condition,label_q,pred_q\n";
    char buf[128];
    for (const auto& row : report.rows) {
      std::snprintf(buf, sizeof(buf), "%s,%s,%.4f,%.6f\n", row.utterance_id.c_str(),
                    row.condition.c_str(), row.label_q, row.pred_q);
      out << buf;
    }
  });
}

void write_eval_report(const EvalReport& report, const std::filesystem::path& json_path,
                       const std::filesystem::path& rows_csv_path) {
  write_text_atomic(json_path, eval_report_json(report));
  write_scatter_csv(report, rows_csv_path);
}

}  // namespace qnet
