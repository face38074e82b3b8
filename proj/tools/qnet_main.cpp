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

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "qualitynet/corpus.hpp"
#include "qualitynet/grad_check.hpp"
#include "qualitynet/io_util.hpp"
#include "qualitynet/metrics.hpp"
#include "qualitynet/optim.hpp"
#include "qualitynet/rng.hpp"
#include "qualitynet/threading.hpp"

namespace fs = std::filesystem;
using namespace qnet;

namespace {

struct TrainFlags {
  std::string manifest, val, out, history;
  double fgb = -3.0;
  bool no_frame_constraint = false;
  bool frame_term_mean = false;
  bool log1p = false;
  int epochs = 15;
  int patience = 3;
  double lr = 1e-3;
  double rho = 0.9;
  double rms_eps = 1e-7;
  double clip = 5.0;
  int hidden = 100;
  std::uint64_t seed = 1;
};

void add_train_options(CLI::App* cmd, TrainFlags& f, bool with_outputs) {
  cmd->add_option("--val", f.val, "Validation manifest CSV")->required();
  if (with_outputs) {
    cmd->add_option("--out", f.out, "Output checkpoint path")->required();
    cmd->add_option("--history", f.history, "Training history CSV (default: <out>.history.csv)");
  }
  cmd->add_option("--fgb", f.fgb, "Forget gate bias at initialization (default -3)");
  cmd->add_flag("--no-frame-constraint", f.no_frame_constraint,
                "Disable the frame constraint (alpha = 0)");
  cmd->add_flag("--frame-term-mean", f.frame_term_mean,
                "Average the frame term over frames instead of summing");
  cmd->add_flag("--log1p", f.log1p, "log(1+m) feature compression");
  cmd->add_option("--epochs", f.epochs, "Maximum training epochs");
  cmd->add_option("--patience", f.patience, "Early-stopping patience in epochs");
  cmd->add_option("--lr", f.lr, "RMSprop learning rate");
  cmd->add_option("--rho", f.rho, "RMSprop decay");
  cmd->add_option("--rms-eps", f.rms_eps, "RMSprop stabilizer");
  cmd->add_option("--clip", f.clip, "Global gradient clipping norm");
  cmd->add_option("--hidden", f.hidden, "LSTM units per direction");
  cmd->add_option("--seed", f.seed, "Shuffle/init seed");
}

TrainConfig to_train_config(const TrainFlags& f) {
  TrainConfig cfg;
  cfg.max_epochs = f.epochs;
  cfg.patience = f.patience;
  cfg.lr = f.lr;
  cfg.rho = f.rho;
  cfg.eps = f.rms_eps;
  cfg.clip_norm = f.clip;
  cfg.shuffle_seed = f.seed;
  cfg.forget_gate_bias = f.fgb;
  cfg.alpha_enabled = !f.no_frame_constraint;
  cfg.frame_term_mean = f.frame_term_mean;
  cfg.hidden = f.hidden;
  cfg.stft.log1p = f.log1p;
  return cfg;
}

void print_epochs(const TrainHistory& history) {
  for (const auto& e : history.epochs) {
    std::printf("epoch %2d  train_loss %.5f  val_mse %.5f  val_lcc %.4f  val_srcc %.4f\n",
                e.epoch, e.train_loss, e.val_mse, e.val_lcc, e.val_srcc);
  }
  std::printf("best epoch: %d\n", history.best_epoch);
}

std::vector<int> parse_sizes(const std::string& csv) {
  std::vector<int> sizes;
  std::size_t pos = 0;
  while (pos < csv.size()) {
    std::size_t comma = csv.find(',', pos);
    if (comma == std::string::npos) comma = csv.size();
    sizes.push_back(std::stoi(csv.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return sizes;
}

std::vector<double> parse_doubles(const std::string& csv) {
  std::vector<double> values;
  std::size_t pos = 0;
  while (pos < csv.size()) {
    std::size_t comma = csv.find(',', pos);
    if (comma == std::string::npos) comma = csv.size();
    values.push_back(std::stod(csv.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return values;
}

std::string metric_or_na(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

int run_gradcheck(std::uint64_t seed, int trials, double eps, bool inject_fault) {
  if (trials < 1) throw CLI::ValidationError("--trials", "must be >= 1");
  if (!(eps > 0.0)) throw CLI::ValidationError("--eps", "must be > 0");

  const int hiddens[] = {2, 3, 5};
  const int frame_counts[] = {1, 2, 7};
  const int feature_dims[] = {3, 4};

  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    int h = hiddens[trial % 3];
    int t = frame_counts[(trial / 3) % 3];
    int f = feature_dims[(trial / 9) % 2];

    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(trial)));
    Spectrogram spec;
    spec.frames.resize(t, f);
    for (int i = 0; i < t; ++i) {
      for (int k = 0; k < f; ++k) spec.frames(i, k) = rng.uniform(0.0, 2.0);
    }
    ModelParams params = init_model(ModelDims{f, h}, -3.0, rng.next_u64());
    QualityLabel label{rng.uniform(1.0, 4.5), 4.5};

    double err = grad_check(params, spec, label, eps);
    std::printf("trial %2d  H=%d T=%d F=%d  max_rel_err %.3e\n", trial, h, t, f, err);
    worst = std::max(worst, err);
  }

  if (inject_fault) {
    // Self-test hook: compare a deliberately corrupted analytic gradient
    // against finite differences to prove the gate trips.
    Rng rng(derive_seed(seed, 0xfa17));
    Spectrogram spec;
    spec.frames.resize(3, 3);
    for (int i = 0; i < 3; ++i) {
      for (int k = 0; k < 3; ++k) spec.frames(i, k) = rng.uniform(0.0, 2.0);
    }
    ModelParams params = init_model(ModelDims{3, 2}, -3.0, rng.next_u64());
    QualityLabel label{3.0, 4.5};

    ForwardTrace trace;
    AssessmentResult res = forward(spec, params, &trace);
    auto [d_utt, d_frames] = loss_grads(label, res);
    ParamGrads analytic = backward(trace, d_utt, d_frames, params);
    double bugged = tensor_views(analytic)[0][0] + 1.0;

    ModelParams probe = params;
    auto views = tensor_views(probe);
    double saved = views[0][0];
    views[0][0] = saved + eps;
    double hi = utterance_loss(label, forward(spec, probe)).total;
    views[0][0] = saved - eps;
    double lo = utterance_loss(label, forward(spec, probe)).total;
    views[0][0] = saved;
    double numeric = (hi - lo) / (2.0 * eps);
    double rel = std::abs(bugged - numeric) / std::max(1e-3, std::abs(bugged) + std::abs(numeric));
    std::printf("fault injection  max_rel_err %.3e\n", rel);
    worst = std::max(worst, rel);
  }

  std::printf("max relative error: %.3e (tolerance 1e-4)\n", worst);
  return worst < 1e-4 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qualitynet: non-intrusive speech quality assessment"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read flags from a key=value config file");

  // ---- synth ----
  auto* synth = app.add_subcommand("synth", "Synthesize a labeled corpus");
  std::string synth_out;
  SynthConfig synth_cfg;
  std::string snr_csv, kinds_csv;
  synth->add_option("--out", synth_out, "Output corpus directory")->required();
  synth->add_option("--train", synth_cfg.n_train, "Training utterances");
  synth->add_option("--val", synth_cfg.n_val, "Validation utterances");
  synth->add_option("--test", synth_cfg.n_test, "Test utterances");
  synth->add_option("--seed", synth_cfg.master_seed, "Master seed");
  synth->add_option("--min-dur", synth_cfg.min_duration_s, "Minimum utterance seconds");
  synth->add_option("--max-dur", synth_cfg.max_duration_s, "Maximum utterance seconds");
  synth->add_option("--snr-levels", snr_csv, "Comma-separated SNR levels in dB");
  synth->add_option("--noise-kinds", kinds_csv, "Comma-separated noise kinds");

  // ---- train ----
  auto* train_cmd = app.add_subcommand("train", "Train a model on a manifest");
  TrainFlags tf;
  train_cmd->add_option("--manifest", tf.manifest, "Training manifest CSV")->required();
  add_train_options(train_cmd, tf, /*with_outputs=*/true);

  // ---- eval ----
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a manifest");
  std::string eval_model, eval_manifest, eval_json, eval_scatter;
  bool eval_clamp = false, eval_log1p = false;
  eval_cmd->add_option("--model", eval_model, "Checkpoint path")->required();
  eval_cmd->add_option("--manifest", eval_manifest, "Manifest CSV")->required();
  eval_cmd->add_option("--json", eval_json, "Write the JSON report here");
  eval_cmd->add_option("--scatter", eval_scatter, "Write per-utterance CSV here");
  eval_cmd->add_flag("--clamp", eval_clamp, "Clamp predictions into [1.0, 4.5]");
  eval_cmd->add_flag("--log1p", eval_log1p, "log(1+m) feature compression");

  // ---- score ----
  auto* score_cmd = app.add_subcommand("score", "Score a single wav file");
  std::string score_model, score_wav, score_frames;
  bool score_log1p = false;
  score_cmd->add_option("--model", score_model, "Checkpoint path")->required();
  score_cmd->add_option("--wav", score_wav, "Input wav (PCM16 mono, 16 kHz)")->required();
  score_cmd->add_option("--frames-out", score_frames, "Per-frame score CSV (frame_index,q_t)");
  score_cmd->add_flag("--log1p", score_log1p, "log(1+m) feature compression");

  // ---- gradcheck ----
  auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient verification");
  std::uint64_t grad_seed = 1;
  int grad_trials = 12;
  double grad_eps = 1e-5;
  bool grad_fault = false;
  grad_cmd->add_option("--seed", grad_seed, "Random seed");
  grad_cmd->add_option("--trials", grad_trials, "Number of random configurations");
  grad_cmd->add_option("--eps", grad_eps, "Finite-difference step");
  grad_cmd->add_flag("--inject-fault", grad_fault, "Self-test: corrupt one gradient")
      ->group("");  // hidden

  // ---- learning-curve ----
  auto* curve_cmd = app.add_subcommand("learning-curve",
                                       "Assessment quality vs. training-set size");
  TrainFlags cf;
  std::string curve_test, curve_sizes = "25,100,500", curve_out;
  curve_cmd->add_option("--manifest", cf.manifest, "Training manifest CSV")->required();
  curve_cmd->add_option("--test", curve_test, "Test manifest CSV")->required();
  curve_cmd->add_option("--sizes", curve_sizes, "Comma-separated training sizes");
  curve_cmd->add_option("--out", curve_out, "Output CSV")->required();
  add_train_options(curve_cmd, cf, /*with_outputs=*/false);

  // ---- ablate ----
  auto* ablate_cmd = app.add_subcommand(
      "ablate", "Train with and without the frame constraint and compare");
  TrainFlags af;
  std::string ablate_test, ablate_out;
  ablate_cmd->add_option("--manifest", af.manifest, "Training manifest CSV")->required();
  ablate_cmd->add_option("--test", ablate_test, "Test manifest CSV")->required();
  ablate_cmd->add_option("--out", ablate_out, "Output CSV")->required();
  add_train_options(ablate_cmd, af, /*with_outputs=*/false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      if (!snr_csv.empty()) synth_cfg.snr_levels_db = parse_doubles(snr_csv);
      if (!kinds_csv.empty()) {
        synth_cfg.noise_kinds.clear();
        std::size_t pos = 0;
        while (pos < kinds_csv.size()) {
          std::size_t comma = kinds_csv.find(',', pos);
          if (comma == std::string::npos) comma = kinds_csv.size();
          synth_cfg.noise_kinds.push_back(
              noise_kind_from_string(kinds_csv.substr(pos, comma - pos)));
          pos = comma + 1;
        }
      }
      BuiltCorpus corpus = build_corpus(synth_cfg, synth_out);
      std::printf("corpus written to %s\n", synth_out.c_str());
      std::printf("train: %zu  val: %zu  test: %zu\n", corpus.train.entries.size(),
                  corpus.val.entries.size(), corpus.test.entries.size());
      std::printf("manifests: train.csv val.csv test.csv manifest.csv\n");
    } else if (train_cmd->parsed()) {
      CorpusManifest train_m = read_manifest_csv(tf.manifest, Split::kTrain);
      CorpusManifest val_m = read_manifest_csv(tf.val, Split::kVal);
      TrainConfig cfg = to_train_config(tf);
      TrainResult result = train(train_m, val_m, cfg);
      save_checkpoint(result.params, tf.out);
      std::string history = tf.history.empty() ? tf.out + ".history.csv" : tf.history;
      write_history_csv(result.history, history);
      print_epochs(result.history);
      std::printf("checkpoint: %s\nhistory: %s\n", tf.out.c_str(), history.c_str());
    } else if (eval_cmd->parsed()) {
      EvalConfig cfg;
      cfg.stft.log1p = eval_log1p;
      cfg.clamp_predictions = eval_clamp;
      ModelParams model = load_checkpoint(eval_model, cfg.stft.num_bins());
      CorpusManifest manifest = read_manifest_csv(eval_manifest, Split::kTest);
      EvalReport report = evaluate(model, manifest, cfg);
      std::string json = eval_report_json(report);
      std::fputs(json.c_str(), stdout);
      if (!eval_json.empty()) write_text_atomic(eval_json, json);
      if (!eval_scatter.empty()) write_scatter_csv(report, eval_scatter);
    } else if (score_cmd->parsed()) {
      StftConfig stft;
      stft.log1p = score_log1p;
      ModelParams model = load_checkpoint(score_model, stft.num_bins());
      AudioClip clip = read_wav(score_wav);
      if (clip.sample_rate_hz != kCorpusSampleRateHz) {
        throw std::runtime_error("expected 16 kHz input");
      }
      Spectrogram spec = magnitude_spectrogram(clip, stft);
      AssessmentResult result = forward(spec, model);
      std::printf("%.6f\n", result.utterance_score);
      if (!score_frames.empty()) {
        write_file_atomic(score_frames, [&](std::ostream& out) {
          out << "frame_index,q_t\n";
          char buf[64];
          for (long t = 0; t < result.frame_scores.size(); ++t) {
            std::snprintf(buf, sizeof(buf), "%ld,%.6f\n", t + 1, result.frame_scores(t));
            out << buf;
          }
        });
      }
    } else if (grad_cmd->parsed()) {
      return run_gradcheck(grad_seed, grad_trials, grad_eps, grad_fault);
    } else if (curve_cmd->parsed()) {
      CorpusManifest train_m = read_manifest_csv(cf.manifest, Split::kTrain);
      CorpusManifest val_m = read_manifest_csv(cf.val, Split::kVal);
      CorpusManifest test_m = read_manifest_csv(curve_test, Split::kTest);
      auto rows = learning_curve(train_m, val_m, test_m, parse_sizes(curve_sizes),
                                 to_train_config(cf));
      write_learning_curve_csv(rows, curve_out);
      for (const auto& r : rows) {
        std::printf("size %4d  mse %s  lcc %s  srcc %s\n", r.size, metric_or_na(r.mse).c_str(),
                    metric_or_na(r.lcc).c_str(), metric_or_na(r.srcc).c_str());
      }
      std::printf("curve: %s\n", curve_out.c_str());
    } else if (ablate_cmd->parsed()) {
      CorpusManifest train_m = read_manifest_csv(af.manifest, Split::kTrain);
      CorpusManifest val_m = read_manifest_csv(af.val, Split::kVal);
      CorpusManifest test_m = read_manifest_csv(ablate_test, Split::kTest);

      TrainConfig with_cfg = to_train_config(af);
      with_cfg.alpha_enabled = true;
      TrainConfig without_cfg = with_cfg;
      without_cfg.alpha_enabled = false;

      // Two arms, identical seeds and settings apart from alpha.
      EvalReport reports[2];
      const TrainConfig* cfgs[2] = {&without_cfg, &with_cfg};
      parallel_for(2, [&](std::size_t i) {
        TrainResult r = train(train_m, val_m, *cfgs[i]);
        reports[i] = evaluate(r.params, test_m, {cfgs[i]->stft, false});
      });

      write_file_atomic(ablate_out, [&](std::ostream& out) {
        out << "arm,mse,lcc,srcc,clean_frame_variance\n";
        const char* names[2] = {"without_constraint", "with_constraint"};
        for (int i = 0; i < 2; ++i) {
          out << names[i] << ',' << metric_or_na(reports[i].mse) << ','
              << metric_or_na(reports[i].lcc) << ',' << metric_or_na(reports[i].srcc) << ','
              << metric_or_na(reports[i].clean_frame_variance) << "\n";
        }
      });
      std::printf("without constraint: mse %s lcc %s srcc %s clean_var %s\n",
                  metric_or_na(reports[0].mse).c_str(), metric_or_na(reports[0].lcc).c_str(),
                  metric_or_na(reports[0].srcc).c_str(),
                  metric_or_na(reports[0].clean_frame_variance).c_str());
      std::printf("with constraint:    mse %s lcc %s srcc %s clean_var %s\n",
                  metric_or_na(reports[1].mse).c_str(), metric_or_na(reports[1].lcc).c_str(),
                  metric_or_na(reports[1].srcc).c_str(),
                  metric_or_na(reports[1].clean_frame_variance).c_str());
      std::printf("table: %s\n", ablate_out.c_str());
    }
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 1;
  }
  return 0;
}
