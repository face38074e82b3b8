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

#include "qualitynet/optim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "qualitynet/io_util.hpp"
#include "qualitynet/metrics.hpp"
#include "qualitynet/rng.hpp"
#include "qualitynet/threading.hpp"

namespace qnet {

namespace {

constexpr char kCheckpointMagic[4] = {'Q', 'N', 'E', 'T'};
constexpr std::uint32_t kCheckpointVersion = 1;

void check_same_shape(const ModelParams& a, const ModelParams& b, const char* what) {
  if (a.dims.input_dim != b.dims.input_dim || a.dims.hidden != b.dims.hidden) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch");
  }
}

Spectrogram entry_features(const CorpusManifest& manifest, const ManifestEntry& entry,
                           const StftConfig& stft) {
  AudioClip clip = read_wav(manifest.resolve_audio(entry));
  if (clip.sample_rate_hz != kCorpusSampleRateHz) {
    throw std::runtime_error(entry.utterance_id + ": expected 16 kHz audio, got " +
                             std::to_string(clip.sample_rate_hz) + " Hz");
  }
  return magnitude_spectrogram(clip, stft);
}

std::string format_stat(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.8g", v);
  return buf;
}

}  // namespace

RmsPropState make_rmsprop_state(const ModelParams& params, double lr, double rho, double eps) {
  RmsPropState state;
  state.lr = lr;
  state.rho = rho;
  state.eps = eps;
  state.v = zeros_like(params);
  return state;
}

void rmsprop_step(ModelParams& params, const ParamGrads& grads, RmsPropState& state) {
  check_same_shape(params, grads, "rmsprop_step");
  check_same_shape(params, state.v, "rmsprop_step");

  auto pv = tensor_views(params);
  auto gv = tensor_views(grads);
  auto vv = tensor_views(state.v);

  for (std::size_t t = 0; t < pv.size(); ++t) {
    double* p = pv[t].data();
    const double* g = gv[t].data();
    double* v = vv[t].data();
    const std::size_t n = pv[t].size();
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = state.rho * v[i] + (1.0 - state.rho) * g[i] * g[i];
      p[i] -= state.lr * g[i] / (std::sqrt(v[i]) + state.eps);
    }
  }
}

double global_grad_norm(const ParamGrads& grads) {
  double acc = 0.0;
  for (const auto& view : tensor_views(grads)) {
    for (double g : view) acc += g * g;
  }
  return std::sqrt(acc);
}

void clip_gradients(ParamGrads& grads, double clip_norm) {
  if (!(clip_norm > 0.0)) throw std::invalid_argument("clip_gradients: clip_norm must be > 0");
  double norm = global_grad_norm(grads);
  if (norm <= clip_norm) return;
  double scale = clip_norm / norm;
  for (auto& view : tensor_views(grads)) {
    for (double& g : view) g *= scale;
  }
}

void TrainConfig::validate() const {
  if (max_epochs < 1) throw std::invalid_argument("train: max_epochs must be >= 1");
  if (patience < 1 || patience > max_epochs) {
    throw std::invalid_argument("train: patience must be in [1, max_epochs]");
  }
  if (!(lr > 0.0)) throw std::invalid_argument("train: lr must be positive");
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("train: rho must be in (0,1)");
  if (!(eps > 0.0)) throw std::invalid_argument("train: eps must be positive");
  if (!(clip_norm > 0.0)) throw std::invalid_argument("train: clip_norm must be positive");
  if (hidden < 1) throw std::invalid_argument("train: hidden must be >= 1");
  stft.validate();
}

TrainResult train(const CorpusManifest& train_manifest,
                  const CorpusManifest& val_manifest, const TrainConfig& cfg) {
  cfg.validate();
  if (train_manifest.entries.empty() || val_manifest.entries.empty()) {
    throw std::invalid_argument("train: empty manifest");
  }

  const std::size_t n_train = train_manifest.entries.size();
  const std::size_t n_val = val_manifest.entries.size();

  std::vector<Spectrogram> train_feats(n_train);
  std::vector<Spectrogram> val_feats(n_val);
  parallel_for(n_train, [&](std::size_t i) {
    train_feats[i] = entry_features(train_manifest, train_manifest.entries[i], cfg.stft);
  });
  parallel_for(n_val, [&](std::size_t i) {
    val_feats[i] = entry_features(val_manifest, val_manifest.entries[i], cfg.stft);
  });

  std::vector<double> val_labels(n_val);
  for (std::size_t i = 0; i < n_val; ++i) val_labels[i] = val_manifest.entries[i].label_q;

  const ModelDims dims{cfg.stft.num_bins(), cfg.hidden};
  ModelParams params = init_model(dims, cfg.forget_gate_bias, derive_seed(cfg.shuffle_seed, 0x1817));
  RmsPropState state = make_rmsprop_state(params, cfg.lr, cfg.rho, cfg.eps);
  const LossConfig loss_cfg = cfg.loss_config();

  std::vector<std::size_t> order(n_train);
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  result.params = params;
  double best_val_mse = std::numeric_limits<double>::infinity();
  int epochs_since_best = 0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    Rng epoch_rng(derive_seed(cfg.shuffle_seed, 1000 + static_cast<std::uint64_t>(epoch)));
    shuffle(order, epoch_rng);

    double loss_acc = 0.0;
    ForwardTrace trace;
    for (std::size_t idx : order) {
      const QualityLabel label{train_manifest.entries[idx].label_q, kQualityMax};
      AssessmentResult res = forward(train_feats[idx], params, &trace);
      loss_acc += utterance_loss(label, res, loss_cfg).total;
      auto [d_utt, d_frames] = loss_grads(label, res, loss_cfg);
      ParamGrads grads = backward(trace, d_utt, d_frames, params);
      clip_gradients(grads, cfg.clip_norm);
      rmsprop_step(params, grads, state);
    }

    std::vector<double> val_preds(n_val);
    for (std::size_t i = 0; i < n_val; ++i) {
      val_preds[i] = forward(val_feats[i], params).utterance_score;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_acc / static_cast<double>(n_train);
    stats.val_mse = mse(val_labels, val_preds);
    stats.val_lcc = std::numeric_limits<double>::quiet_NaN();
    stats.val_srcc = std::numeric_limits<double>::quiet_NaN();
    if (n_val >= 2) {
      try {
        stats.val_lcc = pearson_lcc(val_labels, val_preds);
        stats.val_srcc = spearman_srcc(val_labels, val_preds);
      } catch (const std::invalid_argument&) {
        // constant labels or predictions; recorded as NaN
      }
    }
    result.history.epochs.push_back(stats);

    if (stats.val_mse < best_val_mse) {
      best_val_mse = stats.val_mse;
      result.params = params;
      result.history.best_epoch = epoch;
      epochs_since_best = 0;
    } else {
      ++epochs_since_best;
      if (epochs_since_best >= cfg.patience) break;
    }
  }
  return result;
}

void write_history_csv(const TrainHistory& history, const std::filesystem::path& path) {
  write_file_atomic(path, [&](std::ostream& out) {
    out << "epoch,train_loss,val_mse,val_lcc,val_srcc\n";
    for (const auto& e : history.epochs) {
      out << e.epoch << ',' << format_stat(e.train_loss) << ',' << format_stat(e.val_mse)
          << ',' << format_stat(e.val_lcc) << ',' << format_stat(e.val_srcc) << "\n";
    }
  });
}

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
  write_file_atomic(path, [&](std::ostream& out) {
    out.write(kCheckpointMagic, 4);
    std::uint32_t version = kCheckpointVersion;
    std::uint32_t f = static_cast<std::uint32_t>(params.dims.input_dim);
    std::uint32_t h = static_cast<std::uint32_t>(params.dims.hidden);
    float fgb = static_cast<float>(params.forget_gate_bias_init);
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    out.write(reinterpret_cast<const char*>(&f), sizeof(f));
    out.write(reinterpret_cast<const char*>(&h), sizeof(h));
    out.write(reinterpret_cast<const char*>(&fgb), sizeof(fgb));
    for (const auto& view : tensor_views(params)) {
      for (double v : view) {
        float f32 = static_cast<float>(v);
        out.write(reinterpret_cast<const char*>(&f32), sizeof(f32));
      }
    }
  }, /*binary=*/true);
}

ModelParams load_checkpoint(const std::filesystem::path& path,
                            std::optional<int> expect_input_dim,
                            std::optional<int> expect_hidden) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());

  char magic[4];
  std::uint32_t version = 0, f = 0, h = 0;
  float fgb = 0.0f;
  if (!in.read(magic, 4) || std::memcmp(magic, kCheckpointMagic, 4) != 0) {
    throw std::runtime_error("corrupt checkpoint (bad magic): " + path.string());
  }
  if (!in.read(reinterpret_cast<char*>(&version), sizeof(version)) ||
      !in.read(reinterpret_cast<char*>(&f), sizeof(f)) ||
      !in.read(reinterpret_cast<char*>(&h), sizeof(h)) ||
      !in.read(reinterpret_cast<char*>(&fgb), sizeof(fgb))) {
    throw std::runtime_error("corrupt checkpoint (short header): " + path.string());
  }
  if (version != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  }
  if (f < 1 || h < 1) throw std::runtime_error("corrupt checkpoint (bad dims): " + path.string());
  if (expect_input_dim && static_cast<int>(f) != *expect_input_dim) {
    throw std::runtime_error("checkpoint dim mismatch: expected F=" +
                             std::to_string(*expect_input_dim) + ", found F=" + std::to_string(f));
  }
  if (expect_hidden && static_cast<int>(h) != *expect_hidden) {
    throw std::runtime_error("checkpoint dim mismatch: expected H=" +
                             std::to_string(*expect_hidden) + ", found H=" + std::to_string(h));
  }

  ModelDims dims{static_cast<int>(f), static_cast<int>(h)};
  ModelParams params = init_model(dims, 0.0, 0);
  params.forget_gate_bias_init = static_cast<double>(fgb);
  for (auto& view : tensor_views(params)) {
    for (double& v : view) {
      float f32;
      if (!in.read(reinterpret_cast<char*>(&f32), sizeof(f32))) {
        throw std::runtime_error("corrupt checkpoint (truncated): " + path.string());
      }
      v = static_cast<double>(f32);
    }
  }
  char extra;
  if (in.read(&extra, 1)) {
    throw std::runtime_error("corrupt checkpoint (trailing data): " + path.string());
  }
  return params;
}

std::vector<LearningCurveRow> learning_curve(const CorpusManifest& train_manifest,
                                             const CorpusManifest& val_manifest,
                                             const CorpusManifest& test_manifest,
                                             const std::vector<int>& sizes,
                                             const TrainConfig& cfg,
                                             std::vector<ModelParams>* models_out) {
  if (sizes.empty()) throw std::invalid_argument("learning_curve: no sizes given");
  for (int s : sizes) {
    if (s < 1) throw std::invalid_argument("learning_curve: sizes must be >= 1");
    if (static_cast<std::size_t>(s) > train_manifest.entries.size()) {
      throw std::invalid_argument("learning_curve: size " + std::to_string(s) +
                                  " exceeds corpus (" +
                                  std::to_string(train_manifest.entries.size()) + ")");
    }
  }

  std::vector<ManifestEntry> shuffled = train_manifest.entries;
  Rng rng(derive_seed(cfg.shuffle_seed, 0xc0e));
  shuffle(shuffled, rng);

  std::vector<LearningCurveRow> rows(sizes.size());
  if (models_out) models_out->resize(sizes.size());

  parallel_for(sizes.size(), [&](std::size_t i) {
    CorpusManifest subset;
    subset.split = train_manifest.split;
    subset.base_dir = train_manifest.base_dir;
    subset.entries.assign(shuffled.begin(), shuffled.begin() + sizes[i]);

    TrainResult trained = train(subset, val_manifest, cfg);
    EvalReport report = evaluate(trained.params, test_manifest, {cfg.stft, false});
    rows[i] = {sizes[i], report.mse, report.lcc, report.srcc};
    if (models_out) (*models_out)[i] = std::move(trained.params);
  });
  return rows;
}

void write_learning_curve_csv(const std::vector<LearningCurveRow>& rows,
                              const std::filesystem::path& path) {
  write_file_atomic(path, [&](std::ostream& out) {
    out << "size,mse,lcc,srcc\n";
    for (const auto& r : rows) {
      out << r.size << ',' << format_stat(r.mse) << ',' << format_stat(r.lcc) << ','
          << format_stat(r.srcc) << "\n";
    }
  });
}

}  // namespace qnet
