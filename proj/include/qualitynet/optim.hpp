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

#ifndef QUALITYNET_OPTIM_HPP_
#define QUALITYNET_OPTIM_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "qualitynet/corpus.hpp"
#include "qualitynet/loss.hpp"
#include "qualitynet/model.hpp"

namespace qnet {

// RMSprop: v <- rho*v + (1-rho)*g^2; theta <- theta - lr*g/(sqrt(v)+eps).
struct RmsPropState {
  double lr = 1e-3;
  double rho = 0.9;
  double eps = 1e-7;
  ModelParams v;  // running mean-square accumulators, parameter-shaped
};

RmsPropState make_rmsprop_state(const ModelParams& params, double lr = 1e-3,
                                double rho = 0.9, double eps = 1e-7);

void rmsprop_step(ModelParams& params, const ParamGrads& grads, RmsPropState& state);

double global_grad_norm(const ParamGrads& grads);

// Rescales all tensors by clip_norm/norm when the global L2 norm exceeds
// clip_norm; otherwise a no-op.
void clip_gradients(ParamGrads& grads, double clip_norm);

struct TrainConfig {
  int max_epochs = 15;
  int patience = 3;
  double lr = 1e-3;
  double rho = 0.9;
  double eps = 1e-7;
  double clip_norm = 5.0;
  std::uint64_t shuffle_seed = 1;
  double forget_gate_bias = -3.0;
  bool alpha_enabled = true;
  bool frame_term_mean = false;
  int hidden = 100;
  StftConfig stft;

  void validate() const;
  LossConfig loss_config() const { return {alpha_enabled, frame_term_mean}; }
};

struct EpochStats {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_mse = 0.0;
  double val_lcc = 0.0;   // NaN when undefined
  double val_srcc = 0.0;  // NaN when undefined
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
  int best_epoch = 0;  // epoch whose parameters are returned
};

struct TrainResult {
  ModelParams params;
  TrainHistory history;
};

// Per-utterance (batch size 1) training with seeded shuffling, gradient
// clipping and RMSprop. Validation MSE is evaluated each epoch; the best
// parameters are kept and training stops after `patience` epochs without
// improvement. Deterministic given the config and manifests.
TrainResult train(const CorpusManifest& train_manifest,
                  const CorpusManifest& val_manifest, const TrainConfig& cfg);

// CSV: epoch,train_loss,val_mse,val_lcc,val_srcc
void write_history_csv(const TrainHistory& history, const std::filesystem::path& path);

// Checkpoint: header {magic "QNET", version u32, F u32, H u32, fgb f32},
// then every tensor as float32 little-endian in declaration order
// (fwd W_i..W_o, U_i..U_o, b_i..b_o; bwd likewise; dense1 W,b; dense2 W,b;
// out W,b), each matrix column-major.
void save_checkpoint(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_checkpoint(const std::filesystem::path& path,
                            std::optional<int> expect_input_dim = {},
                            std::optional<int> expect_hidden = {});

struct LearningCurveRow {
  int size = 0;
  double mse = 0.0;
  double lcc = 0.0;
  double srcc = 0.0;
};

// Trains one model per requested size on a seeded prefix of the shuffled
// training manifest and evaluates each on the fixed test split. Models are
// independent and may train concurrently.
std::vector<LearningCurveRow> learning_curve(const CorpusManifest& train_manifest,
                                             const CorpusManifest& val_manifest,
                                             const CorpusManifest& test_manifest,
                                             const std::vector<int>& sizes,
                                             const TrainConfig& cfg,
                                             std::vector<ModelParams>* models_out = nullptr);

void write_learning_curve_csv(const std::vector<LearningCurveRow>& rows,
                              const std::filesystem::path& path);

}  // namespace qnet

#endif  // QUALITYNET_OPTIM_HPP_
