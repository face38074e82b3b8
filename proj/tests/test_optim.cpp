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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "qualitynet/corpus.hpp"
#include "qualitynet/io_util.hpp"
#include "qualitynet/metrics.hpp"
#include "qualitynet/optim.hpp"

using namespace qnet;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path d = fs::temp_directory_path() / "qnet_optim_tests" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

ModelParams tiny_model(std::uint64_t seed = 1) {
  return init_model(ModelDims{4, 2}, -3.0, seed);
}

// A manifest of `copies` entries that all point at one synthetic utterance.
CorpusManifest cloned_manifest(const fs::path& dir, int copies, double label) {
  AudioClip clip = synth_speechlike(99, 1.0);
  write_wav(clip, dir / "u.wav");
  CorpusManifest m;
  m.base_dir = dir;
  for (int i = 0; i < copies; ++i) {
    ManifestEntry e;
    e.utterance_id = "u" + std::to_string(i);
    e.condition = Condition::kClean;
    e.audio_path = "u.wav";
    e.label_q = label;
    m.entries.push_back(e);
  }
  return m;
}

}  // namespace

TEST_CASE("rmsprop scalar recurrences") {
  ModelParams p = tiny_model();
  ParamGrads g = zeros_like(p);
  RmsPropState state = make_rmsprop_state(p, 0.01, 0.9, 1e-7);

  // Zero gradient: parameters unchanged, accumulators stay decayed (zero).
  ModelParams before = p;
  rmsprop_step(p, g, state);
  CHECK(tensor_views(p)[0][0] == tensor_views(before)[0][0]);

  // Single step with g = 3: v = 0.9*0 + 0.1*9 = 0.9, delta = -lr*3/(sqrt(.9)+eps).
  tensor_views(g)[0][0] = 3.0;
  double theta0 = tensor_views(p)[0][0];
  rmsprop_step(p, g, state);
  CHECK(tensor_views(state.v)[0][0] == doctest::Approx(0.9).epsilon(1e-12));
  double delta = tensor_views(p)[0][0] - theta0;
  CHECK(delta == doctest::Approx(-0.01 * 3.0 / (std::sqrt(0.9) + 1e-7)).epsilon(1e-12));
  CHECK(delta == doctest::Approx(-0.0316228).epsilon(1e-5));

  // Two consecutive unit gradients from scratch: v2 = 0.9*0.1 + 0.1 = 0.19.
  RmsPropState s2 = make_rmsprop_state(p, 0.01, 0.9, 1e-7);
  ParamGrads g1 = zeros_like(p);
  tensor_views(g1)[0][0] = 1.0;
  rmsprop_step(p, g1, s2);
  CHECK(tensor_views(s2.v)[0][0] == doctest::Approx(0.1).epsilon(1e-12));
  rmsprop_step(p, g1, s2);
  CHECK(tensor_views(s2.v)[0][0] == doctest::Approx(0.19).epsilon(1e-12));
}

TEST_CASE("clip_gradients global norm rule") {
  ModelParams p = tiny_model();

  ParamGrads g = zeros_like(p);
  auto views = tensor_views(g);
  views[0][0] = 3.0;
  views[0][1] = 4.0;  // norm exactly 5
  clip_gradients(g, 5.0);
  CHECK(tensor_views(g)[0][0] == 3.0);
  CHECK(tensor_views(g)[0][1] == 4.0);

  views[0][0] = 6.0;
  views[0][1] = 8.0;  // norm 10 -> halved
  clip_gradients(g, 5.0);
  CHECK(tensor_views(g)[0][0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(tensor_views(g)[0][1] == doctest::Approx(4.0).epsilon(1e-12));

  views[0][0] = 1.0;
  views[0][1] = 1.0;  // norm ~1.41 < 5: untouched
  clip_gradients(g, 5.0);
  CHECK(tensor_views(g)[0][0] == 1.0);

  CHECK_THROWS_AS(clip_gradients(g, 0.0), std::invalid_argument);
}

TEST_CASE("checkpoint roundtrip at float32 precision; resave is byte-identical") {
  fs::path dir = fresh_dir("ckpt");
  ModelParams p = init_model(ModelDims{6, 3}, -3.0, 42);

  fs::path first = dir / "model.qnet";
  save_checkpoint(p, first);
  ModelParams loaded = load_checkpoint(first);

  CHECK(loaded.dims.input_dim == 6);
  CHECK(loaded.dims.hidden == 3);
  CHECK(loaded.forget_gate_bias_init == -3.0);

  auto orig = tensor_views(p);
  auto back = tensor_views(loaded);
  REQUIRE(orig.size() == back.size());
  for (std::size_t t = 0; t < orig.size(); ++t) {
    REQUIRE(orig[t].size() == back[t].size());
    for (std::size_t i = 0; i < orig[t].size(); ++i) {
      CHECK(back[t][i] == static_cast<double>(static_cast<float>(orig[t][i])));
    }
  }

  fs::path second = dir / "model2.qnet";
  save_checkpoint(loaded, second);
  CHECK(read_text_file(first) == read_text_file(second));
}

TEST_CASE("checkpoint rejects corrupt and mismatched files") {
  fs::path dir = fresh_dir("ckpt_bad");
  ModelParams p = init_model(ModelDims{6, 3}, -3.0, 42);
  fs::path path = dir / "model.qnet";
  save_checkpoint(p, path);

  fs::path truncated = dir / "trunc.qnet";
  fs::copy_file(path, truncated);
  fs::resize_file(truncated, fs::file_size(truncated) - 64);
  CHECK_THROWS_WITH_AS(load_checkpoint(truncated), doctest::Contains("corrupt checkpoint"),
                       std::runtime_error);

  write_text_atomic(dir / "junk.qnet", "definitely not a checkpoint");
  CHECK_THROWS_WITH_AS(load_checkpoint(dir / "junk.qnet"), doctest::Contains("corrupt checkpoint"),
                       std::runtime_error);

  CHECK_THROWS_WITH_AS(load_checkpoint(path, 257), doctest::Contains("expected F=257"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(load_checkpoint(path, 6, 100), doctest::Contains("expected H=100"),
                       std::runtime_error);
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.qnet"), std::runtime_error);
}

TEST_CASE("training is deterministic and overfits a cloned utterance") {
  fs::path dir = fresh_dir("overfit");
  CorpusManifest m = cloned_manifest(dir, 10, 3.0);

  TrainConfig cfg;  // defaults: H=100, 15 epochs, lr 1e-3
  cfg.shuffle_seed = 5;

  TrainResult r1 = train(m, m, cfg);
  TrainResult r2 = train(m, m, cfg);

  fs::path c1 = dir / "m1.qnet";
  fs::path c2 = dir / "m2.qnet";
  save_checkpoint(r1.params, c1);
  save_checkpoint(r2.params, c2);
  CHECK(read_text_file(c1) == read_text_file(c2));  // bitwise identical

  // The utterance shared by all entries converges toward its label. With
  // the default settings (lr 1e-3, clip 5, <= 15 epochs) the score first
  // overshoots and then settles; measured |Q - 3.0| = 0.175 for this seed.
  AudioClip clip = read_wav(dir / "u.wav");
  Spectrogram spec = magnitude_spectrogram(clip);
  AssessmentResult res = forward(spec, r1.params);
  CHECK(std::abs(res.utterance_score - 3.0) < 0.2);
  double best_val =
      r1.history.epochs[static_cast<std::size_t>(r1.history.best_epoch - 1)].val_mse;
  CHECK(best_val < 0.05);

  REQUIRE(!r1.history.epochs.empty());
  REQUIRE(r1.history.best_epoch >= 1);
  const auto& epochs = r1.history.epochs;
  // Model selection cannot be worse than the first epoch.
  CHECK(epochs[static_cast<std::size_t>(r1.history.best_epoch - 1)].val_mse <=
        epochs[0].val_mse);
  // Learning actually happened on the frozen mini-corpus.
  CHECK(epochs[static_cast<std::size_t>(r1.history.best_epoch - 1)].train_loss <
        epochs[0].train_loss);
}

TEST_CASE("train validates inputs") {
  fs::path dir = fresh_dir("train_bad");
  CorpusManifest m = cloned_manifest(dir, 2, 3.0);

  TrainConfig cfg;
  cfg.patience = 99;  // > max_epochs
  CHECK_THROWS_AS(train(m, m, cfg), std::invalid_argument);

  cfg = {};
  cfg.lr = 0.0;
  CHECK_THROWS_AS(train(m, m, cfg), std::invalid_argument);

  cfg = {};
  CorpusManifest empty;
  CHECK_THROWS_AS(train(empty, m, cfg), std::invalid_argument);

  CorpusManifest missing = m;
  missing.entries[0].audio_path = "nope.wav";
  CHECK_THROWS_AS(train(missing, m, cfg), std::runtime_error);
}

TEST_CASE("history CSV layout") {
  TrainHistory h;
  h.epochs.push_back({1, 0.5, 0.4, 0.9, 0.8});
  h.epochs.push_back({2, 0.3, 0.35, 0.92, 0.85});
  h.best_epoch = 2;
  fs::path dir = fresh_dir("history");
  write_history_csv(h, dir / "hist.csv");
  std::string text = read_text_file(dir / "hist.csv");
  CHECK(text.rfind("epoch,train_loss,val_mse,val_lcc,val_srcc\n", 0) == 0);
  CHECK(text.find("\n1,0.5,0.4,0.9,0.8\n") != std::string::npos);
}

TEST_CASE("learning_curve shapes and validation") {
  fs::path dir = fresh_dir("curve");
  CorpusManifest m = cloned_manifest(dir, 6, 3.5);

  TrainConfig cfg;
  cfg.hidden = 4;
  cfg.max_epochs = 2;
  cfg.patience = 2;

  auto rows = learning_curve(m, m, m, {2, 5}, cfg);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].size == 2);
  CHECK(rows[1].size == 5);
  CHECK(std::isfinite(rows[0].mse));

  CHECK_THROWS_AS(learning_curve(m, m, m, {0}, cfg), std::invalid_argument);
  CHECK_THROWS_AS(learning_curve(m, m, m, {7}, cfg), std::invalid_argument);
  CHECK_THROWS_AS(learning_curve(m, m, m, {}, cfg), std::invalid_argument);

  write_learning_curve_csv(rows, dir / "curve.csv");
  std::string text = read_text_file(dir / "curve.csv");
  CHECK(text.rfind("size,mse,lcc,srcc\n", 0) == 0);
}
