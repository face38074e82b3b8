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

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "qualitynet/corpus.hpp"
#include "qualitynet/enhance.hpp"
#include "qualitynet/grad_check.hpp"
#include "qualitynet/metrics.hpp"
#include "qualitynet/optim.hpp"

namespace py = pybind11;
using namespace qnet;

namespace {

AudioClip clip_from_array(const Eigen::VectorXd& samples, int sample_rate_hz) {
  AudioClip clip;
  clip.samples.assign(samples.data(), samples.data() + samples.size());
  clip.sample_rate_hz = sample_rate_hz;
  return clip;
}

Eigen::VectorXd clip_to_array(const AudioClip& clip) {
  return Eigen::Map<const Eigen::VectorXd>(clip.samples.data(),
                                           static_cast<long>(clip.samples.size()));
}

}  // namespace

PYBIND11_MODULE(_qualitynet, m) {
  m.doc() = "Non-intrusive speech quality assessment (BLSTM with frame-level scores)";

  // ---- signal ----
  m.def("read_wav", [](const std::filesystem::path& path) {
    AudioClip clip = read_wav(path);
    return py::make_tuple(clip_to_array(clip), clip.sample_rate_hz);
  }, py::arg("path"), "Read a PCM16 mono wav; returns (samples, sample_rate_hz)");

  m.def("write_wav", [](const Eigen::VectorXd& samples, const std::filesystem::path& path,
                        int sample_rate_hz) {
    return write_wav(clip_from_array(samples, sample_rate_hz), path);
  }, py::arg("samples"), py::arg("path"), py::arg("sample_rate_hz") = kCorpusSampleRateHz,
     "Write PCM16 mono; returns the number of clamped samples");

  m.def("synth_speechlike", [](std::uint64_t seed, double duration_s) {
    return clip_to_array(synth_speechlike(seed, duration_s));
  }, py::arg("seed"), py::arg("duration_s"));

  m.def("synth_noise", [](const std::string& kind, std::uint64_t seed, double duration_s) {
    return clip_to_array(synth_noise(noise_kind_from_string(kind), seed, duration_s));
  }, py::arg("kind"), py::arg("seed"), py::arg("duration_s"));

  m.def("mix_at_snr", [](const Eigen::VectorXd& clean, const Eigen::VectorXd& noise,
                         double snr_db, std::size_t noise_offset) {
    return clip_to_array(mix_at_snr(clip_from_array(clean, kCorpusSampleRateHz),
                                    clip_from_array(noise, kCorpusSampleRateHz), snr_db,
                                    noise_offset));
  }, py::arg("clean"), py::arg("noise"), py::arg("snr_db"), py::arg("noise_offset") = 0);

  m.def("global_snr_db", [](const Eigen::VectorXd& reference, const Eigen::VectorXd& degraded) {
    return global_snr_db(clip_from_array(reference, kCorpusSampleRateHz),
                         clip_from_array(degraded, kCorpusSampleRateHz));
  }, py::arg("reference"), py::arg("degraded"));

  m.def("proxy_quality", [](const Eigen::VectorXd& reference, const Eigen::VectorXd& degraded) {
    return proxy_quality(clip_from_array(reference, kCorpusSampleRateHz),
                         clip_from_array(degraded, kCorpusSampleRateHz));
  }, py::arg("reference"), py::arg("degraded"));

  m.def("spectral_subtract", [](const Eigen::VectorXd& noisy) {
    return clip_to_array(spectral_subtract(clip_from_array(noisy, kCorpusSampleRateHz)));
  }, py::arg("noisy"));

  // ---- features ----
  m.def("magnitude_spectrogram", [](const Eigen::VectorXd& samples, bool log1p) {
    StftConfig cfg;
    cfg.log1p = log1p;
    return magnitude_spectrogram(clip_from_array(samples, kCorpusSampleRateHz), cfg).frames;
  }, py::arg("samples"), py::arg("log1p") = false,
     "512/256 periodic-Hann magnitude spectrogram (T x 257)");

  m.def("frame_count", [](long signal_len) { return frame_count(signal_len); },
        py::arg("signal_len"));

  // ---- model ----
  py::class_<ModelParams>(m, "ModelParams")
      .def_property_readonly("input_dim", [](const ModelParams& p) { return p.dims.input_dim; })
      .def_property_readonly("hidden", [](const ModelParams& p) { return p.dims.hidden; })
      .def_property_readonly("forget_gate_bias_init",
                             [](const ModelParams& p) { return p.forget_gate_bias_init; });

  m.def("init_model", [](int input_dim, int hidden, double forget_gate_bias, std::uint64_t seed) {
    return init_model(ModelDims{input_dim, hidden}, forget_gate_bias, seed);
  }, py::arg("input_dim") = 257, py::arg("hidden") = 100, py::arg("forget_gate_bias") = -3.0,
     py::arg("seed") = 1);

  m.def("forward", [](const Eigen::MatrixXd& features, const ModelParams& params) {
    Spectrogram spec;
    spec.frames = features;
    AssessmentResult r = forward(spec, params);
    return py::make_tuple(r.utterance_score, r.frame_scores);
  }, py::arg("features"), py::arg("params"),
     "Run the model on a T x F spectrogram; returns (utterance_score, frame_scores)");

  m.def("grad_check", [](const ModelParams& params, const Eigen::MatrixXd& features,
                         double label, double eps) {
    Spectrogram spec;
    spec.frames = features;
    return grad_check(params, spec, QualityLabel{label, kQualityMax}, eps);
  }, py::arg("params"), py::arg("features"), py::arg("label"), py::arg("eps") = 1e-5);

  m.def("save_checkpoint", &save_checkpoint, py::arg("params"), py::arg("path"));
  m.def("load_checkpoint", [](const std::filesystem::path& path) {
    return load_checkpoint(path);
  }, py::arg("path"));

  // ---- loss ----
  m.def("alpha_weight", &alpha_weight, py::arg("q_hat"), py::arg("q_max") = kQualityMax);
  m.def("utterance_loss", [](double q_hat, double utterance_score,
                             const Eigen::VectorXd& frame_scores, bool alpha_enabled,
                             bool frame_term_mean) {
    AssessmentResult r{utterance_score, frame_scores};
    LossBreakdown b =
        utterance_loss(QualityLabel{q_hat, kQualityMax}, r, {alpha_enabled, frame_term_mean});
    return py::make_tuple(b.total, b.utterance_term, b.frame_term, b.alpha);
  }, py::arg("q_hat"), py::arg("utterance_score"), py::arg("frame_scores"),
     py::arg("alpha_enabled") = true, py::arg("frame_term_mean") = false,
     "Returns (total, utterance_term, frame_term, alpha)");

  // ---- metrics ----
  m.def("mse", [](const std::vector<double>& t, const std::vector<double>& p) {
    return mse(t, p);
  }, py::arg("truth"), py::arg("pred"));
  m.def("pearson_lcc", [](const std::vector<double>& x, const std::vector<double>& y) {
    return pearson_lcc(x, y);
  }, py::arg("x"), py::arg("y"));
  m.def("spearman_srcc", [](const std::vector<double>& x, const std::vector<double>& y) {
    return spearman_srcc(x, y);
  }, py::arg("x"), py::arg("y"));

  // ---- corpus / training ----
  m.def("build_corpus", [](const std::filesystem::path& out_dir, int n_train, int n_val,
                           int n_test, std::uint64_t seed, double min_duration_s,
                           double max_duration_s) {
    SynthConfig cfg;
    cfg.n_train = n_train;
    cfg.n_val = n_val;
    cfg.n_test = n_test;
    cfg.master_seed = seed;
    cfg.min_duration_s = min_duration_s;
    cfg.max_duration_s = max_duration_s;
    build_corpus(cfg, out_dir);
  }, py::arg("out_dir"), py::arg("n_train") = 500, py::arg("n_val") = 100,
     py::arg("n_test") = 100, py::arg("seed") = 7, py::arg("min_duration_s") = 1.0,
     py::arg("max_duration_s") = 3.0);

  m.def("train", [](const std::filesystem::path& train_csv, const std::filesystem::path& val_csv,
                    int max_epochs, int patience, double lr, double clip_norm,
                    std::uint64_t shuffle_seed, double forget_gate_bias, bool alpha_enabled,
                    int hidden) {
    TrainConfig cfg;
    cfg.max_epochs = max_epochs;
    cfg.patience = patience;
    cfg.lr = lr;
    cfg.clip_norm = clip_norm;
    cfg.shuffle_seed = shuffle_seed;
    cfg.forget_gate_bias = forget_gate_bias;
    cfg.alpha_enabled = alpha_enabled;
    cfg.hidden = hidden;
    TrainResult r = train(read_manifest_csv(train_csv, Split::kTrain),
                          read_manifest_csv(val_csv, Split::kVal), cfg);
    py::list history;
    for (const auto& e : r.history.epochs) {
      history.append(py::make_tuple(e.epoch, e.train_loss, e.val_mse, e.val_lcc, e.val_srcc));
    }
    return py::make_tuple(r.params, history, r.history.best_epoch);
  }, py::arg("train_csv"), py::arg("val_csv"), py::arg("max_epochs") = 15,
     py::arg("patience") = 3, py::arg("lr") = 1e-3, py::arg("clip_norm") = 5.0,
     py::arg("shuffle_seed") = 1, py::arg("forget_gate_bias") = -3.0,
     py::arg("alpha_enabled") = true, py::arg("hidden") = 100,
     "Returns (params, history rows, best_epoch)");

  m.def("evaluate", [](const ModelParams& params, const std::filesystem::path& manifest_csv,
                       bool clamp) {
    EvalReport r = evaluate(params, read_manifest_csv(manifest_csv, Split::kTest),
                            {StftConfig{}, clamp});
    py::dict d;
    d["mse"] = r.mse;
    d["lcc"] = r.lcc;
    d["srcc"] = r.srcc;
    d["n"] = r.n;
    d["clean_frame_variance"] = r.clean_frame_variance;
    d["excluded"] = r.excluded;
    return d;
  }, py::arg("params"), py::arg("manifest_csv"), py::arg("clamp") = false);

  m.attr("SAMPLE_RATE_HZ") = kCorpusSampleRateHz;
  m.attr("QUALITY_FLOOR") = kQualityFloor;
  m.attr("QUALITY_MAX") = kQualityMax;
}
