# Copyright 2026 The QualityNet Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Non-intrusive speech quality assessment.

A BLSTM maps a magnitude spectrogram to per-frame quality scores whose
global average is the utterance score. The heavy lifting lives in the
C++ extension; this package re-exports it.
"""

from qualitynet._qualitynet import (  # noqa: F401
    QUALITY_FLOOR,
    QUALITY_MAX,
    SAMPLE_RATE_HZ,
    ModelParams,
    alpha_weight,
    build_corpus,
    evaluate,
    forward,
    frame_count,
    global_snr_db,
    grad_check,
    init_model,
    load_checkpoint,
    magnitude_spectrogram,
    mix_at_snr,
    mse,
    pearson_lcc,
    proxy_quality,
    read_wav,
    save_checkpoint,
    spearman_srcc,
    spectral_subtract,
    synth_noise,
    synth_speechlike,
    train,
    utterance_loss,
    write_wav,
)

__all__ = [
    "QUALITY_FLOOR",
    "QUALITY_MAX",
    "SAMPLE_RATE_HZ",
    "ModelParams",
    "alpha_weight",
    "build_corpus",
    "evaluate",
    "forward",
    "frame_count",
    "global_snr_db",
    "grad_check",
    "init_model",
    "load_checkpoint",
    "magnitude_spectrogram",
    "mix_at_snr",
    "mse",
    "pearson_lcc",
    "proxy_quality",
    "read_wav",
    "save_checkpoint",
    "spearman_srcc",
    "spectral_subtract",
    "synth_noise",
    "synth_speechlike",
    "train",
    "utterance_loss",
    "write_wav",
]

__version__ = "0.1.0"
