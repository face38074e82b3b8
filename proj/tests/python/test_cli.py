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

"""Subprocess tests for the qnet command-line tool."""

import json
import os
import subprocess

import pytest

CLI = os.environ.get("QNET_CLI")

pytestmark = pytest.mark.skipif(CLI is None, reason="QNET_CLI not set")


def run(*args, expect_rc=0):
    proc = subprocess.run([CLI, *map(str, args)], capture_output=True, text=True)
    assert proc.returncode == expect_rc, f"rc={proc.returncode}\n{proc.stdout}\n{proc.stderr}"
    return proc


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    out = tmp_path_factory.mktemp("corpus")
    run("synth", "--out", out, "--train", "10", "--val", "4", "--test", "4",
        "--seed", "5", "--min-dur", "1.0", "--max-dur", "1.2")
    return out


@pytest.fixture(scope="module")
def model(corpus, tmp_path_factory):
    out = tmp_path_factory.mktemp("model") / "model.qnet"
    run("train", "--manifest", corpus / "train.csv", "--val", corpus / "val.csv",
        "--out", out, "--epochs", "2", "--patience", "2", "--hidden", "8")
    return out


def test_synth_counts_and_determinism(corpus, tmp_path):
    train_csv = (corpus / "train.csv").read_text()
    assert train_csv.count("\n") == 11  # header + 10 rows
    assert train_csv.startswith("utterance_id,condition,audio_path,noise_kind,snr_db,label_q")
    combined = (corpus / "manifest.csv").read_text()
    assert combined.count("\n") == 19  # header + 18 rows

    rerun = tmp_path / "again"
    run("synth", "--out", rerun, "--train", "10", "--val", "4", "--test", "4",
        "--seed", "5", "--min-dur", "1.0", "--max-dur", "1.2")
    assert (rerun / "train.csv").read_text() == train_csv


def test_synth_requires_out():
    proc = subprocess.run([CLI, "synth", "--train", "5"], capture_output=True, text=True)
    assert proc.returncode != 0
    assert "--out" in proc.stderr or "--out" in proc.stdout


def test_train_writes_checkpoint_and_history(model):
    assert model.exists()
    history = model.with_name(model.name + ".history.csv").read_text()
    assert history.startswith("epoch,train_loss,val_mse,val_lcc,val_srcc")


def test_train_missing_manifest(tmp_path):
    proc = run("train", "--manifest", tmp_path / "nope.csv", "--val", tmp_path / "nope.csv",
               "--out", tmp_path / "m.qnet", expect_rc=1)
    assert "error" in proc.stderr


def test_eval_json(corpus, model, tmp_path):
    json_path = tmp_path / "report.json"
    scatter = tmp_path / "scatter.csv"
    proc = run("eval", "--model", model, "--manifest", corpus / "test.csv",
               "--json", json_path, "--scatter", scatter)
    report = json.loads(proc.stdout)
    assert report["n"] == 4
    assert "mse" in report
    assert json.loads(json_path.read_text()) == report
    lines = scatter.read_text().strip().splitlines()
    assert lines[0] == "utterance_id,condition,label_q,pred_q"
    assert len(lines) == 5


def test_eval_clamp_flag(corpus, model):
    proc = run("eval", "--model", model, "--manifest", corpus / "test.csv", "--clamp")
    report = json.loads(proc.stdout)
    assert report["n"] == 4


def test_eval_corrupt_checkpoint(corpus, tmp_path):
    bad = tmp_path / "bad.qnet"
    bad.write_bytes(b"not a checkpoint")
    proc = run("eval", "--model", bad, "--manifest", corpus / "test.csv", expect_rc=1)
    assert "corrupt checkpoint" in proc.stderr


def test_score_outputs_frame_csv(corpus, model, tmp_path):
    import qualitynet as qn
    wav = tmp_path / "probe.wav"
    qn.write_wav(qn.synth_speechlike(3, 1.5), wav)

    frames_csv = tmp_path / "frames.csv"
    proc = run("score", "--model", model, "--wav", wav, "--frames-out", frames_csv)
    score = float(proc.stdout.strip())
    lines = frames_csv.read_text().strip().splitlines()
    assert lines[0] == "frame_index,q_t"
    assert lines[1].startswith("1,")
    n_frames = qn.frame_count(24000)
    assert len(lines) == 1 + n_frames
    frame_scores = [float(line.split(",")[1]) for line in lines[1:]]
    assert abs(sum(frame_scores) / len(frame_scores) - score) < 1e-4


def test_score_rejects_short_wav(model, tmp_path):
    import qualitynet as qn
    wav = tmp_path / "tiny.wav"
    import numpy as np
    qn.write_wav(np.zeros(100) + 0.01, wav)
    run("score", "--model", model, "--wav", wav, expect_rc=1)


def test_gradcheck_passes_and_fault_injection_fails(tmp_path):
    proc = run("gradcheck", "--seed", "3", "--trials", "4")
    assert "max relative error" in proc.stdout

    run("gradcheck", "--trials", "0", expect_rc=1)
    run("gradcheck", "--seed", "3", "--trials", "1", "--inject-fault", expect_rc=1)


def test_config_file(corpus, tmp_path):
    cfg = tmp_path / "run.ini"
    out = tmp_path / "cfg_corpus"
    cfg.write_text(
        "[synth]\nout=%s\ntrain=6\nval=2\ntest=2\nseed=9\nmin-dur=1.0\nmax-dur=1.1\n" % out
    )
    run("--config", cfg, "synth")
    assert (out / "train.csv").exists()


def test_learning_curve_cli(corpus, tmp_path):
    out = tmp_path / "curve.csv"
    run("learning-curve", "--manifest", corpus / "train.csv", "--val", corpus / "val.csv",
        "--test", corpus / "test.csv", "--sizes", "2,4", "--out", out,
        "--epochs", "1", "--patience", "1", "--hidden", "4")
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "size,mse,lcc,srcc"
    assert len(lines) == 3


def test_ablate_cli(corpus, tmp_path):
    out = tmp_path / "ablate.csv"
    run("ablate", "--manifest", corpus / "train.csv", "--val", corpus / "val.csv",
        "--test", corpus / "test.csv", "--out", out,
        "--epochs", "1", "--patience", "1", "--hidden", "4")
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "arm,mse,lcc,srcc,clean_frame_variance"
    assert lines[1].startswith("without_constraint,")
    assert lines[2].startswith("with_constraint,")


def test_unknown_flag_rejected():
    proc = subprocess.run([CLI, "synth", "--out", "/tmp/x", "--bogus"], capture_output=True,
                          text=True)
    assert proc.returncode != 0
