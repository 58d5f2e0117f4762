import json
import subprocess
import sys

import pytest

from enose.acquisition import serialize_frame
from enose.cli import main
from enose.core import SensorFrame, load_dataset
from enose.nn import load_model


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """A dataset at overlap 0.5 and a 7-3-5 model trained on it with default training settings."""
    d = tmp_path_factory.mktemp("cli")
    assert main(["simulate", "--overlap", "0.5", "--out", str(d / "train.csv")]) == 0
    assert main(["train", str(d / "train.csv"), "--hidden", "3", "--out", str(d / "m3.txt")]) == 0
    return d


def test_simulate_default(tmp_path, capsys):
    out = tmp_path / "d.csv"
    code, _, _ = run(capsys, "simulate", "--seed", 7, "--out", out)
    assert code == 0
    ds = load_dataset(out)
    assert len(ds) == 200
    manifest = json.loads((tmp_path / "d.csv.manifest.json").read_text())
    assert manifest["command"] == "simulate" and manifest["seed"] == 7
    first = out.read_bytes()
    run(capsys, "simulate", "--seed", 7, "--out", out)
    assert out.read_bytes() == first


def test_simulate_config_missing_key(tmp_path, capsys):
    conf = tmp_path / "sim.conf"
    conf.write_text("seed = 1\nsamples_per_class = 2\noverlap_factor = 1\n"
                    "humidity_mean = 50\nhumidity_sigma = 8\ntemperature_mean = 25\n")
    code, _, err = run(capsys, "simulate", "--config", conf, "--out", tmp_path / "d.csv")
    assert code == 1
    assert "temperature_sigma" in err


def test_simulate_config_file(tmp_path, capsys):
    conf = tmp_path / "sim.conf"
    conf.write_text("seed = 1\nsamples_per_class = 2\noverlap_factor = 1\n"
                    "humidity_mean = 50\nhumidity_sigma = 8\ntemperature_mean = 25\ntemperature_sigma = 3\n")
    code, _, _ = run(capsys, "simulate", "--config", conf, "--out", tmp_path / "d.csv")
    assert code == 0 and len(load_dataset(tmp_path / "d.csv")) == 10


def test_train_default_hyperparameters(workdir):
    lines = (workdir / "m3.txt.report.txt").read_text().splitlines()
    assert lines[0].startswith("architecture 7-3-5")
    assert lines[1] == "learning_rate 0.01 momentum 0.9 epochs 1000 seed 7"
    assert len(lines) == 4 + 1000
    manifest = json.loads((workdir / "m3.txt.manifest.json").read_text())
    assert manifest["config"]["train_config"] == {
        "learning_rate": 0.01, "momentum": 0.9, "epochs": 1000, "seed": 7, "init_half_range": 0.5}


@pytest.mark.parametrize("hidden", [3, 10])
def test_train_architectures(tmp_path, capsys, workdir, hidden):
    out = tmp_path / f"m{hidden}.txt"
    code, stdout, _ = run(capsys, "train", workdir / "train.csv", "--hidden", hidden, "--epochs", 3, "--out", out)
    assert code == 0 and f"7-{hidden}-5" in stdout
    net, _ = load_model(out)
    assert net.w1.shape == (hidden, 7) and net.w2.shape == (5, hidden)


def test_train_deterministic(tmp_path, capsys, workdir):
    for name in ("a.txt", "b.txt"):
        run(capsys, "train", workdir / "train.csv", "--epochs", 20, "--lr", 0.05, "--out", tmp_path / name)
    assert (tmp_path / "a.txt").read_bytes() == (tmp_path / "b.txt").read_bytes()
    assert (tmp_path / "a.txt.report.txt").read_bytes() == (tmp_path / "b.txt.report.txt").read_bytes()


def test_train_bad_dataset(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("mq2,mq135,mq3,tgs2610,tgs2611,humidity,temperature,label\n1,2,3\n")
    code, _, err = run(capsys, "train", bad, "--out", tmp_path / "m.txt")
    assert code == 1 and "line 2" in err
    code, _, err = run(capsys, "train", tmp_path / "missing.csv", "--out", tmp_path / "m.txt")
    assert code == 1


def test_evaluate_own_training_set(workdir, capsys):
    kv = workdir / "eval.kv"
    code, out, _ = run(capsys, "evaluate", workdir / "m3.txt", workdir / "train.csv", "--out", kv)
    assert code == 0
    values = dict(l.split(" = ", 1) for l in kv.read_text().splitlines() if " = " in l)
    assert float(values["accuracy"]) >= 0.99
    assert int(values["samples"]) == 200
    block = kv.read_text().split("confusion =\n")[1].splitlines()
    assert sum(int(v) for row in block for v in row.split()) == 200


@pytest.mark.parametrize("threshold", ["0", "1", "1.5", "-0.2", "abc"])
def test_evaluate_threshold_usage_error(workdir, capsys, threshold):
    with pytest.raises(SystemExit) as err:
        main(["evaluate", str(workdir / "m3.txt"), str(workdir / "train.csv"), "--threshold", threshold])
    assert err.value.code == 2


def test_evaluate_corrupt_model(tmp_path, workdir, capsys):
    broken = tmp_path / "broken.txt"
    broken.write_bytes((workdir / "m3.txt").read_bytes()[:-20])
    code, _, err = run(capsys, "evaluate", broken, workdir / "train.csv")
    assert code == 1 and "truncated" in err


def test_compare_small(tmp_path, capsys, workdir):
    out = tmp_path / "cmp.kv"
    code, text, _ = run(capsys, "compare", workdir / "train.csv", "--epochs", 5, "--out", out)
    assert code == 0
    assert "7-3-5" in text and "7-10-5" in text
    kv = out.read_text()
    assert "z3.weight_multiply_adds = 36" in kv and "z10.weight_multiply_adds = 120" in kv
    with pytest.raises(SystemExit):
        main(["compare", str(workdir / "train.csv"), "--hidden", "3"])


def test_stream_noiseless_is_fully_correct(tmp_path, capsys, workdir):
    run(capsys, "simulate", "--overlap", 0, "--seed", 11, "--wire", "--out", tmp_path / "s.wire")
    run(capsys, "simulate", "--overlap", 0, "--seed", 11, "--out", tmp_path / "s.csv")
    truth = load_dataset(tmp_path / "s.csv")
    code, out, err = run(capsys, "stream", workdir / "m3.txt", tmp_path / "s.wire")
    assert code == 0 and err == ""
    lines = out.splitlines()
    assert len(lines) == len(truth)
    for line, sample in zip(lines, truth):
        fields = dict(f.split("=") for f in line.split())
        assert fields["class"] == sample.label.label
        assert 0 < float(fields["confidence"]) <= 1


def test_stream_corrupt_line(tmp_path, capsys, workdir):
    frames = [serialize_frame(i, SensorFrame((0.5, 0.5, 0.4, 0.5, 0.5, 50, 25))) for i in range(4)]
    frames[1] = frames[1].replace(b"0.500", b"0.600", 1)
    path = tmp_path / "s.wire"
    path.write_bytes(b"".join(frames))
    code, out, err = run(capsys, "stream", workdir / "m3.txt", path)
    assert code == 0
    assert [l.split()[0] for l in out.splitlines()] == ["seq=0", "seq=2", "seq=3"]
    assert err.count("skip") == 1 and "gap: 1 frame(s) missing" in err
    assert "skip" not in out and "gap" not in out


def test_stream_stdin_empty(workdir):
    proc = subprocess.run([sys.executable, "-m", "enose", "stream", str(workdir / "m3.txt")],
                          input=b"", capture_output=True)
    assert proc.returncode == 0 and proc.stdout == b""


def test_stream_stdin_frames(workdir):
    data = serialize_frame(0, SensorFrame((0.5, 0.5, 0.4, 0.5, 0.5, 50, 25)))
    proc = subprocess.run([sys.executable, "-m", "enose", "stream", str(workdir / "m3.txt"), "-"],
                          input=data + b"garbage\n", capture_output=True)
    assert proc.returncode == 0
    assert proc.stdout == b"seq=0 class=none confidence=" + proc.stdout.split(b"confidence=")[1]
    assert b"skip #1" in proc.stderr


def test_stream_unreadable_model(tmp_path, capsys):
    code, _, _ = run(capsys, "stream", tmp_path / "nope.txt", "-")
    assert code == 1


def test_rerun_from_manifest(tmp_path, capsys, monkeypatch):
    monkeypatch.chdir(tmp_path)
    run(capsys, "simulate", "--seed", 3, "--samples-per-class", 5, "--out", "d.csv")
    first = (tmp_path / "d.csv").read_bytes()
    (tmp_path / "d.csv").unlink()
    code, _, _ = run(capsys, "rerun", "d.csv.manifest.json")
    assert code == 0 and (tmp_path / "d.csv").read_bytes() == first
