from __future__ import annotations

import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
import yaml

from optscore import cli
from optscore.io import read_fit_report, read_matrix, write_matrix


def _write_config(path: Path, cfg: dict) -> Path:
    path.write_text(yaml.safe_dump(cfg, sort_keys=False))
    return path


def _design(tmp_path, n=10, p=3, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    labels = np.array([1, 2] * (n // 2))
    write_matrix(tmp_path / "X.csv", X)
    write_matrix(tmp_path / "labels.csv", labels[:, None], header=["label"])
    return X, labels


def test_validate_reports_eta(tmp_path, capsys):
    cfg = _write_config(tmp_path / "c.yaml", {"experiment": "concentration", "seed": 1, "eta": 1.5,
                                               "model": {"generator": "zero", "p": 5, "K": 2}, "grid": {"n": [50]}})
    assert cli.main(["validate", str(cfg)]) == cli.EXIT_CONFIG
    assert "eta must lie in (0,1)" in capsys.readouterr().err


def test_validate_reports_missing_model_file(tmp_path, capsys):
    cfg = _write_config(tmp_path / "c.yaml", {"experiment": "simulate", "seed": 1, "model": {"file": "nope.yaml"},
                                               "grid": {"n": [20]}})
    assert cli.main(["validate", str(cfg)]) == cli.EXIT_CONFIG
    err = capsys.readouterr().err
    assert "model file not found" in err and str((tmp_path / "nope.yaml").resolve()) in err


def test_validate_ok_and_missing_seed(tmp_path, capsys):
    good = {"experiment": "simulate", "seed": 1, "model": {"generator": "sparse", "p": 4, "K": 3, "s": 2},
            "grid": {"n": [30]}}
    assert cli.main(["validate", str(_write_config(tmp_path / "g.yaml", good))]) == cli.EXIT_OK
    assert capsys.readouterr().out.strip() == "ok"
    bad = dict(good)
    bad.pop("seed")
    assert cli.validate(_write_config(tmp_path / "b.yaml", bad)) == ["seed is required (no entropy fallback)"]


def test_fit_at_lambda_max_is_zero(tmp_path):
    _design(tmp_path)
    cfg = _write_config(tmp_path / "fit.yaml", {"experiment": "fit", "seed": 0, "lambda": "lambda_max",
                                                 "data": {"X": "X.csv", "labels": "labels.csv"}, "output": "out"})
    assert cli.main(["run", str(cfg), "--quiet"]) == cli.EXIT_OK
    rep = read_fit_report(tmp_path / "out" / "fit_report.yaml")
    assert not np.any(rep["b_hat"]) and rep["b_hat"].shape == (3, 1)
    assert not np.any(read_matrix(tmp_path / "out" / "b_hat.csv"))
    assert (tmp_path / "out" / "summary.txt").is_file()


def test_exit_codes(tmp_path, capsys):
    broken = tmp_path / "broken.yaml"
    broken.write_text("experiment: [unclosed\n")
    assert cli.main(["run", str(broken)]) == cli.EXIT_CONFIG
    assert cli.main(["validate", str(tmp_path / "absent.yaml")]) == cli.EXIT_IO
    _design(tmp_path)
    (tmp_path / "X.csv").write_text("1,2\nx,y,z\n")
    cfg = _write_config(tmp_path / "fit.yaml", {"experiment": "fit", "seed": 0,
                                                 "data": {"X": "X.csv", "labels": "labels.csv"}})
    assert cli.main(["run", str(cfg), "--quiet"]) == cli.EXIT_IO
    assert "x" in capsys.readouterr().err


def test_certificate_violation_exit_code(tmp_path, monkeypatch, capsys):
    from optscore.verify import experiments

    def fake(*a, **k):
        rep = experiments.ExperimentReport("certify", (), 1, ())
        rep.extras.update({"total_violations": 1, "hypothesis_misses": {}, "violations": {"fast.l12": 1},
                           "failures": [{"replicate": 0, "bound": "fast.l12", "lhs": 2.0, "rhs": 1.0}]})
        return rep

    monkeypatch.setattr(experiments, "certificate_experiment", fake)
    cfg = _write_config(tmp_path / "c.yaml", {"experiment": "certify", "seed": 0, "reps": 1,
                                               "model": {"generator": "sparse", "p": 4, "K": 2, "s": 1},
                                               "grid": {"n": [20]}, "output": "out"})
    assert cli.main(["run", str(cfg), "--quiet"]) == cli.EXIT_VIOLATION
    assert "fast.l12" in capsys.readouterr().err


def test_rerun_is_byte_identical_and_manifest_closes(tmp_path):
    cfg = _write_config(tmp_path / "conc.yaml", {"experiment": "concentration", "seed": 5,
                                                  "model": {"generator": "zero", "p": [10, 20], "K": [2, 5]},
                                                  "grid": {"n": [100, 400]}, "reps": 50, "output": "a"})
    assert cli.main(["run", str(cfg), "--quiet", "--threads", "1"]) == 0
    assert cli.main(["run", str(cfg), "--quiet", "--threads", "3", "--output", str(tmp_path / "b")]) == 0
    for name in ("concentration.csv", "concentration_summary.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    manifest = tmp_path / "a" / "manifest.yaml"
    assert cli.validate(manifest) == []
    m = yaml.safe_load(manifest.read_text())
    assert m["provenance"]["results"]["C_used"] > 0
    assert cli.main(["run", str(manifest), "--quiet", "--output", str(tmp_path / "c")]) == 0
    assert (tmp_path / "a" / "concentration.csv").read_bytes() == (tmp_path / "c" / "concentration.csv").read_bytes()


def test_calibrated_constant_lands_in_manifest(tmp_path):
    cfg = _write_config(tmp_path / "sr.yaml", {"experiment": "slow-rate", "seed": 2, "C": "calibrate",
                                                "calibration": {"n": 100, "reps": 50},
                                                "model": {"generator": "decaying", "p": 10, "K": 3},
                                                "grid": {"n": [50, 100]}, "reps": 3, "output": "o"})
    assert cli.main(["run", str(cfg), "--quiet"]) == 0
    m = yaml.safe_load((tmp_path / "o" / "manifest.yaml").read_text())
    assert isinstance(m["C"], float) and "calibration" not in m
    assert cli.main(["run", str(tmp_path / "o" / "manifest.yaml"), "--quiet", "--output", str(tmp_path / "p")]) == 0
    assert (tmp_path / "o" / "slow-rate.csv").read_bytes() == (tmp_path / "p" / "slow-rate.csv").read_bytes()


def test_simulate_then_classify(tmp_path):
    sim = _write_config(tmp_path / "sim.yaml", {"experiment": "simulate", "seed": 3,
                                                 "model": {"generator": "sparse", "p": 5, "K": 3, "s": 2, "signal": 3.0},
                                                 "grid": {"n": [200]}, "output": "sim"})
    assert cli.main(["run", str(sim), "--quiet"]) == 0
    X = read_matrix(tmp_path / "sim" / "X.csv")
    meta = yaml.safe_load((tmp_path / "sim" / "dataset.yaml").read_text())
    write_matrix(tmp_path / "raw.csv", X + np.array(meta["column_means"]))
    cfg = _write_config(tmp_path / "cl.yaml", {"experiment": "classify", "seed": 0, "lambda": "lambda_max",
                                                "lambda_ratio": 0.1,
                                                "data": {"X": "raw.csv", "labels": "sim/labels.csv"},
                                                "test": {"X": "raw.csv", "labels": "sim/labels.csv"}, "output": "cl"})
    assert cli.main(["run", str(cfg), "--quiet"]) == 0
    m = yaml.safe_load((tmp_path / "cl" / "manifest.yaml").read_text())
    assert m["provenance"]["results"]["accuracy"] >= 0.9


def test_re_constant_identity(tmp_path):
    write_matrix(tmp_path / "Q.csv", np.eye(5))
    cfg = _write_config(tmp_path / "re.yaml", {"experiment": "re-constant", "seed": 0, "matrix": "Q.csv", "s": 2,
                                                "K": 3, "output": "re"})
    assert cli.main(["run", str(cfg), "--quiet"]) == 0
    assert "gamma,1.0" in (tmp_path / "re" / "re_constant.csv").read_text()


def test_module_entry_point(tmp_path):
    cfg = _write_config(tmp_path / "bad.yaml", {"experiment": "fit"})
    proc = subprocess.run([sys.executable, "-m", "optscore", "validate", str(cfg)], capture_output=True, text=True)
    assert proc.returncode == cli.EXIT_CONFIG
    assert "seed is required" in proc.stderr
