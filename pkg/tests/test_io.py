from __future__ import annotations

import numpy as np
import pytest
import yaml

from optscore.io import (
    export_dataset,
    fit_report,
    fmt,
    load_model,
    matrix_to_csv,
    read_fit_report,
    read_matrix,
    save_model,
    write_matrix,
)
from optscore.population import sparse_model
from optscore.simulate import sample_dataset
from optscore.solver import Problem, fit, lambda_max


def test_fmt_round_trips_floats():
    for v in (0.1, 1e-300, -3.25, 1 / 3):
        assert float(fmt(v)) == v
    assert fmt(True) == "true" and fmt(np.int64(4)) == "4"


def test_matrix_round_trip(tmp_path):
    A = np.random.default_rng(0).standard_normal((4, 3))
    write_matrix(tmp_path / "a.csv", A, header=["a", "b", "c"])
    np.testing.assert_array_equal(read_matrix(tmp_path / "a.csv"), A)
    assert matrix_to_csv([[1.0, 2.0]]) == "1.0,2.0\n"
    (tmp_path / "bad.csv").write_text("1,2\n3\n")
    with pytest.raises(ValueError):
        read_matrix(tmp_path / "bad.csv")


def test_model_round_trip(tmp_path):
    m = sparse_model(5, 3, 2, block_rho=0.2, pi=[0.2, 0.3, 0.5])
    save_model(tmp_path / "m.yaml", m)
    back = load_model(tmp_path / "m.yaml")
    np.testing.assert_array_equal(back.means, m.means)
    np.testing.assert_array_equal(back.sigma_w, m.sigma_w)
    np.testing.assert_array_equal(back.pi, m.pi)


def test_fit_report_round_trip(tmp_path):
    ds = sample_dataset(sparse_model(6, 3, 2), 40, 0)
    res = fit(Problem(ds.X, ds.Y, 0.3 * lambda_max(ds.X, ds.Y)))
    (tmp_path / "r.yaml").write_text(fit_report(res))
    d = read_fit_report(tmp_path / "r.yaml")
    np.testing.assert_array_equal(d["b_hat"], res.b_hat)
    assert d["lambda"] == res.lam and d["converged"] is True


def test_export_dataset(tmp_path):
    ds = sample_dataset(sparse_model(3, 2, 1), 10, 4)
    meta = export_dataset(ds, tmp_path / "out")
    np.testing.assert_array_equal(read_matrix(tmp_path / "out" / "X.csv"), ds.X)
    np.testing.assert_array_equal(read_matrix(tmp_path / "out" / "labels.csv")[:, 0], ds.labels)
    assert yaml.safe_load((tmp_path / "out" / "dataset.yaml").read_text()) == meta
