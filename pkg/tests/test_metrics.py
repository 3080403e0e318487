from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from optscore.errors import DimensionMismatch
from optscore.population import sparse_model
from optscore.simulate import sample_dataset
from optscore.verify.metrics import (
    covariance_deviation,
    estimation_error,
    in_sample_error,
    inf2_norm,
    norm12,
    prediction_risk,
    residual_matrix,
    xte_norm,
)

finite = st.floats(-100, 100, allow_nan=False)


def test_inf2_norm_value():
    assert inf2_norm([[3.0, 4.0], [0.0, 0.0]]) == 5.0
    with pytest.raises(ValueError):
        inf2_norm(np.zeros((0, 2)))


@settings(max_examples=100, deadline=None)
@given(arrays(float, (5, 3), elements=finite), arrays(float, (5, 3), elements=finite), finite)
def test_norm_properties(A, B, c):
    for f in (norm12, inf2_norm):
        assert f(A + B) <= f(A) + f(B) + 1e-9 * (1 + f(A) + f(B))
        assert f(c * A) == pytest.approx(abs(c) * f(A), rel=1e-12, abs=1e-12)
    # ||A||_inf,2 <= ||A||_F <= ||A||_1,2 <= p ||A||_inf,2
    fro = np.linalg.norm(A)
    tol = 1e-9 * (1 + fro)
    assert inf2_norm(A) <= fro + tol <= norm12(A) + 2 * tol
    assert norm12(A) <= 5 * inf2_norm(A) + tol


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6))
def test_risk_sandwiched_by_eigenvalues(seed):
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((6, 6))
    S = G @ G.T + 0.1 * np.eye(6)
    D = rng.standard_normal((6, 2))
    eig = np.linalg.eigvalsh(S)
    r = prediction_risk(D, np.zeros((6, 2)), S)
    e = estimation_error(D, np.zeros((6, 2)))
    assert eig[0] * e * (1 - 1e-10) <= r <= eig[-1] * e * (1 + 1e-10)


def test_in_sample_and_residual():
    X = np.array([[1.0, 0.0], [-1.0, 2.0], [0.0, -2.0]])
    B = np.array([[1.0], [0.5]])
    assert in_sample_error(X, B, np.zeros_like(B)) == pytest.approx(np.sum((X @ B) ** 2) / 3)
    Y = np.ones((3, 1))
    np.testing.assert_allclose(residual_matrix(X, Y, B), Y - X @ B)
    assert xte_norm(X, Y - X @ B) == pytest.approx(inf2_norm(X.T @ (Y - X @ B)) / 3)


def test_shape_errors():
    with pytest.raises(DimensionMismatch):
        prediction_risk(np.zeros((3, 2)), np.zeros((3, 1)), np.eye(3))
    with pytest.raises(DimensionMismatch):
        prediction_risk(np.zeros((3, 2)), np.zeros((3, 2)), np.eye(2))
    with pytest.raises(DimensionMismatch):
        residual_matrix(np.zeros((3, 2)), np.zeros((4, 1)), np.zeros((2, 1)))


def test_covariance_deviation_shrinks_like_root_n():
    m = sparse_model(5, 3, 2)
    small = np.mean([covariance_deviation(sample_dataset(m, 400, (1, r)).X, m.derived.sigma_t) for r in range(100)])
    big = np.mean([covariance_deviation(sample_dataset(m, 1600, (2, r)).X, m.derived.sigma_t) for r in range(100)])
    assert 0.4 <= big / small <= 0.6
