from __future__ import annotations

import numpy as np
import pytest

from optscore.errors import EmptyClassAfterRetries, InvalidModel
from optscore.population import PopulationModel, sparse_model
from optscore.scores import verify_score_constraints
from optscore.simulate import center_columns, holdout_risk_estimate, sample_dataset
from optscore.verify.metrics import prediction_risk


def test_same_seed_same_data():
    m = sparse_model(6, 3, 2)
    a = sample_dataset(m, 50, (7, 1))
    b = sample_dataset(m, 50, (7, 1))
    c = sample_dataset(m, 50, (7, 2))
    np.testing.assert_array_equal(a.X, b.X)
    np.testing.assert_array_equal(a.labels, b.labels)
    assert not np.array_equal(a.X, c.X)
    assert a.seed == (7, 1)


def test_dataset_is_centered_and_scored():
    ds = sample_dataset(sparse_model(5, 4, 2), 80, 3)
    np.testing.assert_allclose(ds.X.mean(axis=0), 0, atol=1e-12)
    assert verify_score_constraints(ds.theta, ds.Z).passed
    np.testing.assert_allclose(ds.Y, ds.theta.theta[ds.labels - 1])
    assert (ds.n, ds.p, ds.K) == (80, 5, 4)


def test_large_sample_covariance_close_to_sigma_t():
    m = sparse_model(5, 3, 3, block_rho=0.3)
    ds = sample_dataset(m, 10_000, 0)
    emp = ds.X.T @ ds.X / ds.n
    assert np.abs(emp - m.derived.sigma_t).max() <= 0.1


def test_class_frequencies():
    m = PopulationModel(pi=[0.2, 0.3, 0.5], means=np.zeros((2, 3)), sigma_w=np.eye(2))
    ds = sample_dataset(m, 20_000, 1)
    freq = np.bincount(ds.labels, minlength=4)[1:] / ds.n
    np.testing.assert_allclose(freq, m.pi, atol=0.015)
    st = sample_dataset(m, 101, 1, stratified=True)
    np.testing.assert_array_equal(np.bincount(st.labels, minlength=4)[1:], [20, 30, 51])


def test_empty_class_retries_exhausted():
    m = PopulationModel(pi=[1 - 1e-9, 1e-9], means=np.zeros((1, 2)), sigma_w=[[1.0]])
    with pytest.raises(EmptyClassAfterRetries):
        sample_dataset(m, 5, 0)


def test_invalid_inputs():
    with pytest.raises(InvalidModel):
        sample_dataset("model", 10, 0)
    with pytest.raises(ValueError):
        sample_dataset(sparse_model(3, 4, 1), 3, 0)
    with pytest.raises(ValueError):
        center_columns(np.zeros(3))


def test_holdout_risk_first_coordinate():
    m = sparse_model(4, 2, 2, block_rho=0.3)
    b_star = m.derived.b_star
    diff = np.zeros_like(b_star)
    diff[0, 0] = 1.0
    exact = m.derived.sigma_t[0, 0]
    est, se = holdout_risk_estimate(m, b_star + diff, b_star, 100_000, 5, return_se=True)
    assert abs(est - exact) <= 0.05 * exact
    assert abs(est - exact) <= 3 * se


def test_holdout_risk_matches_trace_form():
    m = sparse_model(6, 3, 3, seed=4)
    rng = np.random.default_rng(0)
    b_hat = m.derived.b_star + 0.3 * rng.standard_normal(m.derived.b_star.shape)
    exact = prediction_risk(b_hat, m.derived.b_star, m.derived.sigma_t)
    est, se = holdout_risk_estimate(m, b_hat, m.derived.b_star, 50_000, 9, return_se=True)
    assert abs(est - exact) <= 3 * se
    assert holdout_risk_estimate(m, m.derived.b_star, m.derived.b_star, 10, 0) == 0.0
    with pytest.raises(InvalidModel):
        holdout_risk_estimate(m, np.zeros((2, 2)), np.zeros((2, 2)), 10, 0)
