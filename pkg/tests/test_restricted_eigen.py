from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from optscore.errors import BadParameter, DimensionMismatch, TooLarge
from optscore.verify.restricted_eigen import group_l1_ball_projection, re_constant


def test_identity_is_exactly_one():
    rep = re_constant(np.eye(6), s=2, K=3)
    assert rep.gamma_estimate == 1.0
    assert rep.certified
    assert rep.supports_probed == 15


def test_diagonal_matrix():
    d = np.array([2.0, 0.5, 1.5, 3.0, 1.0])
    rep = re_constant(np.diag(d), s=2, K=3, seed=1)
    assert rep.gamma_estimate == pytest.approx(1 / 0.25, rel=1e-6)
    assert 1 in rep.worst_support


def test_permutation_invariance():
    rng = np.random.default_rng(4)
    Q = rng.standard_normal((30, 7)) / np.sqrt(30)
    perm = rng.permutation(7)
    a = re_constant(Q, s=2, K=3, seed=0).gamma_estimate
    b = re_constant(Q[:, perm], s=2, K=3, seed=0).gamma_estimate
    assert a == pytest.approx(b, rel=1e-6)


def test_bounded_by_smallest_eigenvalue_and_support_block():
    rng = np.random.default_rng(5)
    Q = rng.standard_normal((40, 8)) / np.sqrt(40)
    G = Q.T @ Q
    g = re_constant(Q, s=2, K=2, seed=0).gamma_estimate
    # the cone contains A supported on S, so gamma >= 1/lambda_min(G_SS); and gamma <= 1/lambda_min(G)
    worst_block = max(1 / np.linalg.eigvalsh(G[np.ix_(S, S)])[0] for S in [(i, j) for i in range(8) for j in range(i + 1, 8)])
    assert worst_block * (1 - 1e-9) <= g <= 1 / np.linalg.eigvalsh(G)[0] * (1 + 1e-9)


def test_rank_deficient_gives_infinity():
    Q = np.ones((3, 4))
    rep = re_constant(Q, s=1, K=2)
    assert rep.gamma_estimate == np.inf
    assert not rep.certified


def test_probes_in_and_out_of_cone():
    Q = np.diag([1.0, 2.0, 2.0])
    base = re_constant(Q, s=1, K=2, c=0.0).gamma_estimate
    assert base == pytest.approx(1.0)
    # a probe outside the cone (c = 0 allows nothing off the support) is ignored
    out = re_constant(Q, s=1, K=2, c=0.0, probes=[(np.array([[0.0], [1.0], [1.0]]), [0])]).gamma_estimate
    assert out == pytest.approx(base)


def test_sampled_method_and_limits():
    rng = np.random.default_rng(6)
    Q = rng.standard_normal((60, 20)) / np.sqrt(60)
    rep = re_constant(Q, s=2, K=2, method="sampled-cone", n_supports=30, iterations=100)
    assert not rep.certified and rep.supports_probed == 30
    with pytest.raises(TooLarge):
        re_constant(Q, s=2, K=2)
    with pytest.raises(BadParameter):
        re_constant(Q, s=0)
    with pytest.raises(BadParameter):
        re_constant(Q, restarts=5)
    with pytest.raises(BadParameter):
        re_constant(Q, method="guess")
    with pytest.raises(BadParameter):
        re_constant()
    with pytest.raises(DimensionMismatch):
        re_constant(gram=np.ones((2, 3)))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6), st.floats(0.01, 5.0))
def test_ball_projection(seed, radius):
    rng = np.random.default_rng(seed)
    V = rng.standard_normal((6, 2, 3))
    P = group_l1_ball_projection(V, radius)
    norms = np.linalg.norm(P, axis=1).sum(axis=0)
    assert np.all(norms <= radius * (1 + 1e-9))
    # projection of each slice is at least as close as any sampled feasible point
    for b in range(3):
        d = np.linalg.norm(P[:, :, b] - V[:, :, b])
        for _ in range(20):
            W = rng.standard_normal((6, 2))
            W *= radius * rng.uniform() / np.linalg.norm(W, axis=1).sum()
            assert d <= np.linalg.norm(W - V[:, :, b]) + 1e-9
