"""Ground-truth Gaussian mixture and the population quantities it implies."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import linalg

from .errors import InvalidModel, RecenteredModelWarning, SingularCovariance
from .rng import stream
from .scores import population_scores

_COND_LIMIT = 1e12


@dataclass(frozen=True, eq=False)
class PopulationModel:
    """Class probabilities ``pi`` (K,), means (p, K) and within-class covariance (p, p).

    Means whose probability-weighted average is not zero are shifted to make
    it zero, with a :class:`RecenteredModelWarning`.
    """

    pi: np.ndarray
    means: np.ndarray
    sigma_w: np.ndarray

    def __post_init__(self):
        pi = np.asarray(self.pi, dtype=float).ravel()
        means = np.atleast_2d(np.asarray(self.means, dtype=float))
        sigma_w = np.atleast_2d(np.asarray(self.sigma_w, dtype=float))
        K = pi.size
        if K < 2:
            raise InvalidModel("need at least two classes")
        if np.any(pi <= 0) or np.any(pi >= 1) or abs(pi.sum() - 1.0) > 1e-10:
            raise InvalidModel("class probabilities must lie in (0, 1) and sum to one")
        if means.shape[1] != K:
            raise InvalidModel(f"means must be p x K with K={K}, got {means.shape}")
        p = means.shape[0]
        if sigma_w.shape != (p, p):
            raise InvalidModel(f"sigma_w must be {p} x {p}, got {sigma_w.shape}")
        if not np.allclose(sigma_w, sigma_w.T, rtol=0, atol=1e-12 * max(1.0, np.abs(sigma_w).max())):
            raise InvalidModel("sigma_w must be symmetric")
        sigma_w = (sigma_w + sigma_w.T) / 2
        try:
            np.linalg.cholesky(sigma_w)
        except np.linalg.LinAlgError:
            raise InvalidModel("sigma_w must be positive definite") from None
        mu = means @ pi
        if np.max(np.abs(mu)) > 1e-10:
            warnings.warn(
                f"overall mean is not zero (max |mu| = {np.max(np.abs(mu)):.3g}); recentering class means",
                RecenteredModelWarning,
                stacklevel=3,
            )
            means = means - mu[:, None]
        for name, value in (("pi", pi), ("means", means), ("sigma_w", sigma_w)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def K(self) -> int:
        return self.pi.size

    @property
    def p(self) -> int:
        return self.means.shape[0]

    @cached_property
    def chol_w(self) -> np.ndarray:
        """Lower Cholesky factor of sigma_w, computed once per model."""
        return np.linalg.cholesky(self.sigma_w)

    @cached_property
    def derived(self) -> "PopulationDerived":
        return derive(self)


@dataclass(frozen=True, eq=False)
class PopulationDerived:
    delta: np.ndarray
    sigma_t: np.ndarray
    b_star: np.ndarray
    tau: float
    support: np.ndarray
    eig_min: float
    eig_max: float

    @property
    def s(self) -> int:
        return int(self.support.size)


def contrast_matrix(model: PopulationModel) -> np.ndarray:
    """p x (K-1) matrix of weighted mean contrasts.

    Column r compares class r+1 against the pooled classes 1..r.
    """
    pi, M = model.pi, model.means
    K = model.K
    cum = np.cumsum(pi)
    delta = np.empty((model.p, K - 1))
    for r in range(1, K):
        diff = (M[:, :r] - M[:, [r]]) @ pi[:r]
        delta[:, r - 1] = np.sqrt(pi[r]) * diff / np.sqrt(cum[r - 1] * cum[r])
    return delta


def total_covariance(model: PopulationModel) -> np.ndarray:
    """Marginal covariance Sigma_W + sum_k pi_k mu_k mu_k'."""
    M = model.means
    return model.sigma_w + (M * model.pi) @ M.T


def population_coefficients(model: PopulationModel, sigma_t: np.ndarray | None = None) -> np.ndarray:
    """B* solving Sigma_T B* = Delta by a Cholesky solve."""
    if sigma_t is None:
        sigma_t = total_covariance(model)
    eig = np.linalg.eigvalsh(sigma_t)
    if eig[0] <= 0 or eig[-1] / eig[0] > _COND_LIMIT:
        raise SingularCovariance(f"total covariance condition number {eig[-1] / max(eig[0], 1e-300):.3g}")
    return linalg.cho_solve(linalg.cho_factor(sigma_t, lower=True), contrast_matrix(model))


def tau(model: PopulationModel) -> float:
    """max_j sqrt(sigma_jj + max_k mu_kj^2)."""
    return float(np.sqrt(np.max(np.diag(model.sigma_w) + np.max(model.means**2, axis=1))))


def support_of(b_star: np.ndarray, threshold: float | None = None) -> tuple[np.ndarray, int]:
    """Rows whose Euclidean norm exceeds ``threshold``.

    The default threshold is ``1e-10`` times the largest row norm.
    """
    norms = np.linalg.norm(np.atleast_2d(b_star), axis=1)
    if threshold is None:
        threshold = 1e-10 * (norms.max() if norms.size else 0.0)
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    S = np.flatnonzero(norms > threshold)
    return S, int(S.size)


def derive(model: PopulationModel) -> PopulationDerived:
    sigma_t = total_covariance(model)
    b_star = population_coefficients(model, sigma_t)
    S, _ = support_of(b_star)
    eig = np.linalg.eigvalsh(sigma_t)
    out = PopulationDerived(
        delta=contrast_matrix(model),
        sigma_t=sigma_t,
        b_star=b_star,
        tau=tau(model),
        support=S,
        eig_min=float(eig[0]),
        eig_max=float(eig[-1]),
    )
    for arr in (out.delta, out.sigma_t, out.b_star, out.support):
        arr.setflags(write=False)
    return out


# -- model builders ---------------------------------------------------------


def model_from_contrasts(directions, pi=None, sigma_w=None) -> PopulationModel:
    """Model whose contrast matrix equals ``directions`` exactly.

    Class means are ``directions @ theta_k`` where ``theta`` is the score
    matrix built from ``pi``; with those means the weighted mean is zero and
    ``Delta = directions``.
    """
    V = np.atleast_2d(np.asarray(directions, dtype=float))
    p, m = V.shape
    K = m + 1
    pi = np.full(K, 1.0 / K) if pi is None else np.asarray(pi, dtype=float)
    if pi.size != K:
        raise InvalidModel(f"directions have {m} columns so pi needs {K} entries")
    sigma_w = np.eye(p) if sigma_w is None else sigma_w
    theta = population_scores(pi)
    return PopulationModel(pi=pi, means=V @ theta.T, sigma_w=sigma_w)


def sparse_model(p: int, K: int, s: int, signal: float = 1.0, pi=None, seed=0, block_rho: float = 0.0) -> PopulationModel:
    """Row-sparse B* supported on the first ``s`` features.

    Sigma_W is block diagonal: an equicorrelated (``block_rho``) block over the
    support and identity elsewhere, so Sigma_T^{-1} Delta keeps the support.
    """
    if not 0 <= s <= p:
        raise InvalidModel("need 0 <= s <= p")
    rng = stream(seed, "sparse_model")
    V = np.zeros((p, K - 1))
    if s:
        dirs = rng.standard_normal((s, K - 1))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        V[:s] = signal * dirs
    sigma_w = np.eye(p)
    if s:
        sigma_w[:s, :s] = (1 - block_rho) * np.eye(s) + block_rho
    return model_from_contrasts(V, pi=pi, sigma_w=sigma_w)


def decaying_model(p: int, K: int, signal: float = 1.0, decay: float = 1.0, pi=None, seed=0) -> PopulationModel:
    """Dense model: every feature carries signal, row j scaled by ``j**-decay``."""
    rng = stream(seed, "decaying_model")
    dirs = rng.standard_normal((p, K - 1))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    scale = signal * np.arange(1, p + 1, dtype=float) ** (-decay)
    return model_from_contrasts(dirs * scale[:, None], pi=pi)


def null_model(p: int, K: int, pi=None, sigma_w=None) -> PopulationModel:
    """All class means zero, so B* = 0."""
    return model_from_contrasts(np.zeros((p, K - 1)), pi=pi, sigma_w=sigma_w)
