"""Norms and error measures appearing in the consistency bounds."""

from __future__ import annotations

import numpy as np

from ..errors import DimensionMismatch
from ..solver import norm12

__all__ = [
    "residual_matrix",
    "inf2_norm",
    "norm12",
    "xte_norm",
    "prediction_risk",
    "estimation_error",
    "covariance_deviation",
    "in_sample_error",
]


def _mat(A):
    A = np.asarray(A, dtype=float)
    return A[:, None] if A.ndim == 1 else A


def _same_shape(a, b):
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes differ: {a.shape} vs {b.shape}")


def residual_matrix(X, Y, b_star) -> np.ndarray:
    """E = Y - X B*."""
    X, Y, B = np.asarray(X, dtype=float), _mat(Y), _mat(b_star)
    if X.shape[0] != Y.shape[0] or X.shape[1] != B.shape[0] or Y.shape[1] != B.shape[1]:
        raise DimensionMismatch(f"X {X.shape}, Y {Y.shape}, B* {B.shape} do not conform")
    return Y - X @ B


def inf2_norm(A) -> float:
    """Largest row Euclidean norm."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.size == 0:
        raise ValueError("empty matrix")
    return float(np.linalg.norm(A, axis=1).max())


def xte_norm(X, E) -> float:
    """n^{-1} ||X'E||_{inf,2}, the quantity lambda has to dominate."""
    X, E = np.asarray(X, dtype=float), _mat(E)
    return inf2_norm(X.T @ E) / X.shape[0]


def prediction_risk(b_hat, b_star, sigma_t) -> float:
    """Tr{(B_hat - B*)' Sigma_T (B_hat - B*)}."""
    D = _mat(b_hat) - _mat(b_star) if np.shape(b_hat) == np.shape(b_star) else None
    if D is None:
        raise DimensionMismatch(f"shapes differ: {np.shape(b_hat)} vs {np.shape(b_star)}")
    S = np.asarray(sigma_t, dtype=float)
    if S.shape != (D.shape[0], D.shape[0]):
        raise DimensionMismatch(f"sigma_t must be {D.shape[0]} square, got {S.shape}")
    # clip tiny negative round-off; the form is PSD
    return max(float(np.einsum("ij,ik,kj->", D, S, D)), 0.0)


def estimation_error(b_hat, b_star) -> float:
    """||B_hat - B*||_F^2."""
    a, b = _mat(b_hat), _mat(b_star)
    _same_shape(a, b)
    return float(np.sum((a - b) ** 2))


def in_sample_error(X, b_hat, b_star) -> float:
    """n^{-1} ||X (B_hat - B*)||_F^2."""
    X = np.asarray(X, dtype=float)
    a, b = _mat(b_hat), _mat(b_star)
    _same_shape(a, b)
    XD = X @ (a - b)
    return float(np.vdot(XD, XD) / X.shape[0])


def covariance_deviation(X, sigma_t) -> float:
    """||n^{-1} X'X - Sigma_T||_inf (largest absolute entry)."""
    X = np.asarray(X, dtype=float)
    S = np.asarray(sigma_t, dtype=float)
    if S.shape != (X.shape[1], X.shape[1]):
        raise DimensionMismatch(f"sigma_t must be {X.shape[1]} square, got {S.shape}")
    return float(np.max(np.abs(X.T @ X / X.shape[0] - S)))
