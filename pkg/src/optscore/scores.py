"""Class indicators and the closed-form optimal score matrix.

For class counts ``n_1, ..., n_K`` the score matrix has K-1 columns; column
``l`` holds the same positive value in rows ``1..l``, a negative value in row
``l+1`` and zeros below. Any score matrix satisfying the two constraints

    Theta' Z' Z Theta = n I,     Theta' Z' Z 1 = 0

gives the same penalized fit up to an orthogonal rotation of the
coefficients, so this particular one is used throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadLabel, DimensionMismatch, EmptyClass, TooFewClasses


@dataclass(frozen=True)
class ClassIndicator:
    """One-hot class membership.

    Attributes
    ----------
    Z : ndarray of shape (n, K)
    class_counts : ndarray of shape (K,)
    n : int
    """

    Z: np.ndarray
    class_counts: np.ndarray
    n: int

    @property
    def K(self) -> int:
        return self.Z.shape[1]

    @property
    def labels(self) -> np.ndarray:
        return np.argmax(self.Z, axis=1) + 1


@dataclass(frozen=True)
class ScoreMatrix:
    theta: np.ndarray

    @property
    def K(self) -> int:
        return self.theta.shape[0]


@dataclass(frozen=True)
class ScoreCertificate:
    max_orthogonality_violation: float
    max_centering_violation: float
    passed: bool


def indicator_matrix(labels, K: int) -> ClassIndicator:
    """Build Z from integer labels in ``1..K``.

    Raises
    ------
    BadLabel
        If a label falls outside ``1..K`` or is not an integer.
    EmptyClass
        If some class in ``1..K`` has no samples.
    """
    labels = np.asarray(labels)
    if labels.ndim != 1:
        raise DimensionMismatch("labels must be a 1-d vector")
    if labels.size and not np.all(np.equal(np.mod(labels, 1), 0)):
        raise BadLabel("labels must be integers")
    labels = labels.astype(int)
    if np.any((labels < 1) | (labels > K)):
        bad = labels[(labels < 1) | (labels > K)][0]
        raise BadLabel(f"label {bad} outside 1..{K}")
    n = labels.size
    Z = np.zeros((n, K))
    Z[np.arange(n), labels - 1] = 1.0
    counts = Z.sum(axis=0).astype(int)
    missing = np.flatnonzero(counts == 0)
    if missing.size:
        raise EmptyClass(f"class {missing[0] + 1} has no samples")
    return ClassIndicator(Z=Z, class_counts=counts, n=n)


def _score_columns(weights: np.ndarray, total: float) -> np.ndarray:
    # shared by integer counts and by class probabilities (total = 1)
    K = weights.size
    cum = np.cumsum(weights)
    theta = np.zeros((K, K - 1))
    for l in range(1, K):
        head, head_next, nxt = cum[l - 1], cum[l], weights[l]
        theta[:l, l - 1] = np.sqrt(total * nxt / (head * head_next))
        theta[l, l - 1] = -np.sqrt(total * head / (nxt * head_next))
    return theta


def build_score_matrix(class_counts) -> ScoreMatrix:
    """Closed-form K x (K-1) score matrix for the given class sizes.

    For two classes this is ``(sqrt(n2/n1), -sqrt(n1/n2))``.
    """
    counts = np.asarray(class_counts, dtype=float)
    if counts.ndim != 1 or counts.size < 2:
        raise TooFewClasses("need at least two classes")
    if np.any(counts <= 0):
        raise EmptyClass(f"class {int(np.flatnonzero(counts <= 0)[0]) + 1} is empty")
    return ScoreMatrix(_score_columns(counts, counts.sum()))


def population_scores(pi) -> np.ndarray:
    """Score matrix built from class probabilities instead of counts.

    Satisfies ``Theta' diag(pi) Theta = I`` and ``Theta' pi = 0``.
    """
    pi = np.asarray(pi, dtype=float)
    return _score_columns(pi, 1.0)


def verify_score_constraints(theta, Z: ClassIndicator, tol: float | None = None) -> ScoreCertificate:
    """Check both score constraints; ``tol`` defaults to ``1e-10 * n``."""
    T = theta.theta if isinstance(theta, ScoreMatrix) else np.asarray(theta, dtype=float)
    Zm = Z.Z
    if T.shape[0] != Zm.shape[1]:
        raise DimensionMismatch(f"theta has {T.shape[0]} rows but Z has {Zm.shape[1]} classes")
    n = Z.n
    if tol is None:
        tol = 1e-10 * n
    ZtZ = Zm.T @ Zm
    gram = T.T @ ZtZ @ T
    orth = float(np.max(np.abs(gram - n * np.eye(T.shape[1])))) if T.size else 0.0
    cent = float(np.max(np.abs(T.T @ ZtZ @ np.ones(Zm.shape[1])))) if T.size else 0.0
    return ScoreCertificate(orth, cent, orth <= tol and cent <= tol)


def transformed_response(Z: ClassIndicator, theta) -> np.ndarray:
    """Y = Z Theta: each sample gets the score row of its class."""
    T = theta.theta if isinstance(theta, ScoreMatrix) else np.asarray(theta, dtype=float)
    if T.shape[0] != Z.Z.shape[1]:
        raise DimensionMismatch(f"theta has {T.shape[0]} rows but Z has {Z.Z.shape[1]} classes")
    return Z.Z @ T


def response_from_labels(labels, K: int) -> tuple[ClassIndicator, ScoreMatrix, np.ndarray]:
    Z = indicator_matrix(labels, K)
    theta = build_score_matrix(Z.class_counts)
    return Z, theta, transformed_response(Z, theta)
