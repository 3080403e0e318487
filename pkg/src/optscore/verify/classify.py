"""Nearest-centroid classification in the fitted discriminant space."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch


@dataclass(frozen=True, eq=False)
class ScoreClassifier:
    b_hat: np.ndarray  # (p, K-1)
    centroids: np.ndarray  # (K, K-1), class means of X @ b_hat
    column_means: np.ndarray  # (p,), training feature means

    @property
    def K(self) -> int:
        return self.centroids.shape[0]

    def project(self, x_new) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x_new, dtype=float))
        if x.shape[1] != self.b_hat.shape[0]:
            raise DimensionMismatch(f"expected {self.b_hat.shape[0]} features, got {x.shape[1]}")
        return (x - self.column_means) @ self.b_hat

    def predict(self, x_new) -> np.ndarray:
        """1-based labels; equidistant centroids resolve to the smallest label."""
        z = self.project(x_new)
        d2 = np.sum((z[:, None, :] - self.centroids[None]) ** 2, axis=2)
        return np.argmin(d2, axis=1) + 1


def class_centroids(X, labels, b_hat, K: int) -> np.ndarray:
    """Per-class means of the centered training data projected by ``b_hat``."""
    X = np.asarray(X, dtype=float)
    labels = np.asarray(labels)
    B = np.asarray(b_hat, dtype=float).reshape(X.shape[1], -1)
    if labels.shape != (X.shape[0],):
        raise DimensionMismatch("one label per row of X")
    Z = X @ B
    counts = np.bincount(labels - 1, minlength=K)
    sums = np.zeros((K, B.shape[1]))
    np.add.at(sums, labels - 1, Z)
    with np.errstate(invalid="ignore", divide="ignore"):
        return sums / counts[:, None]


def train_classifier(X, labels, b_hat, K: int, column_means) -> ScoreClassifier:
    """``X`` must be the centered training design and ``column_means`` its removed means."""
    B = np.asarray(b_hat, dtype=float).reshape(np.shape(X)[1], -1)
    mu = np.asarray(column_means, dtype=float)
    if mu.shape != (B.shape[0],):
        raise DimensionMismatch("column_means must have one entry per feature")
    return ScoreClassifier(b_hat=B, centroids=class_centroids(X, labels, B, K), column_means=mu)


def classify(x_new, b_hat, centroids, column_means):
    """Label(s) for raw feature vector(s) ``x_new``.

    Centers with the training column means, projects by ``b_hat`` and picks
    the nearest centroid. With ``b_hat = 0`` every class is equidistant and
    the answer is class 1.
    """
    B = np.asarray(b_hat, dtype=float)
    B = B[:, None] if B.ndim == 1 else B
    C = np.atleast_2d(np.asarray(centroids, dtype=float))
    if C.shape[1] != B.shape[1]:
        raise DimensionMismatch(f"centroids have {C.shape[1]} coordinates, b_hat has {B.shape[1]} columns")
    clf = ScoreClassifier(b_hat=B, centroids=C, column_means=np.asarray(column_means, dtype=float))
    out = clf.predict(x_new)
    return int(out[0]) if np.ndim(x_new) == 1 else out
