"""Draw reproducible datasets from a :class:`PopulationModel`."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyClassAfterRetries, InvalidModel
from .population import PopulationModel
from .rng import SeedLike, seed_record, stream
from .scores import ClassIndicator, ScoreMatrix, build_score_matrix, indicator_matrix, transformed_response

MAX_REDRAWS = 100


@dataclass(frozen=True, eq=False)
class Dataset:
    X: np.ndarray
    labels: np.ndarray
    Z: ClassIndicator
    Y: np.ndarray
    theta: ScoreMatrix
    column_means: np.ndarray
    seed: tuple

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def K(self) -> int:
        return self.Z.K


def center_columns(X_raw) -> tuple[np.ndarray, np.ndarray]:
    """Subtract column means; return the centered copy and the means."""
    X_raw = np.asarray(X_raw, dtype=float)
    if X_raw.ndim != 2 or X_raw.shape[0] < 1:
        raise ValueError("need a 2-d array with at least one row")
    means = X_raw.mean(axis=0)
    return X_raw - means, means


def _draw_labels(rng, pi, n, stratified):
    K = pi.size
    if stratified:
        # largest-remainder allocation, then shuffled
        raw = pi * n
        counts = np.floor(raw).astype(int)
        short = n - counts.sum()
        counts[np.argsort(-(raw - counts), kind="stable")[:short]] += 1
        labels = np.repeat(np.arange(1, K + 1), counts)
        return rng.permutation(labels)
    return rng.choice(K, size=n, p=pi) + 1


def draw_features(model: PopulationModel, labels: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Raw (uncentered) features given 1-based labels."""
    noise = rng.standard_normal((labels.size, model.p)) @ model.chol_w.T
    return model.means[:, labels - 1].T + noise


def sample_dataset(model: PopulationModel, n: int, seed: SeedLike, *, stratified: bool = False) -> Dataset:
    """Sample ``n`` labelled points, center X and build Y = Z Theta.

    Labels are i.i.d. draws from ``model.pi`` unless ``stratified``. A draw
    with an empty class is repeated (up to 100 times) on the same stream, so
    the result is still a function of ``seed`` alone.
    """
    if not isinstance(model, PopulationModel):
        raise InvalidModel("model must be a PopulationModel")
    if n < model.K:
        raise ValueError(f"n={n} is smaller than the number of classes {model.K}")
    rng = stream(seed)
    for _ in range(MAX_REDRAWS):
        labels = _draw_labels(rng, model.pi, n, stratified)
        if np.bincount(labels, minlength=model.K + 1)[1:].min() > 0:
            break
    else:
        raise EmptyClassAfterRetries(f"some class stayed empty after {MAX_REDRAWS} draws of n={n}")
    X, col_means = center_columns(draw_features(model, labels, rng))
    Z = indicator_matrix(labels, model.K)
    theta = build_score_matrix(Z.class_counts)
    return Dataset(
        X=X,
        labels=labels,
        Z=Z,
        Y=transformed_response(Z, theta),
        theta=theta,
        column_means=col_means,
        seed=seed_record(seed),
    )


def holdout_risk_estimate(model: PopulationModel, b_hat, b_star, m: int, seed: SeedLike, *, return_se: bool = False):
    """Monte Carlo mean of ||x'(B_hat - B*)||^2 over ``m`` fresh draws of x.

    Converges to the closed-form trace risk. With ``return_se`` also returns
    the standard error of the mean.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    diff = np.asarray(b_hat, dtype=float) - np.asarray(b_star, dtype=float)
    if diff.ndim == 1:
        diff = diff[:, None]
    if diff.shape[0] != model.p:
        raise InvalidModel(f"coefficients have {diff.shape[0]} rows, model has p={model.p}")
    if not np.any(diff):
        return (0.0, 0.0) if return_se else 0.0
    rng = stream(seed)
    labels = rng.choice(model.K, size=m, p=model.pi) + 1
    x = draw_features(model, labels, rng)
    vals = np.sum((x @ diff) ** 2, axis=1)
    est = float(vals.mean())
    if return_se:
        se = float(vals.std(ddof=1) / np.sqrt(m)) if m > 1 else float("inf")
        return est, se
    return est
