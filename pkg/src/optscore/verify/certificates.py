"""Deterministic error bounds for the group-lasso scoring estimator.

Each bound is checked as a :class:`BoundCertificate` carrying both sides of
the inequality and whether the bound's hypothesis on lambda held. A bound
whose hypothesis fails is still evaluated and returned (``hypothesis_met``
false); it is never dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import CertificateViolation, DimensionMismatch
from ..population import support_of
from ..solver import norm12
from .metrics import covariance_deviation, in_sample_error, prediction_risk, residual_matrix, xte_norm
from .restricted_eigen import EXHAUSTIVE_MAX_P, re_constant

CONE = 3.0

BOUND_NAMES = (
    "slow.in_sample",
    "slow.norm_ratio",
    "slow.prediction",
    "slow.estimation",
    "fast.cone",
    "fast.in_sample",
    "fast.frobenius",
    "fast.l12",
    "fast.prediction",
)


@dataclass(frozen=True)
class BoundCertificate:
    name: str
    lhs: float
    rhs: float
    holds: bool
    hypothesis_met: bool
    inputs: dict = field(default_factory=dict)
    approximate: bool = False

    @property
    def violated(self) -> bool:
        return self.hypothesis_met and not self.holds


def _cert(name, lhs, rhs, hyp, inputs, approximate=False):
    lhs, rhs = float(lhs), float(rhs)
    return BoundCertificate(name, lhs, rhs, bool(lhs <= rhs), bool(hyp), dict(inputs), approximate)


def top_rows(A, s: int) -> np.ndarray:
    """Indices of the ``s`` rows of largest Euclidean norm (ties by index)."""
    norms = np.linalg.norm(A, axis=1)
    return np.sort(np.argsort(-norms, kind="stable")[:s])


def gamma_for_certificate(X, b_star, b_hat, s: int, *, seed=0, restarts=20, iterations=200, method=None):
    """Estimate gamma(s, 3, K, X / sqrt(n)) including the error direction itself.

    The search over supports gives a lower bound on the constant. The
    fast-rate bounds only use the restricted eigenvalue inequality at
    A = B_hat - B* (on the support of B* and on the s largest rows of A), so
    those two ratios are added as probes; the result then dominates every
    ratio the bounds rely on.
    """
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    B = np.atleast_2d(np.asarray(b_star, dtype=float).reshape(p, -1))
    A = np.asarray(b_hat, dtype=float).reshape(p, -1) - B
    S, _ = support_of(B)
    probes = [(A, S), (A, top_rows(A, s))]
    if method is None:
        method = "exhaustive-supports" if p <= EXHAUSTIVE_MAX_P else "sampled-cone"
    return re_constant(
        gram=X.T @ X / n,
        s=s,
        c=CONE,
        K=B.shape[1] + 1,
        method=method,
        restarts=restarts,
        iterations=iterations,
        seed=seed,
        probes=probes,
    )


def deterministic_certificates(X, Y, b_star, b_hat, lam, sigma_t, gamma_x=None, s=None, *, approximate=False):
    """Evaluate every deterministic bound for one fitted replicate.

    Parameters
    ----------
    X, Y : centered design and scored response.
    b_star, b_hat : population and fitted coefficients, (p, K-1).
    lam : the penalty used for ``b_hat``.
    sigma_t : population total covariance; its extreme eigenvalues are
        computed exactly here.
    gamma_x : restricted eigenvalue constant of X / sqrt(n) with cone
        constant 3. When None the fast-rate bounds are reported with
        ``hypothesis_met`` false.
    s : sparsity level for the fast-rate bounds. Defaults to the size of the
        support of ``b_star``; a smaller value fails the sparsity hypothesis.
    approximate : mark the gamma-based certificates as resting on a sampled
        (not exhaustive) constant.
    """
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    Y = np.asarray(Y, dtype=float).reshape(n, -1)
    B = np.asarray(b_star, dtype=float).reshape(p, -1)
    Bh = np.asarray(b_hat, dtype=float).reshape(p, -1)
    if B.shape != Bh.shape or B.shape[1] != Y.shape[1]:
        raise DimensionMismatch(f"B* {B.shape}, B_hat {Bh.shape} and Y {Y.shape} do not conform")

    E = residual_matrix(X, Y, B)
    xte = xte_norm(X, E)
    dev = covariance_deviation(X, sigma_t)
    eig = np.linalg.eigvalsh(np.asarray(sigma_t, dtype=float))
    eig_min, eig_max = float(eig[0]), float(eig[-1])
    b_norm = norm12(B)
    A = Bh - B
    ins = in_sample_error(X, Bh, B)
    risk = prediction_risk(Bh, B, sigma_t)
    est = float(np.sum(A**2))
    a12 = norm12(A)

    base = {"lambda": float(lam), "xte": xte, "norm12_b_star": b_norm, "cov_dev": dev}
    one, two = lam >= xte, lam >= 2 * xte
    certs = [
        _cert("slow.in_sample", ins, (lam + xte) * b_norm, one, base),
        _cert("slow.norm_ratio", norm12(Bh), 3 * b_norm, two, base),
        _cert("slow.prediction", risk, 1.5 * lam * b_norm + 16 * b_norm**2 * dev, two, base),
    ]
    slow_est = (1.5 * lam * b_norm + 16 * b_norm**2 * dev) / eig_min if eig_min > 0 else np.inf
    certs.append(_cert("slow.estimation", est, slow_est, two and eig_min > 0, {**base, "eig_min": eig_min}))

    S, s_true = support_of(B)
    s_used = s_true if s is None else int(s)
    sparse_ok = s_used >= max(s_true, 1)
    mask = np.zeros(p, dtype=bool)
    mask[S] = True
    cone_lhs = norm12(A[~mask])
    certs.append(_cert("fast.cone", cone_lhs, CONE * norm12(A[mask]), two and s_true > 0, {**base, "s": s_true}))

    g = np.inf if gamma_x is None else float(gamma_x)
    re_ok = np.isfinite(g) and g > 0
    hyp = two and sparse_ok and re_ok
    fin = g if re_ok else np.inf
    finputs = {**base, "gamma_x": g, "s": s_used}
    certs += [
        _cert("fast.in_sample", ins, 2.25 * fin * s_used * lam**2, hyp, finputs, approximate),
        _cert("fast.frobenius", np.sqrt(est), 7.5 * fin * np.sqrt(s_used) * lam, hyp, finputs, approximate),
        _cert("fast.l12", a12, 6 * fin * s_used * lam, hyp, finputs, approximate),
    ]
    pred_a = 2.25 * fin * s_used * lam**2 + 36 * fin**2 * s_used**2 * lam**2 * dev
    pred_b = eig_max * 57 * fin**2 * s_used * lam**2
    certs.append(_cert("fast.prediction", risk, min(pred_a, pred_b), hyp, {**finputs, "eig_max": eig_max}, approximate))
    return certs


def violations(certs) -> list[BoundCertificate]:
    """Certificates whose hypothesis held but whose inequality failed."""
    return [c for c in certs if c.violated]


def check_certificates(certs) -> None:
    bad = violations(certs)
    if bad:
        names = ", ".join(f"{c.name} ({c.lhs:.6g} > {c.rhs:.6g})" for c in bad)
        raise CertificateViolation(f"bound violated: {names}")
