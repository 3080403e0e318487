"""Numerical estimates of the group restricted eigenvalue constant.

For a q x p matrix Q, sparsity s, cone constant c and class count K, the
constant is

    gamma = max_{|S| <= s} max_{A in C(S, c, K)} ||A_S||_F^2 / ||Q A||_F^2,

with C(S, c, K) = {A : ||A_{S^c}||_{1,2} <= c ||A_S||_{1,2}}. Every value
reported here is attained by a feasible cone element, so it is a lower bound
on the true constant; the inner minimization is nonconvex and may stop early.

Supports smaller than s never need enumerating: for S' a subset of S, any A
in C(S', c, K) also lies in C(S, c, K) and has ||A_S||_F >= ||A_S'||_F.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np

from ..errors import BadParameter, DimensionMismatch, TooLarge
from ..rng import SeedLike, stream

EXHAUSTIVE_MAX_P = 14
METHODS = ("exhaustive-supports", "sampled-cone")


@dataclass(frozen=True)
class REReport:
    s: int
    c: float
    K: int
    gamma_estimate: float
    method: str
    certified: bool
    supports_probed: int
    worst_support: tuple
    note: str = field(default="lower bound: attained by a feasible cone element; the search may miss the worst one")


def group_l1_ball_projection(V: np.ndarray, radius) -> np.ndarray:
    """Project each slice ``V[:, :, b]`` onto {||.||_{1,2} <= radius[b]}.

    Groups are the rows (axis 0). Batched sort-based simplex projection of
    the row norms, followed by rescaling of each row.
    """
    norms = np.sqrt(np.sum(V**2, axis=1))  # (p, B)
    radius = np.broadcast_to(np.asarray(radius, dtype=float), norms.shape[1:])
    outside = norms.sum(axis=0) > radius
    if not np.any(outside):
        return V
    srt = -np.sort(-norms, axis=0)
    csum = np.cumsum(srt, axis=0) - radius
    idx = np.arange(1, norms.shape[0] + 1)[:, None]
    cond = srt - csum / idx > 0
    rho = cond.shape[0] - 1 - np.argmax(cond[::-1], axis=0)
    theta = np.maximum(csum[rho, np.arange(rho.size)] / (rho + 1), 0.0)
    theta = np.where(outside, theta, 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(norms > 0, np.maximum(norms - theta, 0.0) / norms, 0.0)
    return V * scale[:, None, :]


def _minimize_on_supports(G, supports, c, m, restarts, iterations, rng):
    """Smallest ||Q A||_F^2 / ||A_S||_F^2 found for each support (rows of ``supports``).

    Projected gradient on the quotient with a per-start adaptive step that
    only accepts decreases. After each step A is rescaled to ||A_S||_F = 1
    and A_{S^c} is projected onto the group-l1 ball of radius c ||A_S||_{1,2},
    so every accepted iterate is a feasible cone element.
    """
    p = G.shape[0]
    n_sup = supports.shape[0]
    R = restarts
    B = n_sup * R
    on = np.zeros((p, n_sup))
    on[supports.T, np.arange(n_sup)] = 1.0
    on = np.repeat(on, R, axis=1)[:, None, :]  # (p, 1, B)
    off = 1.0 - on

    A = rng.standard_normal((p, m, B))
    # first start per support: least eigenvector of G_SS, zero elsewhere
    for i, S in enumerate(supports):
        _, V = np.linalg.eigh(G[np.ix_(S, S)])
        A[:, :, i * R] = 0.0
        A[S, 0, i * R] = V[:, 0]

    def feasible(A):
        AS = A * on
        nS = np.sqrt(np.sum(AS**2, axis=(0, 1)))
        nS = np.where(nS > 0, nS, 1.0)
        AS = AS / nS
        rad = c * np.sqrt(np.sum(AS**2, axis=1)).sum(axis=0)
        return AS + group_l1_ball_projection(A * off / nS, rad)

    def value(A):
        GA = (G @ A.reshape(p, -1)).reshape(A.shape)
        return np.sum(A * GA, axis=(0, 1)), GA

    A = feasible(A)
    f, GA = value(A)
    L = max(float(np.linalg.eigvalsh(G)[-1]), 1e-300)
    t = np.full(B, 0.25 / L)
    last = f.reshape(n_sup, R).min(axis=1)
    for it in range(iterations):
        A_new = feasible(A - 2 * t * (GA - f * A * on))
        f_new, GA_new = value(A_new)
        ok = f_new <= f
        A = np.where(ok, A_new, A)
        GA = np.where(ok, GA_new, GA)
        f = np.where(ok, f_new, f)
        t = np.where(ok, t * 1.3, t * 0.5)
        if it % 50 == 49:
            cur = f.reshape(n_sup, R).min(axis=1)
            if np.all(last - cur <= 1e-13 * np.abs(cur)):
                break
            last = cur
    return np.maximum(f.reshape(n_sup, R).min(axis=1), 0.0)


def _probe_values(G, probes, c):
    """||Q A||^2 / ||A_S||_F^2 for caller-supplied (A, S) pairs in the cone."""
    vals = []
    for A, S in probes:
        A = np.asarray(A, dtype=float)
        A = A[:, None] if A.ndim == 1 else A
        S = np.asarray(S, dtype=int)
        mask = np.zeros(A.shape[0], dtype=bool)
        mask[S] = True
        nS2 = float(np.sum(A[mask] ** 2))
        if nS2 == 0:
            continue
        off = np.linalg.norm(A[~mask], axis=1).sum()
        on = np.linalg.norm(A[mask], axis=1).sum()
        if off > c * on * (1 + 1e-12):
            continue  # not in the cone, says nothing about gamma
        vals.append((max(float(np.einsum("ik,ij,jk->", A, G, A)), 0.0) / nS2, tuple(int(j) for j in S)))
    return vals


def re_constant(
    Q=None,
    s: int = 1,
    c: float = 3.0,
    K: int = 2,
    *,
    method: str = "exhaustive-supports",
    restarts: int = 20,
    iterations: int = 500,
    seed: SeedLike = 0,
    gram=None,
    n_supports: int = 200,
    probes=(),
) -> REReport:
    """Estimate gamma(s, c, K, Q).

    Parameters
    ----------
    Q : (q, p) array, optional
        The matrix. May be omitted when ``gram = Q'Q`` is given.
    s, c, K
        Sparsity, cone constant and class count (directions have K-1 columns).
    method
        ``"exhaustive-supports"`` visits every support of size ``min(s, p)``
        and needs ``p <= 14``; ``"sampled-cone"`` visits ``n_supports``
        random supports plus the ones made of the weakest diagonal entries.
    restarts
        Random starts per support (at least 20); one extra start uses the
        least eigenvector of the support block.
    probes
        Extra ``(A, S)`` pairs whose ratios are included in the maximum.
        Pairs outside the cone are ignored.
    """
    if method not in METHODS:
        raise BadParameter(f"method must be one of {METHODS}")
    if s < 1 or K < 2 or c < 0:
        raise BadParameter("need s >= 1, K >= 2, c >= 0")
    if restarts < 20:
        raise BadParameter("restarts must be at least 20")
    if gram is None:
        if Q is None:
            raise BadParameter("give Q or gram")
        Q = np.atleast_2d(np.asarray(Q, dtype=float))
        G = Q.T @ Q
    else:
        G = np.asarray(gram, dtype=float)
        if G.ndim != 2 or G.shape[0] != G.shape[1]:
            raise DimensionMismatch("gram must be square")
        if Q is not None and np.shape(Q)[1] != G.shape[0]:
            raise DimensionMismatch("Q and gram disagree on p")
    G = (G + G.T) / 2
    p = G.shape[0]
    m = K - 1
    s_eff = min(s, p)
    rng = stream(seed, "re_constant")

    if method == "exhaustive-supports":
        if p > EXHAUSTIVE_MAX_P:
            raise TooLarge(f"exhaustive support enumeration is capped at p={EXHAUSTIVE_MAX_P}, got p={p}")
        supports = np.array(list(combinations(range(p), s_eff)), dtype=int).reshape(-1, s_eff)
    else:
        total = comb(p, s_eff)
        weak = np.argsort(np.diag(G), kind="stable")[:s_eff]
        rows = {tuple(sorted(weak.tolist()))}
        target = min(n_supports, total)
        while len(rows) < target:
            rows.add(tuple(sorted(rng.choice(p, size=s_eff, replace=False).tolist())))
        supports = np.array(sorted(rows), dtype=int)

    # chunk so the batch stays a few MB
    chunk = max(1, 200000 // ((restarts + 1) * p * m))
    vals = []
    for start in range(0, len(supports), chunk):
        vals.append(_minimize_on_supports(G, supports[start : start + chunk], c, m, restarts + 1, iterations, rng))
    vals = np.concatenate(vals)
    k = int(np.argmin(vals))
    fmin, worst = float(vals[k]), tuple(int(j) for j in supports[k])
    for v, S in _probe_values(G, probes, c):
        if v < fmin:
            fmin, worst = v, S
    # ||QA||^2 >= lambda_min(G) ||A||^2 >= lambda_min(G) ||A_S||^2, so anything
    # lower is round-off; this also makes gamma exact whenever the bound is attained
    fmin = max(fmin, float(np.linalg.eigvalsh(G)[0]))
    scale = max(float(np.abs(G).max()), 1e-300)
    if fmin <= 1e-14 * scale:
        gamma, ok = float("inf"), False
    else:
        gamma, ok = 1.0 / fmin, method == "exhaustive-supports"
    return REReport(
        s=int(s),
        c=float(c),
        K=int(K),
        gamma_estimate=gamma,
        method=method,
        certified=ok,
        supports_probed=int(len(supports)),
        worst_support=worst,
    )
