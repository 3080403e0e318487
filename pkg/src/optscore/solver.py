"""Row-sparse multi-response least squares.

Solves

    minimize_B  (2n)^{-1} ||Y - X B||_F^2 + lam * sum_j ||B[j, :]||_2

for a column-centered design ``X`` (n x p) and score response ``Y``
(n x (K-1)). Two algorithms are provided: cyclic block coordinate descent
with an active set (the default) and monotone accelerated proximal gradient.
Both stop on the same rule: the largest row change is below
``tolerance * (1 + ||B||_F)`` and the KKT residual is below
``10 * tolerance``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import BadParameter, ConvergenceWarning, DimensionMismatch, InvalidProblem

ALGORITHMS = ("bcd", "proximal-gradient")
_ZERO_COLUMN = 1e-24


@dataclass(frozen=True, eq=False)
class Problem:
    X: np.ndarray
    Y: np.ndarray
    lam: float

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        Y = np.asarray(self.Y, dtype=float)
        if Y.ndim == 1:
            Y = Y[:, None]
        if X.ndim != 2 or Y.ndim != 2:
            raise DimensionMismatch("X and Y must be matrices")
        if X.shape[0] != Y.shape[0]:
            raise DimensionMismatch(f"X has {X.shape[0]} rows, Y has {Y.shape[0]}")
        if X.shape[0] < 1 or X.shape[1] < 1 or Y.shape[1] < 1:
            raise DimensionMismatch("empty problem")
        if not np.isfinite(self.lam) or self.lam < 0:
            raise InvalidProblem(f"lambda must be a finite non-negative number, got {self.lam}")
        scale = np.maximum(np.abs(X).max(axis=0), 1.0)
        if np.any(np.abs(X.mean(axis=0)) > 1e-8 * scale):
            raise InvalidProblem("X must be column-centered")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "lam", float(self.lam))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def m(self) -> int:
        """Number of response columns, K - 1."""
        return self.Y.shape[1]


@dataclass
class SolverOptions:
    max_iterations: int = 20_000
    tolerance: float = 1e-9
    algorithm: str = "bcd"
    warm_start: np.ndarray | None = None
    standardize: bool = False
    accelerated: bool = True

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise BadParameter(f"algorithm must be one of {ALGORITHMS}")
        if not self.tolerance > 0:
            raise BadParameter("tolerance must be positive")
        if int(self.max_iterations) < 1:
            raise BadParameter("max_iterations must be >= 1")


@dataclass(frozen=True, eq=False)
class FitResult:
    b_hat: np.ndarray
    lam: float
    objective: float
    iterations: int
    kkt_residual: float
    active_rows: np.ndarray
    converged: bool
    algorithm: str = "bcd"
    history: list = field(default_factory=list, repr=False)


def norm12(B) -> float:
    """Sum of row Euclidean norms."""
    return float(np.linalg.norm(np.atleast_2d(B), axis=1).sum())


def objective(X, Y, B, lam) -> float:
    Y = Y[:, None] if np.ndim(Y) == 1 else Y
    B = B[:, None] if np.ndim(B) == 1 else B
    R = Y - X @ B
    return float(np.vdot(R, R) / (2 * X.shape[0]) + lam * norm12(B))


def _gradient_rows(X, R):
    return X.T @ R / X.shape[0]


def kkt_residual(problem: Problem, b) -> float:
    """Largest violation of the subgradient optimality conditions.

    Active rows: ``|| x_j'R/n - lam b_j/||b_j|| ||``; zero rows:
    ``max(0, ||x_j'R/n|| - lam)`` with ``R = Y - X B``.
    """
    B = np.asarray(b, dtype=float)
    if B.ndim == 1:
        B = B[:, None]
    if B.shape != (problem.p, problem.m):
        raise DimensionMismatch(f"B must be {problem.p} x {problem.m}, got {B.shape}")
    G = _gradient_rows(problem.X, problem.Y - problem.X @ B)
    bn = np.linalg.norm(B, axis=1)
    gn = np.linalg.norm(G, axis=1)
    active = bn > 0
    res = np.maximum(gn - problem.lam, 0.0)
    if np.any(active):
        sub = G[active] - problem.lam * B[active] / bn[active, None]
        res[active] = np.linalg.norm(sub, axis=1)
    return float(res.max()) if res.size else 0.0


def lambda_max(X, Y) -> float:
    """Smallest lambda at which B = 0 is optimal: max_j ||x_j'Y||_2 / n."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if X.shape[0] != Y.shape[0]:
        raise DimensionMismatch(f"X has {X.shape[0]} rows, Y has {Y.shape[0]}")
    return float(np.linalg.norm(X.T @ Y, axis=1).max() / X.shape[0])


def group_soft_threshold(V, thresh):
    """Row-wise prox of ``thresh * ||.||_{1,2}``; rows at the threshold go to 0."""
    norms = np.linalg.norm(V, axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(norms > thresh, 1.0 - thresh / norms, 0.0)
    return V * scale


def _converged(problem, B, change, tol, force=False):
    if change > tol * (1.0 + np.linalg.norm(B)) and not force:
        return False, None
    kkt = kkt_residual(problem, B)
    return kkt <= 10 * tol, kkt


def _bcd(problem: Problem, B, tol, max_iter):
    X, Y, lam, n = problem.X, problem.Y, problem.lam, problem.n
    col_sq = np.einsum("ij,ij->j", X, X)
    usable = col_sq > _ZERO_COLUMN * max(col_sq.max(), 1.0)
    B[~usable] = 0.0
    all_rows = np.flatnonzero(usable)
    R = Y - X @ B
    history = [float(np.vdot(R, R) / (2 * n) + lam * norm12(B))]
    full = True
    rows = all_rows
    kkt = None
    for it in range(1, max_iter + 1):
        change = 0.0
        for j in rows:
            xj = X[:, j]
            bj = B[j]
            g = xj @ R / n + (col_sq[j] / n) * bj
            gn = math.sqrt(g @ g)
            if gn <= lam:
                if not bj.any():
                    continue
                new = np.zeros_like(bj)
            else:
                new = (n / col_sq[j]) * (1.0 - lam / gn) * g
            d = new - bj
            R -= np.outer(xj, d)
            B[j] = new
            change = max(change, math.sqrt(d @ d))
        history.append(float(np.vdot(R, R) / (2 * n) + lam * norm12(B)))
        if full:
            R = Y - X @ B  # refresh to stop drift
            done, kkt = _converged(problem, B, change, tol)
            if done:
                return B, it, True, kkt, history
            if change <= tol * (1.0 + np.linalg.norm(B)):
                continue  # small steps but KKT not yet met: stay on full sweeps
            rows = all_rows[np.linalg.norm(B[all_rows], axis=1) > 0]
            full = rows.size == 0
            if full:
                rows = all_rows
        elif change <= tol * (1.0 + np.linalg.norm(B)):
            full = True
            rows = all_rows
    return B, max_iter, False, kkt_residual(problem, B), history


def _proximal_gradient(problem: Problem, B, tol, max_iter, accelerated):
    X, Y, lam, n = problem.X, problem.Y, problem.lam, problem.n
    if n >= X.shape[1]:
        gram = X.T @ X / n
        L = float(np.linalg.eigvalsh(gram)[-1])
        xty = X.T @ Y / n
        grad = lambda V: gram @ V - xty  # noqa: E731
    else:
        L = float(np.linalg.norm(X, 2) ** 2 / n)
        grad = lambda V: -X.T @ (Y - X @ V) / n  # noqa: E731
    f = lambda V: objective(X, Y, V, lam)  # noqa: E731
    if L <= 0:
        B[:] = 0.0
        return B, 0, True, kkt_residual(problem, B), [f(B)]
    step = 1.0 / L
    x = B
    fx = f(x)
    history = [fx]
    y = x.copy()
    t = 1.0
    for it in range(1, max_iter + 1):
        z = group_soft_threshold(y - step * grad(y), lam * step)
        fz = f(z)
        if not accelerated:
            change = np.linalg.norm(z - x)
            x, fx = z, fz
        else:
            # monotone FISTA: keep the better of z and the previous iterate
            x_new, f_new = (z, fz) if fz <= fx else (x, fx)
            t_new = (1.0 + math.sqrt(1.0 + 4.0 * t * t)) / 2.0
            y = x_new + (t / t_new) * (z - x_new) + ((t - 1.0) / t_new) * (x_new - x)
            change = np.linalg.norm(z - x)
            x, fx, t = x_new, f_new, t_new
        if not accelerated:
            y = x
        history.append(fx)
        # momentum can keep steps from shrinking after the optimum is reached,
        # so the KKT residual is also checked periodically
        done, kkt = _converged(problem, x, change, tol, force=it % 25 == 0)
        if done:
            return x, it, True, kkt, history
    return x, max_iter, False, kkt_residual(problem, x), history


def fit(problem: Problem, options: SolverOptions | None = None) -> FitResult:
    """Minimize the penalized objective for ``problem``.

    On hitting ``max_iterations`` a :class:`ConvergenceWarning` is issued and
    the last iterate is returned with ``converged=False``. Columns of X that
    are identically zero get zero rows in ``b_hat``.

    With ``options.standardize`` the columns are scaled to unit variance, the
    problem is solved in that scale, and ``b_hat`` is mapped back; the
    reported objective and KKT residual refer to the standardized problem.
    """
    options = options or SolverOptions()
    scale = None
    work = problem
    if options.standardize:
        sd = np.sqrt(np.einsum("ij,ij->j", problem.X, problem.X) / problem.n)
        scale = np.where(sd > 0, sd, 1.0)
        work = Problem(problem.X / scale, problem.Y, problem.lam)
    if options.warm_start is not None:
        B0 = np.array(options.warm_start, dtype=float)
        if B0.ndim == 1:
            B0 = B0[:, None]
        if B0.shape != (problem.p, problem.m):
            raise DimensionMismatch(f"warm start must be {problem.p} x {problem.m}, got {B0.shape}")
        if scale is not None:
            B0 = B0 * scale[:, None]
    else:
        B0 = np.zeros((problem.p, problem.m))
    tol, max_iter = float(options.tolerance), int(options.max_iterations)
    if problem.lam >= lambda_max(work.X, work.Y):
        # the origin is optimal; iterating would only add round-off
        B0[:] = 0.0
        B, iters, ok, kkt, hist = B0, 0, True, kkt_residual(work, B0), [objective(work.X, work.Y, B0, work.lam)]
    elif options.algorithm == "bcd":
        B, iters, ok, kkt, hist = _bcd(work, B0, tol, max_iter)
    else:
        B, iters, ok, kkt, hist = _proximal_gradient(work, B0, tol, max_iter, options.accelerated)
    if not ok:
        warnings.warn(
            f"{options.algorithm} stopped after {iters} iterations with KKT residual {kkt:.3g}",
            ConvergenceWarning,
            stacklevel=2,
        )
    obj = objective(work.X, work.Y, B, work.lam)
    if scale is not None:
        B = B / scale[:, None]
    return FitResult(
        b_hat=B,
        lam=problem.lam,
        objective=obj,
        iterations=iters,
        kkt_residual=float(kkt),
        active_rows=np.flatnonzero(np.linalg.norm(B, axis=1) > 0),
        converged=ok,
        algorithm=options.algorithm,
        history=hist,
    )


def lambda_grid(lam_max: float, count: int, min_ratio: float) -> np.ndarray:
    if count < 1:
        raise BadParameter("count must be >= 1")
    if not 0 < min_ratio <= 1:
        raise BadParameter("min_ratio must lie in (0, 1]")
    if count == 1:
        return np.array([lam_max])
    return lam_max * np.geomspace(1.0, min_ratio, count)


def lambda_path(problem: Problem, count: int = 50, min_ratio: float = 1e-2,
                options: SolverOptions | None = None) -> list[FitResult]:
    """Fits on a geometric grid from lambda_max down to ``min_ratio * lambda_max``.

    ``problem.lam`` is ignored. Each fit is warm-started from the previous one.
    """
    options = options or SolverOptions()
    grid = lambda_grid(lambda_max(problem.X, problem.Y), count, min_ratio)
    out = []
    warm = options.warm_start
    for lam in grid:
        opts = SolverOptions(
            max_iterations=options.max_iterations,
            tolerance=options.tolerance,
            algorithm=options.algorithm,
            warm_start=warm,
            standardize=options.standardize,
            accelerated=options.accelerated,
        )
        res = fit(Problem(problem.X, problem.Y, lam), opts)
        out.append(res)
        warm = res.b_hat
    return out


def theoretical_lambda(tau: float, K: int, p: int, n: int, eta: float, C: float = 2.0) -> float:
    """C * tau * sqrt((K - 1) * log(p / eta) / n)."""
    if not 0 < eta < 1:
        raise BadParameter("eta must lie in (0, 1)")
    if n < 1 or p < 1:
        raise BadParameter("n and p must be >= 1")
    if K < 2:
        raise BadParameter("K must be >= 2")
    if not (tau > 0 and C > 0):
        raise BadParameter("tau and C must be positive")
    return float(C * tau * math.sqrt((K - 1) * math.log(p / eta) / n))
