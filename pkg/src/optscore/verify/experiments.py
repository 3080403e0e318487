"""Monte Carlo experiments over grids of (n, model) points.

Every replicate draws from its own stream keyed by (seed, experiment,
point index, replicate index), and results are collected in replicate order,
so reports do not depend on the number of worker threads.
"""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Sequence

import numpy as np

from ..errors import BadParameter, ModelNotSparse
from ..io import fmt
from ..population import PopulationModel
from ..simulate import sample_dataset
from ..solver import Problem, SolverOptions, fit, theoretical_lambda
from .certificates import BOUND_NAMES, deterministic_certificates, gamma_for_certificate
from .metrics import (
    covariance_deviation,
    estimation_error,
    in_sample_error,
    prediction_risk,
    residual_matrix,
    xte_norm,
)
from .restricted_eigen import EXHAUSTIVE_MAX_P

ROW_COLUMNS = ("experiment", "n", "p", "K", "s", "lambda", "replicate", "metric", "value")
SUMMARY_COLUMNS = ("experiment", "n", "p", "K", "s", "metric", "count", "mean", "q05", "q50", "q95")
SLOW_BAND = (-0.75, -0.3)
FAST_BAND = (-1.3, -0.7)


@dataclass(frozen=True)
class GridPoint:
    n: int
    p: int
    K: int
    s: int


@dataclass(frozen=True, eq=False)
class ExperimentReport:
    """Long-format replicate values plus derived statistics.

    ``rows`` holds ``(experiment, n, p, K, s, lambda, replicate, metric,
    value)`` tuples in grid order, then replicate order. ``extras`` carries
    experiment-specific results (calibrated constant, coverage, ratios,
    violation counts) as plain Python values.
    """

    experiment: str
    grid: tuple
    reps: int
    rows: tuple
    slopes: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    def values(self, point: int | GridPoint, metric: str) -> np.ndarray:
        if isinstance(point, int):
            point = self.grid[point]
        key = (point.n, point.p, point.K, point.s)
        return np.array([r[8] for r in self.rows if r[1:5] == key and r[7] == metric], dtype=float)

    def metrics(self) -> list[str]:
        seen = {}
        for r in self.rows:
            seen.setdefault(r[7], None)
        return list(seen)

    def summary(self) -> list[dict]:
        out = []
        for pt in dict.fromkeys(self.grid):
            for metric in self.metrics():
                v = self.values(pt, metric)
                if v.size == 0:
                    continue
                fin = v[np.isfinite(v)]
                q = np.quantile(fin, [0.05, 0.5, 0.95]) if fin.size else [np.nan] * 3
                out.append(
                    {
                        "experiment": self.experiment,
                        "n": pt.n,
                        "p": pt.p,
                        "K": pt.K,
                        "s": pt.s,
                        "metric": metric,
                        "count": int(v.size),
                        "mean": float(np.mean(v)),
                        "q05": float(q[0]),
                        "q50": float(q[1]),
                        "q95": float(q[2]),
                    }
                )
        return out

    def to_csv(self) -> str:
        return _csv(ROW_COLUMNS, self.rows)

    def summary_csv(self) -> str:
        return _csv(SUMMARY_COLUMNS, [tuple(d[c] for c in SUMMARY_COLUMNS) for d in self.summary()])

    def write(self, directory) -> tuple[str, str]:
        os.makedirs(directory, exist_ok=True)
        raw = os.path.join(directory, f"{self.experiment}.csv")
        summ = os.path.join(directory, f"{self.experiment}_summary.csv")
        with open(raw, "w", newline="") as fh:
            fh.write(self.to_csv())
        with open(summ, "w", newline="") as fh:
            fh.write(self.summary_csv())
        return raw, summ


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([v if isinstance(v, str) else fmt(v) for v in r])
    return buf.getvalue()


def map_replicates(fn: Callable[[int], object], count: int, threads: int = 1) -> list:
    """``[fn(i) for i in range(count)]``, optionally on a thread pool; order is preserved."""
    if threads is None or threads <= 1 or count <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, range(count)))


def loglog_slope(ns, values) -> float:
    """Least-squares slope of log(values) on log(ns)."""
    ns, values = np.asarray(ns, dtype=float), np.asarray(values, dtype=float)
    if ns.size < 2 or np.any(values <= 0):
        return float("nan")
    return float(np.polyfit(np.log(ns), np.log(values), 1)[0])


def _as_models(model) -> list[PopulationModel]:
    if isinstance(model, PopulationModel):
        return [model]
    models = list(model)
    if not models:
        raise BadParameter("need at least one model")
    return models


def _point(n, model) -> GridPoint:
    return GridPoint(int(n), model.p, model.K, model.derived.s)


def _check_grid(n_grid, reps, min_reps=1):
    n_grid = [int(n) for n in n_grid]
    if not n_grid or any(n < 1 for n in n_grid):
        raise BadParameter("n grid must be a nonempty list of positive integers")
    if reps < min_reps:
        raise BadParameter(f"need at least {min_reps} replicates")
    return n_grid


def _key(seed, *parts) -> tuple:
    """Flat stream key; ``seed`` may itself be a key tuple."""
    head = tuple(seed) if isinstance(seed, (tuple, list)) else (seed,)
    return head + parts


def _collect(name, points, reps, seed, body, threads):
    """Run ``body(point_index, replicate, key) -> (lambda, {metric: value})`` everywhere."""
    rows = []
    for i, pt in enumerate(points):
        res = map_replicates(lambda r: body(i, r, _key(seed, name, i, r)), reps, threads)
        for r, (lam, vals) in enumerate(res):
            for metric, v in vals.items():
                rows.append((name, pt.n, pt.p, pt.K, pt.s, float(lam), r, metric, float(v)))
    return rows


# -- concentration -------------------------------------------------------------


def lambda_scale(tau: float, K: int, p: int, n: int, eta: float) -> float:
    """tau sqrt((K-1) log(p/eta) / n); theoretical lambda is C times this."""
    return theoretical_lambda(tau, K, p, n, eta, C=1.0)


def concentration_experiment(model, n_grid, reps: int, eta: float = 0.05, seed=0, *, C=None, threads: int = 1):
    """Distribution of n^{-1} ||X'E||_{inf,2} over a grid of models and sample sizes.

    ``model`` is one model or a sequence of them; the grid is every
    (model, n) pair. Per point the constant needed for (1 - eta) coverage
    is q_{1-eta} / scale; the calibrated C is their maximum. When ``C`` is
    given it is used for the coverage figures instead (evaluation on a grid
    other than the one C was calibrated on).

    ``extras`` holds: ``c_by_point``, ``calibrated_C``, ``c_stable`` (max
    over min of the per-point constants is at most 2), ``coverage`` (per
    point, at the C in use), ``n_ratios`` (quantile at n over quantile at
    4n, for every such pair in the grid) and ``k_ratios`` (quantile at K=5
    over K=2 at equal n and p).
    """
    if not 0 < eta < 1:
        raise BadParameter("eta must lie in (0, 1)")
    n_grid = _check_grid(n_grid, reps, min_reps=50)
    models = _as_models(model)
    pairs = [(n, m) for m, n in product(models, n_grid)]
    points = [_point(n, m) for n, m in pairs]

    def body(i, r, key):
        n, m = pairs[i]
        ds = sample_dataset(m, n, key)
        E = residual_matrix(ds.X, ds.Y, m.derived.b_star)
        return 0.0, {"xte": xte_norm(ds.X, E), "cov_dev": covariance_deviation(ds.X, m.derived.sigma_t)}

    rows = _collect("concentration", points, reps, seed, body, threads)
    rep = ExperimentReport("concentration", tuple(points), reps, tuple(rows))
    level = 1 - eta
    quant, scale, c_pt = [], [], []
    for i, (n, m) in enumerate(pairs):
        q = float(np.quantile(rep.values(i, "xte"), level, method="inverted_cdf"))  # an observed value, so coverage >= level
        sc = lambda_scale(m.derived.tau, m.K, m.p, n, eta)
        quant.append(q)
        scale.append(sc)
        c_pt.append(q / sc)
    calibrated = max(c_pt)
    C_used = calibrated if C is None else float(C)
    coverage = [float(np.mean(rep.values(i, "xte") <= C_used * scale[i])) for i in range(len(pairs))]

    n_ratios, k_ratios = [], []
    for i, a in enumerate(points):
        for j, b in enumerate(points):
            if pairs[i][1] is pairs[j][1] and b.n == 4 * a.n:
                n_ratios.append({"n": a.n, "p": a.p, "K": a.K, "ratio": quant[i] / quant[j]})
            if a.n == b.n and a.p == b.p and a.K == 2 and b.K == 5:
                k_ratios.append({"n": a.n, "p": a.p, "ratio": quant[j] / quant[i]})
    extras = {
        "eta": float(eta),
        "quantile_level": level,
        "quantiles": quant,
        "scales": scale,
        "c_by_point": c_pt,
        "calibrated_C": calibrated,
        "C_used": C_used,
        "c_stable": bool(max(c_pt) <= 2 * min(c_pt)),
        "coverage": coverage,
        "n_ratios": n_ratios,
        "k_ratios": k_ratios,
    }
    return ExperimentReport("concentration", tuple(points), reps, tuple(rows), {}, extras)


def calibrate_constant(model, n: int, reps: int, eta: float = 0.05, seed=0, threads: int = 1) -> float:
    """Smallest C giving empirical (1 - eta) coverage at a single (model, n) point."""
    rep = concentration_experiment(model, [n], reps, eta, seed, threads=threads)
    return rep.extras["calibrated_C"]


# -- rate experiments ------------------------------------------------------------


def _rate_body(model, n_of, lam_of, options):
    d = model.derived

    def body(i, r, key):
        n = n_of(i)
        ds = sample_dataset(model, n, key)
        lam = lam_of(n)
        res = fit(Problem(ds.X, ds.Y, lam), options)
        E = residual_matrix(ds.X, ds.Y, d.b_star)
        xte = xte_norm(ds.X, E)
        return lam, {
            "prediction_risk": prediction_risk(res.b_hat, d.b_star, d.sigma_t),
            "estimation_error": estimation_error(res.b_hat, d.b_star),
            "in_sample_error": in_sample_error(ds.X, res.b_hat, d.b_star),
            "xte": xte,
            "cov_dev": covariance_deviation(ds.X, d.sigma_t),
            "hypothesis_met": float(lam >= 2 * xte),
            "active_rows": float(res.active_rows.size),
        }

    return body


def _rate_experiment(name, model, n_grid, reps, C, seed, eta, threads, options, metric, band):
    if not isinstance(model, PopulationModel):
        raise BadParameter("rate experiments take a single model")
    n_grid = _check_grid(n_grid, reps)
    if not C > 0:
        raise BadParameter("C must be positive")
    options = options or SolverOptions(tolerance=1e-8)
    d = model.derived
    points = [_point(n, model) for n in n_grid]
    lam_of = lambda n: theoretical_lambda(d.tau, model.K, model.p, n, eta, C)  # noqa: E731
    rows = _collect(name, points, reps, seed, _rate_body(model, lambda i: n_grid[i], lam_of, options), threads)
    rep = ExperimentReport(name, tuple(points), reps, tuple(rows))
    means = {m: [float(np.mean(rep.values(i, m))) for i in range(len(points))] for m in ("prediction_risk", "estimation_error")}
    slopes = {m: loglog_slope(n_grid, v) for m, v in means.items()}
    extras = {
        "C": float(C),
        "eta": float(eta),
        "lambdas": [lam_of(n) for n in n_grid],
        "means": means,
        "slope_metric": metric,
        "band": list(band),
        "slope_in_band": bool(band[0] <= slopes[metric] <= band[1]),
        "hypothesis_rate": [float(np.mean(rep.values(i, "hypothesis_met"))) for i in range(len(points))],
        "null_fit_risk": float(np.einsum("ij,ik,kj->", d.b_star, d.sigma_t, d.b_star)),
    }
    return ExperimentReport(name, tuple(points), reps, tuple(rows), slopes, extras)


def slow_rate_experiment(model, n_grid, reps: int, C: float, seed=0, *, eta: float = 0.05, threads: int = 1,
                         options: SolverOptions | None = None, band=SLOW_BAND) -> ExperimentReport:
    """Mean out-of-sample prediction risk against n, lambda at the theoretical rate.

    No sparsity is needed. The fitted log-log slope of the mean risk is
    compared with ``band``.
    """
    return _rate_experiment("slow-rate", model, n_grid, reps, C, seed, eta, threads, options, "prediction_risk", band)


def fast_rate_experiment(model, n_grid, reps: int, C: float, seed=0, *, s: int | None = None, eta: float = 0.05,
                         threads: int = 1, options: SolverOptions | None = None, band=FAST_BAND,
                         doubled_model: PopulationModel | None = None, doubled_n: int | None = None) -> ExperimentReport:
    """Mean squared estimation error against n for a row-sparse model.

    Raises :class:`ModelNotSparse` when the support of B* has more than
    ``s`` rows. With ``doubled_model`` (twice the sparsity) the ratio of mean
    errors at ``doubled_n`` (default: the middle of the grid) is added to
    ``extras["s_ratio"]``.
    """
    s_true = model.derived.s
    if s is not None and s_true > s:
        raise ModelNotSparse(f"B* has {s_true} nonzero rows, more than the requested s={s}")
    rep = _rate_experiment("fast-rate", model, n_grid, reps, C, seed, eta, threads, options, "estimation_error", band)
    if doubled_model is not None:
        n_mid = int(doubled_n or sorted(int(n) for n in n_grid)[len(n_grid) // 2])
        a = _rate_experiment("fast-rate", model, [n_mid], reps, C, _key(seed, "s-ratio"), eta, threads, options,
                             "estimation_error", band)
        b = _rate_experiment("fast-rate", doubled_model, [n_mid], reps, C, _key(seed, "s-ratio"), eta, threads,
                             options, "estimation_error", band)
        ratio = b.extras["means"]["estimation_error"][0] / a.extras["means"]["estimation_error"][0]
        rep.extras.update({"s_ratio": float(ratio), "s_ratio_n": n_mid, "s_ratio_s": [s_true, doubled_model.derived.s]})
    return rep


# -- certificates ------------------------------------------------------------------


def certificate_experiment(model, n, reps: int, seed=0, *, lambda_factor: float = 2.5, with_gamma: bool = True,
                           restarts: int = 20, iterations: int = 200, threads: int = 1,
                           options: SolverOptions | None = None) -> ExperimentReport:
    """Evaluate every deterministic bound on ``reps`` fitted replicates.

    ``model`` and ``n`` may be sequences; replicate r uses entry
    ``r % len``. Lambda is ``lambda_factor`` times n^{-1} ||X'E||_{inf,2}
    of the replicate itself. With ``with_gamma`` the restricted eigenvalue
    constant of X / sqrt(n) is estimated (exhaustively for p <= 14, else
    sampled and the fast-rate certificates flagged approximate).

    ``extras["violations"]`` counts, per bound, replicates where the
    hypothesis held and the inequality failed; ``extras["hypothesis_misses"]``
    counts replicates where the hypothesis did not hold.
    """
    models = _as_models(model)
    ns = [int(v) for v in (n if isinstance(n, Sequence) else [n])]
    if reps < 1 or not ns:
        raise BadParameter("need reps >= 1 and at least one n")
    options = options or SolverOptions(tolerance=1e-10, max_iterations=100_000)

    def body(r):
        m = models[r % len(models)]
        nn = ns[r % len(ns)]
        d = m.derived
        ds = sample_dataset(m, nn, _key(seed, "certify", r))
        E = residual_matrix(ds.X, ds.Y, d.b_star)
        lam = lambda_factor * xte_norm(ds.X, E)
        res = fit(Problem(ds.X, ds.Y, lam), options)
        gamma, approx = None, False
        if with_gamma and d.s > 0:
            rep_g = gamma_for_certificate(ds.X, d.b_star, res.b_hat, d.s, seed=_key(seed, "certify-gamma", r),
                                          restarts=restarts, iterations=iterations)
            gamma, approx = rep_g.gamma_estimate, m.p > EXHAUSTIVE_MAX_P
        certs = deterministic_certificates(ds.X, ds.Y, d.b_star, res.b_hat, lam, d.sigma_t, gamma, d.s,
                                           approximate=approx)
        return GridPoint(nn, m.p, m.K, d.s), lam, certs, gamma

    results = map_replicates(body, reps, threads)
    rows, points = [], []
    viol = {b: 0 for b in BOUND_NAMES}
    miss = {b: 0 for b in BOUND_NAMES}
    failures = []
    for r, (pt, lam, certs, gamma) in enumerate(results):
        points.append(pt)
        base = ("certify", pt.n, pt.p, pt.K, pt.s, float(lam), r)
        rows.append(base + ("gamma_x", float("nan") if gamma is None else float(gamma)))
        for c in certs:
            rows.append(base + (f"{c.name}.lhs", c.lhs))
            rows.append(base + (f"{c.name}.rhs", c.rhs))
            rows.append(base + (f"{c.name}.hypothesis_met", float(c.hypothesis_met)))
            if not c.hypothesis_met:
                miss[c.name] += 1
            elif not c.holds:
                viol[c.name] += 1
                failures.append({"replicate": r, "bound": c.name, "lhs": c.lhs, "rhs": c.rhs})
    extras = {
        "lambda_factor": float(lambda_factor),
        "violations": viol,
        "total_violations": int(sum(viol.values())),
        "hypothesis_misses": miss,
        "failures": failures,
    }
    return ExperimentReport("certify", tuple(dict.fromkeys(points)), reps, tuple(rows), {}, extras)
