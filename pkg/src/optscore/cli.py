"""Command-line entry point: ``optscore run CONFIG`` and ``optscore validate CONFIG``.

A config is a YAML mapping. Every run needs ``experiment`` and ``seed``;
the rest depends on the experiment kind (see ``README.md``). Relative paths
are resolved against the directory holding the config file.

Exit codes: 0 success, 1 other error, 2 bad config, 3 certificate
violation, 4 unreadable or missing file.
"""

from __future__ import annotations

import argparse
import os
import sys
from itertools import product
from pathlib import Path

import numpy as np
import yaml

from . import io as oio
from .errors import CertificateViolation, ConfigError, DataFileError, OptScoreError
from .population import PopulationModel, decaying_model, null_model, sparse_model
from .scores import response_from_labels
from .simulate import center_columns, sample_dataset
from .solver import Problem, SolverOptions, fit, lambda_max
from .verify import experiments as vexp
from .verify.classify import train_classifier
from .verify.restricted_eigen import METHODS, re_constant

KINDS = ("fit", "simulate", "concentration", "slow-rate", "fast-rate", "re-constant", "certify", "classify")
GENERATORS = ("sparse", "decaying", "zero")
NEEDS_MODEL = ("simulate", "concentration", "slow-rate", "fast-rate", "certify")
NEEDS_GRID = ("concentration", "slow-rate", "fast-rate", "certify")
EXIT_OK, EXIT_ERROR, EXIT_CONFIG, EXIT_VIOLATION, EXIT_IO = 0, 1, 2, 3, 4


# -- config ----------------------------------------------------------------------


def read_config(path) -> dict:
    """Parse the YAML file; OSError propagates (exit 4), bad YAML is a ConfigError."""
    with open(path) as fh:
        text = fh.read()
    try:
        cfg = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: expected a mapping at top level")
    return cfg


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _as_list(v):
    return list(v) if isinstance(v, (list, tuple)) else [v]


def _path(base: Path, value) -> Path:
    p = Path(str(value)).expanduser()
    return p if p.is_absolute() else (base / p)


def _check_model(sec, base, problems, allow_lists):
    if not isinstance(sec, dict):
        problems.append("model must be a mapping with 'file' or 'generator'")
        return
    if "file" in sec:
        if not _path(base, sec["file"]).is_file():
            problems.append(f"model file not found: {_path(base, sec['file']).resolve()}")
        return
    gen = sec.get("generator")
    if gen not in GENERATORS:
        problems.append(f"model.generator must be one of {', '.join(GENERATORS)} (or give model.file)")
        return
    need = ("p", "K", "s") if gen == "sparse" else ("p", "K")
    for key in need:
        if key not in sec:
            problems.append(f"model.{key} is required for the {gen} generator")
            continue
        vals = _as_list(sec[key]) if allow_lists else [sec[key]]
        if not allow_lists and isinstance(sec[key], list):
            problems.append(f"model.{key} must be a single integer for this experiment")
            continue
        if not vals or not all(_is_int(v) for v in vals):
            problems.append(f"model.{key} must be an integer")
        elif key == "K" and min(vals) < 2:
            problems.append("model.K must be at least 2")
        elif key == "p" and min(vals) < 1:
            problems.append("model.p must be positive")
        elif key == "s" and min(vals) < 0:
            problems.append("model.s must be non-negative")
    for key in ("signal", "decay", "block_rho"):
        if key in sec and not _is_num(sec[key]):
            problems.append(f"model.{key} must be a number")
    if "block_rho" in sec and _is_num(sec["block_rho"]) and not -1 < sec["block_rho"] < 1:
        problems.append("model.block_rho must lie in (-1, 1)")
    if "seed" in sec and not (_is_int(sec["seed"]) and sec["seed"] >= 0):
        problems.append("model.seed must be a non-negative integer")


def _check_data(sec, base, problems, name):
    if not isinstance(sec, dict) or "X" not in sec:
        problems.append(f"{name}.X (CSV design matrix) is required")
        return
    for key in ("X", "Y", "labels"):
        if key in sec and not _path(base, sec[key]).is_file():
            problems.append(f"{name}.{key} file not found: {_path(base, sec[key]).resolve()}")


def check_config(cfg: dict, base: Path) -> list[str]:
    """Every constraint violation in ``cfg``; empty when valid."""
    problems: list[str] = []
    kind = cfg.get("experiment")
    if kind not in KINDS:
        problems.append(f"experiment must be one of {', '.join(KINDS)}")
    seed = cfg.get("seed")
    if seed is None:
        problems.append("seed is required (no entropy fallback)")
    elif not (_is_int(seed) and seed >= 0):
        problems.append("seed must be a non-negative integer")
    if "threads" in cfg and not (_is_int(cfg["threads"]) and cfg["threads"] >= 1):
        problems.append("threads must be a positive integer")
    if "eta" in cfg and not (_is_num(cfg["eta"]) and 0 < cfg["eta"] < 1):
        problems.append("eta must lie in (0,1)")
    if "reps" in cfg and not (_is_int(cfg["reps"]) and cfg["reps"] >= 1):
        problems.append("reps must be a positive integer")
    if "C" in cfg and cfg["C"] != "calibrate" and not (_is_num(cfg["C"]) and cfg["C"] > 0):
        problems.append("C must be a positive number or 'calibrate'")
    if "output" in cfg and not isinstance(cfg["output"], str):
        problems.append("output must be a path")

    if kind in NEEDS_MODEL or (kind == "re-constant" and "matrix" not in cfg):
        if "model" not in cfg:
            problems.append("model is required for this experiment")
        else:
            _check_model(cfg["model"], base, problems, allow_lists=kind in ("concentration", "certify"))
    if kind in NEEDS_GRID or kind == "simulate":
        grid = cfg.get("grid")
        ns = grid.get("n") if isinstance(grid, dict) else None
        if ns is None:
            problems.append("grid.n is required")
        else:
            ns = _as_list(ns)
            if not ns or not all(_is_int(v) and v > 0 for v in ns):
                problems.append("grid values must be positive integers")
    if kind == "concentration" and _is_int(cfg.get("reps")) and cfg["reps"] < 50:
        problems.append("concentration needs reps >= 50")
    cal = cfg.get("calibration")
    if cal is not None:
        if not isinstance(cal, dict):
            problems.append("calibration must be a mapping with n and reps")
        else:
            if "n" in cal and not (_is_int(cal["n"]) and cal["n"] > 0):
                problems.append("calibration.n must be a positive integer")
            if "reps" in cal and not (_is_int(cal["reps"]) and cal["reps"] >= 50):
                problems.append("calibration.reps must be an integer >= 50")
            if "model" in cal:
                _check_model(cal["model"], base, problems, allow_lists=False)
    if "band" in cfg:
        band = cfg["band"]
        if not (isinstance(band, list) and len(band) == 2 and all(_is_num(v) for v in band) and band[0] < band[1]):
            problems.append("band must be [low, high] with low < high")
    solver = cfg.get("solver", {})
    if not isinstance(solver, dict):
        problems.append("solver must be a mapping")
    else:
        if solver.get("algorithm", "bcd") not in ("bcd", "proximal-gradient"):
            problems.append("solver.algorithm must be bcd or proximal-gradient")
        if "tolerance" in solver and not (_is_num(solver["tolerance"]) and solver["tolerance"] > 0):
            problems.append("solver.tolerance must be positive")
        if "max_iterations" in solver and not (_is_int(solver["max_iterations"]) and solver["max_iterations"] > 0):
            problems.append("solver.max_iterations must be a positive integer")

    if kind in ("fit", "classify"):
        _check_data(cfg.get("data"), base, problems, "data")
        data = cfg.get("data") or {}
        if isinstance(data, dict) and "labels" not in data and ("Y" not in data or kind == "classify"):
            problems.append("data.labels is required" if kind == "classify" else "data needs labels or Y")
        if kind == "classify":
            _check_data(cfg.get("test"), base, problems, "test")
        lam = cfg.get("lambda", "lambda_max")
        if lam != "lambda_max" and not (_is_num(lam) and lam >= 0):
            problems.append("lambda must be a non-negative number or 'lambda_max'")
        if "lambda_ratio" in cfg and not (_is_num(cfg["lambda_ratio"]) and 0 <= cfg["lambda_ratio"] <= 1):
            problems.append("lambda_ratio must lie in [0, 1]")
    if kind == "re-constant":
        if "matrix" in cfg and not _path(base, cfg["matrix"]).is_file():
            problems.append(f"matrix file not found: {_path(base, cfg['matrix']).resolve()}")
        if not (_is_int(cfg.get("s")) and cfg["s"] >= 1):
            problems.append("s must be a positive integer")
        if "c" in cfg and not (_is_num(cfg["c"]) and cfg["c"] >= 0):
            problems.append("c must be a non-negative number")
        if "K" in cfg and not (_is_int(cfg["K"]) and cfg["K"] >= 2):
            problems.append("K must be an integer >= 2")
        if cfg.get("method", "exhaustive-supports") not in METHODS:
            problems.append(f"method must be one of {', '.join(METHODS)}")
        if "restarts" in cfg and not (_is_int(cfg["restarts"]) and cfg["restarts"] >= 20):
            problems.append("restarts must be an integer >= 20")
        if "sample_n" in cfg and not (_is_int(cfg["sample_n"]) and cfg["sample_n"] > 0):
            problems.append("sample_n must be a positive integer")
    if kind == "fast-rate":
        if "s" in cfg and not (_is_int(cfg["s"]) and cfg["s"] >= 0):
            problems.append("s must be a non-negative integer")
        if "doubled_s" in cfg and not (_is_int(cfg["doubled_s"]) and cfg["doubled_s"] > 0):
            problems.append("doubled_s must be a positive integer")
    if kind == "certify" and "lambda_factor" in cfg and not (_is_num(cfg["lambda_factor"]) and cfg["lambda_factor"] > 0):
        problems.append("lambda_factor must be positive")
    return problems


# -- helpers -----------------------------------------------------------------------


def _build_model(sec: dict, base: Path, **override) -> PopulationModel:
    if "file" in sec:
        return oio.load_model(_path(base, sec["file"]))
    params = {**sec, **override}
    gen, p, K = params["generator"], int(params["p"]), int(params["K"])
    seed = params.get("seed", 0)
    if gen == "sparse":
        return sparse_model(p, K, int(params["s"]), signal=params.get("signal", 1.0), seed=seed,
                            block_rho=params.get("block_rho", 0.0))
    if gen == "decaying":
        return decaying_model(p, K, signal=params.get("signal", 1.0), decay=params.get("decay", 1.0), seed=seed)
    return null_model(p, K)


def _model_list(sec: dict, base: Path) -> list[PopulationModel]:
    if "file" in sec:
        return [oio.load_model(_path(base, sec["file"]))]
    keys = [k for k in ("p", "K", "s") if k in sec]
    combos = product(*[_as_list(sec[k]) for k in keys])
    return [_build_model(sec, base, **dict(zip(keys, c))) for c in combos]


def _solver_options(cfg, **defaults) -> SolverOptions:
    sec = {**defaults, **(cfg.get("solver") or {})}
    return SolverOptions(
        algorithm=sec.get("algorithm", "bcd"),
        tolerance=float(sec.get("tolerance", 1e-9)),
        max_iterations=int(sec.get("max_iterations", 20_000)),
        standardize=bool(sec.get("standardize", False)),
    )


def _load_xy(data: dict, base: Path, K=None):
    X_raw = oio.read_matrix(_path(base, data["X"]))
    X, means = center_columns(X_raw)
    labels = None
    if "labels" in data:
        labels = oio.read_matrix(_path(base, data["labels"])).ravel().astype(int)
        _, _, Y = response_from_labels(labels, K or int(labels.max()))
    else:
        Y = oio.read_matrix(_path(base, data["Y"]))
    return X, Y, means, labels


def _resolve_lambda(cfg, X, Y) -> float:
    lam = cfg.get("lambda", "lambda_max")
    if lam == "lambda_max":
        lam = lambda_max(X, Y)
    return float(lam) * float(cfg.get("lambda_ratio", 1.0))


def _write(path: Path, text: str) -> str:
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return str(path.resolve())


def _calibrate(cfg, base, model, n_grid, threads) -> float:
    cal = cfg.get("calibration") or {}
    cal_model = _build_model(cal["model"], base) if "model" in cal else model
    n = int(cal.get("n", sorted(n_grid)[len(n_grid) // 2]))
    reps = int(cal.get("reps", 200))
    return vexp.calibrate_constant(cal_model, n, reps, float(cfg.get("eta", 0.05)), (cfg["seed"], "calibration"), threads)


# -- runners: each returns (output files, resolved values, summary lines) ------------


def _run_fit(cfg, base, out, threads):
    X, Y, _, _ = _load_xy(cfg["data"], base, cfg.get("K"))
    lam = _resolve_lambda(cfg, X, Y)
    res = fit(Problem(X, Y, lam), _solver_options(cfg))
    files = [
        _write(out / "fit_report.yaml", oio.fit_report(res)),
        _write(out / "b_hat.csv", oio.matrix_to_csv(res.b_hat)),
    ]
    lines = [f"lambda = {lam:.6g}", f"active rows = {res.active_rows.size}", f"kkt residual = {res.kkt_residual:.3g}"]
    return files, {"lambda": lam}, lines


def _run_simulate(cfg, base, out, threads):
    model = _build_model(cfg["model"], base)
    n = int(_as_list(cfg["grid"]["n"])[0])
    ds = sample_dataset(model, n, (cfg["seed"], "simulate"), stratified=bool(cfg.get("stratified", False)))
    oio.save_model(out / "model.yaml", model)
    oio.export_dataset(ds, out, model_file=str((out / "model.yaml").resolve()))
    files = [str((out / f).resolve()) for f in ("X.csv", "labels.csv", "dataset.yaml", "model.yaml")]
    return files, {}, [f"sampled n={n}, p={model.p}, K={model.K}"]


def _run_concentration(cfg, base, out, threads):
    models = _model_list(cfg["model"], base)
    n_grid = [int(v) for v in _as_list(cfg["grid"]["n"])]
    eta = float(cfg.get("eta", 0.05))
    C = cfg.get("C", "calibrate")
    resolved = {}
    if C == "calibrate" and "calibration" in cfg:
        C = _calibrate(cfg, base, models[0], n_grid, threads)
        resolved["calibrated_C"] = C
    rep = vexp.concentration_experiment(models, n_grid, int(cfg.get("reps", 200)), eta, cfg["seed"],
                                        C=None if C == "calibrate" else float(C), threads=threads)
    if C == "calibrate":
        resolved["calibrated_C"] = rep.extras["calibrated_C"]
    ex = rep.extras
    resolved.update({"coverage": ex["coverage"], "n_ratios": ex["n_ratios"], "k_ratios": ex["k_ratios"],
                     "c_stable": ex["c_stable"], "C_used": ex["C_used"]})
    lines = [f"C used = {ex['C_used']:.6g}", f"min coverage = {min(ex['coverage']):.4f}"]
    lines += [f"quantile ratio n={r['n']} vs {4 * r['n']} (p={r['p']}, K={r['K']}): {r['ratio']:.4f}" for r in ex["n_ratios"]]
    lines += [f"quantile ratio K=5 vs K=2 (n={r['n']}, p={r['p']}): {r['ratio']:.4f}" for r in ex["k_ratios"]]
    return list(rep.write(out)), resolved, lines


def _run_rate(cfg, base, out, threads, kind):
    model = _build_model(cfg["model"], base)
    n_grid = [int(v) for v in _as_list(cfg["grid"]["n"])]
    eta = float(cfg.get("eta", 0.05))
    C = cfg.get("C", "calibrate")
    resolved = {}
    if C == "calibrate":
        C = _calibrate(cfg, base, model, n_grid, threads)
        resolved["calibrated_C"] = C
    opts = _solver_options(cfg, tolerance=1e-8)
    kw = dict(eta=eta, threads=threads, options=opts)
    if "band" in cfg:
        kw["band"] = tuple(cfg["band"])
    reps = int(cfg.get("reps", 100))
    if kind == "slow-rate":
        rep = vexp.slow_rate_experiment(model, n_grid, reps, float(C), cfg["seed"], **kw)
    else:
        if "doubled_s" in cfg:
            kw["doubled_model"] = _build_model(cfg["model"], base, s=int(cfg["doubled_s"]))
        rep = vexp.fast_rate_experiment(model, n_grid, reps, float(C), cfg["seed"], s=cfg.get("s"), **kw)
    ex = rep.extras
    resolved.update({"slopes": rep.slopes, "slope_in_band": ex["slope_in_band"], "band": ex["band"]})
    lines = [f"C = {float(C):.6g}"]
    lines += [f"slope of mean {m} vs n: {v:.4f}" for m, v in rep.slopes.items()]
    lines.append(f"{ex['slope_metric']} slope in band {ex['band']}: {'yes' if ex['slope_in_band'] else 'no'}")
    if "s_ratio" in ex:
        resolved["s_ratio"] = ex["s_ratio"]
        lines.append(f"error ratio s={ex['s_ratio_s'][1]} vs s={ex['s_ratio_s'][0]}: {ex['s_ratio']:.4f}")
    return list(rep.write(out)), resolved, lines


def _run_re_constant(cfg, base, out, threads):
    K = cfg.get("K")
    if "matrix" in cfg:
        Q = oio.read_matrix(_path(base, cfg["matrix"]))
        gram, K = None, K or 2
        source = "matrix"
    else:
        model = _build_model(cfg["model"], base)
        K = K or model.K
        if "sample_n" in cfg:
            ds = sample_dataset(model, int(cfg["sample_n"]), (cfg["seed"], "re-constant"))
            Q, gram, source = None, ds.X.T @ ds.X / ds.n, "sample"
        else:
            Q, gram, source = None, model.derived.sigma_t, "population"
    rep = re_constant(Q, int(cfg["s"]), float(cfg.get("c", 3.0)), int(K), method=cfg.get("method", "exhaustive-supports"),
                      restarts=int(cfg.get("restarts", 20)), iterations=int(cfg.get("iterations", 500)),
                      seed=(cfg["seed"], "re-constant"), gram=gram)
    rows = [("source", source), ("s", rep.s), ("c", rep.c), ("K", rep.K), ("gamma", rep.gamma_estimate),
            ("method", rep.method), ("certified", rep.certified), ("supports_probed", rep.supports_probed)]
    text = "key,value\n" + "".join(f"{k},{v if isinstance(v, str) else oio.fmt(v)}\n" for k, v in rows)
    files = [_write(out / "re_constant.csv", text)]
    return files, {"gamma": rep.gamma_estimate}, [f"gamma estimate = {rep.gamma_estimate:.6g} ({rep.note})"]


def _run_certify(cfg, base, out, threads):
    models = _model_list(cfg["model"], base)
    n = [int(v) for v in _as_list(cfg["grid"]["n"])]
    rep = vexp.certificate_experiment(models, n, int(cfg.get("reps", 100)), cfg["seed"],
                                      lambda_factor=float(cfg.get("lambda_factor", 2.5)), threads=threads,
                                      options=_solver_options(cfg, tolerance=1e-10, max_iterations=100_000))
    files = list(rep.write(out))
    ex = rep.extras
    lines = [f"replicates = {rep.reps}", f"violations = {ex['total_violations']}"]
    lines += [f"  {k}: hypothesis missed on {v} replicates" for k, v in ex["hypothesis_misses"].items() if v]
    return files, {"violations": ex["violations"], "failures": ex["failures"]}, lines


def _run_classify(cfg, base, out, threads):
    X, Y, means, labels = _load_xy(cfg["data"], base, cfg.get("K"))
    K = int(cfg.get("K") or labels.max())
    lam = _resolve_lambda(cfg, X, Y)
    res = fit(Problem(X, Y, lam), _solver_options(cfg))
    clf = train_classifier(X, labels, res.b_hat, K, means)
    X_test = oio.read_matrix(_path(base, cfg["test"]["X"]))
    pred = clf.predict(X_test)
    files = [_write(out / "predictions.csv", oio.matrix_to_csv(pred[:, None], header=["label"]))]
    resolved, lines = {"lambda": lam}, [f"lambda = {lam:.6g}", f"predicted {pred.size} points"]
    if "labels" in cfg["test"]:
        truth = oio.read_matrix(_path(base, cfg["test"]["labels"])).ravel().astype(int)
        acc = float(np.mean(truth == pred))
        resolved["accuracy"] = acc
        lines.append(f"accuracy = {acc:.4f}")
    return files, resolved, lines


RUNNERS = {
    "fit": _run_fit,
    "simulate": _run_simulate,
    "concentration": _run_concentration,
    "slow-rate": lambda *a: _run_rate(*a, kind="slow-rate"),
    "fast-rate": lambda *a: _run_rate(*a, kind="fast-rate"),
    "re-constant": _run_re_constant,
    "certify": _run_certify,
    "classify": _run_classify,
}

_PATH_KEYS = {"model": ("file",), "data": ("X", "Y", "labels"), "test": ("X", "labels")}


def _absolute_config(cfg: dict, base: Path, out: Path) -> dict:
    """Copy of ``cfg`` with every file path made absolute, so it runs from anywhere."""
    res = yaml.safe_load(yaml.safe_dump(cfg))
    for sec, keys in _PATH_KEYS.items():
        if isinstance(res.get(sec), dict):
            for k in keys:
                if k in res[sec]:
                    res[sec][k] = str(_path(base, res[sec][k]).resolve())
    cal = res.get("calibration")
    if isinstance(cal, dict) and isinstance(cal.get("model"), dict) and "file" in cal["model"]:
        cal["model"]["file"] = str(_path(base, cal["model"]["file"]).resolve())
    if "matrix" in res:
        res["matrix"] = str(_path(base, res["matrix"]).resolve())
    res["output"] = str(out.resolve())
    return res


def _plain(v):
    """YAML-safe copy of nested results (numpy scalars to Python)."""
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.integer, int)) and not isinstance(v, bool):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def run(config_path, output=None, threads=None, quiet=False) -> int:
    """Run one config; returns the process exit code."""
    cfg_path = Path(config_path)
    cfg = read_config(cfg_path)
    base = cfg_path.resolve().parent
    problems = check_config(cfg, base)
    if problems:
        raise ConfigError("; ".join(problems))
    kind = cfg["experiment"]
    out = Path(output) if output else _path(base, cfg.get("output", f"{kind}-output"))
    out.mkdir(parents=True, exist_ok=True)
    threads = threads or cfg.get("threads") or os.cpu_count() or 1

    files, resolved, lines = RUNNERS[kind](cfg, base, out, int(threads))

    manifest = _absolute_config(cfg, base, out)
    if "calibrated_C" in resolved:
        manifest["C"] = float(resolved["calibrated_C"])
        manifest.pop("calibration", None)
    manifest["provenance"] = {"outputs": files, "results": _plain(resolved)}
    _write(out / "manifest.yaml", yaml.safe_dump(manifest, sort_keys=False))
    _write(out / "summary.txt", "\n".join([f"experiment: {kind}"] + lines) + "\n")
    if not quiet:
        print("\n".join(lines))
    if kind == "certify" and resolved["failures"]:
        first = resolved["failures"][0]
        raise CertificateViolation(
            f"{len(resolved['failures'])} violation(s); first: {first['bound']} on replicate {first['replicate']}"
            f" ({first['lhs']:.6g} > {first['rhs']:.6g})"
        )
    return EXIT_OK


def validate(config_path) -> list[str]:
    cfg_path = Path(config_path)
    cfg = read_config(cfg_path)
    return check_config(cfg, cfg_path.resolve().parent)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="optscore", description="Sparse optimal scoring fits and verification experiments.")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the experiment described by a config file")
    r.add_argument("config")
    r.add_argument("--threads", type=int, default=None, help="worker threads (default: CPU count)")
    r.add_argument("--output", default=None, help="output directory, overrides the config")
    r.add_argument("--quiet", action="store_true")
    v = sub.add_parser("validate", help="check a config file without running it")
    v.add_argument("config")
    v.add_argument("--quiet", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            problems = validate(args.config)
            if problems:
                for msg in problems:
                    print(msg, file=sys.stderr)
                return EXIT_CONFIG
            if not args.quiet:
                print("ok")
            return EXIT_OK
        if args.threads is not None and args.threads < 1:
            raise ConfigError("--threads must be positive")
        return run(args.config, args.output, args.threads, args.quiet)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CertificateViolation as exc:
        print(f"certificate violation: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except (OSError, DataFileError) as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OptScoreError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
