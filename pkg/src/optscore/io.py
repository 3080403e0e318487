"""File formats: CSV matrices, YAML model files, fit reports, dataset export."""

from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np
import yaml

from .errors import DataFileError, InvalidModel
from .population import PopulationModel


def fmt(x) -> str:
    """Shortest round-tripping text for a float; ints stay ints."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def read_matrix(path) -> np.ndarray:
    """Read a dense row-major CSV matrix; a non-numeric first row is a header."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise DataFileError(f"{path}: no data")
    try:
        [float(c) for c in rows[0]]
    except ValueError:
        rows = rows[1:]
    try:
        data = np.array([[float(c) for c in r] for r in rows])
    except ValueError as exc:
        raise DataFileError(f"{path}: {exc}") from None
    if data.ndim != 2:
        raise DataFileError(f"{path}: ragged rows")
    return data


def matrix_to_csv(A, header=None) -> str:
    A = np.atleast_2d(np.asarray(A))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header is not None:
        w.writerow(header)
    for row in A:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_matrix(path, A, header=None) -> None:
    Path(path).write_text(matrix_to_csv(A, header))


# -- model files ----------------------------------------------------------


def model_to_dict(model: PopulationModel) -> dict:
    return {
        "K": int(model.K),
        "p": int(model.p),
        "pi": [float(v) for v in model.pi],
        "means": [[float(v) for v in row] for row in model.means],
        # lower triangle only
        "sigma_w": [[float(v) for v in model.sigma_w[i, : i + 1]] for i in range(model.p)],
    }


def model_from_dict(d: dict) -> PopulationModel:
    try:
        K, p = int(d["K"]), int(d["p"])
        pi = np.asarray(d["pi"], dtype=float)
        means = np.asarray(d["means"], dtype=float)
        rows = d["sigma_w"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidModel(f"malformed model: {exc}") from None
    if pi.shape != (K,):
        raise InvalidModel(f"pi must have K={K} entries")
    if means.shape != (p, K):
        raise InvalidModel(f"means must be {p} x {K}, got {means.shape}")
    if len(rows) != p:
        raise InvalidModel(f"sigma_w needs {p} rows")
    S = np.zeros((p, p))
    for i, row in enumerate(rows):
        row = [float(v) for v in row]
        if len(row) == i + 1:
            S[i, : i + 1] = row
            S[: i + 1, i] = row
        elif len(row) == p:
            S[i] = row
        else:
            raise InvalidModel(f"sigma_w row {i} has {len(row)} entries; expected {i + 1} or {p}")
    return PopulationModel(pi=pi, means=means, sigma_w=S)


def save_model(path, model: PopulationModel) -> None:
    Path(path).write_text(yaml.safe_dump(model_to_dict(model), sort_keys=False))


def load_model(path) -> PopulationModel:
    with open(path) as fh:
        try:
            d = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise DataFileError(f"{path}: not valid YAML: {exc}") from None
    if not isinstance(d, dict):
        raise InvalidModel(f"{path}: expected a mapping")
    return model_from_dict(d)


# -- reports --------------------------------------------------------------


def fit_report(result) -> str:
    """Key/value header followed by B_hat as a CSV block."""
    head = {
        "lambda": float(result.lam),
        "objective": float(result.objective),
        "iterations": int(result.iterations),
        "kkt_residual": float(result.kkt_residual),
        "converged": bool(result.converged),
        "algorithm": result.algorithm,
        "active_rows": [int(j) for j in result.active_rows],
    }
    text = yaml.safe_dump(head, sort_keys=False, default_flow_style=None)
    return text + "b_hat: |\n" + "".join("  " + line + "\n" for line in matrix_to_csv(result.b_hat).splitlines())


def read_fit_report(path) -> dict:
    with open(path) as fh:
        d = yaml.safe_load(fh)
    d["b_hat"] = np.array([[float(c) for c in line.split(",")] for line in d["b_hat"].splitlines() if line])
    for k in ("lambda", "objective", "kkt_residual"):
        d[k] = float(d[k])
    return d


def export_dataset(dataset, directory, model_file=None) -> dict:
    """Write X.csv, labels.csv and dataset.yaml for a sampled dataset."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_matrix(directory / "X.csv", dataset.X)
    write_matrix(directory / "labels.csv", dataset.labels[:, None], header=["label"])
    manifest = {
        "n": dataset.n,
        "p": dataset.p,
        "K": dataset.K,
        "seed": list(dataset.seed),
        "model_file": None if model_file is None else str(model_file),
        "column_means": [float(v) for v in dataset.column_means],
    }
    (directory / "dataset.yaml").write_text(yaml.safe_dump(manifest, sort_keys=False))
    return manifest
