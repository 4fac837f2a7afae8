"""File formats: dataset CSVs, truth JSON, precision dumps, report files.

CSV dialect is comma-separated with '.' decimals and a mandatory header
row: ``x1..xp`` for the design, ``y`` for the response. Indices in files
are 1-based; in-memory indices are 0-based throughout the package.
Report CSVs start with a provenance comment line (seed, generator, method
settings) so every artifact is self-describing.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .errors import CsvParseError, InvalidDataError
from .lasso import Dataset
from .precision import PrecisionFit, NodewiseColumnFit
from .simulate import GENERATOR_NAME, ModelTruth

__all__ = [
    "write_x_csv",
    "write_y_csv",
    "read_x_csv",
    "read_y_csv",
    "read_dataset",
    "write_truth_json",
    "read_truth_support",
    "save_precision",
    "load_precision",
    "write_theta_csv",
    "provenance_line",
]


def _fmt(v: float) -> str:
    return repr(float(v))


def write_x_csv(X: np.ndarray, path: str) -> None:
    p = X.shape[1]
    with open(path, "w") as fh:
        fh.write(",".join(f"x{j}" for j in range(1, p + 1)) + "\n")
        for row in X:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_y_csv(y: np.ndarray, path: str) -> None:
    with open(path, "w") as fh:
        fh.write("y\n")
        for v in y:
            fh.write(_fmt(v) + "\n")


def _parse_rows(path: str, expect_width: int | None):
    rows = []
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise CsvParseError(path, 1, "empty file, expected a header row")
    width = expect_width
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            raise CsvParseError(path, lineno, "blank line")
        parts = line.split(",")
        if width is None:
            width = len(parts)
        if len(parts) != width:
            raise CsvParseError(
                path, lineno, f"expected {width} fields, got {len(parts)}"
            )
        try:
            rows.append([float(v) for v in parts])
        except ValueError as exc:
            raise CsvParseError(path, lineno, f"non-numeric value ({exc})") from exc
    return lines[0], rows


def read_x_csv(path: str) -> np.ndarray:
    header, rows = _parse_rows(path, None)
    cols = header.split(",")
    expected = [f"x{j}" for j in range(1, len(cols) + 1)]
    if cols != expected:
        raise CsvParseError(path, 1, f"header must be x1..x{len(cols)}, got {header!r}")
    if not rows:
        raise CsvParseError(path, 2, "no data rows")
    X = np.asarray(rows, dtype=np.float64)
    if X.shape[1] != len(cols):
        raise CsvParseError(path, 2, "row width does not match header")
    return X


def read_y_csv(path: str) -> np.ndarray:
    header, rows = _parse_rows(path, 1)
    if header.strip() != "y":
        raise CsvParseError(path, 1, f"header must be 'y', got {header!r}")
    if not rows:
        raise CsvParseError(path, 2, "no data rows")
    return np.asarray(rows, dtype=np.float64)[:, 0]


def read_dataset(x_path: str, y_path: str) -> Dataset:
    X = read_x_csv(x_path)
    y = read_y_csv(y_path)
    if X.shape[0] != y.shape[0]:
        raise InvalidDataError(
            f"{x_path} has {X.shape[0]} rows but {y_path} has {y.shape[0]}"
        )
    return Dataset(X=X, y=y)


def write_truth_json(truth: ModelTruth, seed: int, path: str) -> None:
    """Ground-truth record: beta, 1-based support, sigma, seed, generator."""
    payload = {
        "beta": [float(v) for v in truth.beta],
        "support": [int(j) + 1 for j in truth.support],
        "sigma": float(truth.sigma),
        "seed": int(seed),
        "generator": GENERATOR_NAME,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def read_truth_support(path: str) -> np.ndarray:
    """0-based support indices from a truth JSON file."""
    with open(path) as fh:
        payload = json.load(fh)
    if "support" not in payload:
        raise InvalidDataError(f"{path}: missing 'support' field")
    return np.asarray([int(j) - 1 for j in payload["support"]], dtype=np.int64)


def save_precision(fit: PrecisionFit, path: str) -> None:
    """Binary dump (.npz) of an inverse-surrogate fit for reuse on the same design."""
    np.savez_compressed(
        path,
        theta_hat=fit.theta_hat,
        sigma_hat_gram=fit.sigma_hat_gram,
        omega_hat=fit.omega_hat,
        kappa=np.asarray(fit.kappa),
        tau_sq=np.asarray([f.tau_sq for f in fit.column_fits]),
        lambda_j=np.asarray([f.lambda_j for f in fit.column_fits]),
        gamma_hat=np.vstack([f.gamma_hat for f in fit.column_fits]),
    )


def load_precision(path: str) -> PrecisionFit:
    with np.load(path) as z:
        p = z["theta_hat"].shape[0]
        fits = [
            NodewiseColumnFit(
                j=j,
                gamma_hat=z["gamma_hat"][j].copy(),
                lambda_j=float(z["lambda_j"][j]),
                tau_sq=float(z["tau_sq"][j]),
            )
            for j in range(p)
        ]
        return PrecisionFit(
            theta_hat=z["theta_hat"].copy(),
            sigma_hat_gram=z["sigma_hat_gram"].copy(),
            omega_hat=z["omega_hat"].copy(),
            kappa=float(z["kappa"]),
            column_fits=fits,
        )


def write_theta_csv(fit: PrecisionFit, path: str) -> None:
    p = fit.theta_hat.shape[0]
    with open(path, "w") as fh:
        fh.write(",".join(f"t{j}" for j in range(1, p + 1)) + "\n")
        for row in fit.theta_hat:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def provenance_line(prov: dict) -> str:
    """Single comment line embedded at the top of every report CSV."""
    parts = [f"{k}={prov[k]}" for k in sorted(prov)]
    return "# " + " ".join(parts)


def ensure_dir(path: str) -> None:
    os.makedirs(path, exist_ok=True)
