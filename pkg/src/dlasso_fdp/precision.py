"""Relaxed inverse of the Gram matrix via nodewise Lasso regressions.

Each predictor column is regressed on the remaining columns with an L1
penalty; row j of the inverse surrogate is built from those coefficients
scaled by the penalized residual variance tau_sq_j. The p column problems
are independent and run under a deterministic parallel map: each column's
floating-point sequence is fixed, so parallel and sequential construction
agree bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from .errors import (
    DegenerateColumnError,
    DimensionError,
    InvalidDataError,
    InvalidPrecisionError,
)
from .lasso import Dataset, SolverOptions, _cd_core, _EMPTY

__all__ = [
    "NodewiseColumnFit",
    "PrecisionFit",
    "gram",
    "nodewise_lambda",
    "fit_nodewise_column",
    "build_precision",
]

# tau_sq at or below this is treated as a degenerate column (the row of
# the inverse surrogate is 1/tau_sq scaled and would overflow)
TAU_SQ_FLOOR = 1e-12

# nodewise fits are solved to a tighter certificate than the main Lasso so
# the row bound ||(Theta_hat Gram - I)_j||_inf <= lam_j / tau_sq_j holds
# to within 1e-6 after the 1/tau_sq scaling
NODEWISE_KKT_RTOL = 1e-7


@dataclass(frozen=True)
class NodewiseColumnFit:
    """One nodewise regression: column j on all remaining columns."""

    j: int
    gamma_hat: np.ndarray  # length p-1, coefficients for columns != j
    lambda_j: float
    tau_sq: float


@dataclass(frozen=True)
class PrecisionFit:
    """Assembled inverse-Gram surrogate and derived matrices.

    theta_hat row j is (1/tau_sq_j) * (-gamma_j with 1 at position j);
    omega_hat = theta_hat @ gram @ theta_hat.T symmetrized by averaging.
    """

    theta_hat: np.ndarray
    sigma_hat_gram: np.ndarray
    omega_hat: np.ndarray
    kappa: float
    column_fits: list[NodewiseColumnFit]


def gram(data: Dataset) -> np.ndarray:
    """Empirical Gram matrix X^T X / n (symmetric positive semidefinite)."""
    G = data.X.T @ data.X / data.n
    return (G + G.T) / 2.0


def nodewise_lambda(n: int, p: int, kappa: float) -> float:
    """Common nodewise penalty kappa * sqrt(ln(p) / n), identical for all columns."""
    if p < 2:
        raise InvalidDataError(f"p must be >= 2, got {p}")
    if n < 1:
        raise InvalidDataError(f"n must be positive, got {n}")
    if kappa <= 0:
        raise InvalidDataError(f"kappa must be positive, got {kappa}")
    return kappa * np.sqrt(np.log(p) / n)


@njit(cache=True)
def _nodewise_column(X, j, lam, tol, max_sweeps, kkt_tol):
    """Fit column j on the remaining columns; returns (gamma, tau_sq, converged).

    gamma has length p-1 in ascending column order with column j skipped.
    tau_sq = ||x_j - X_-j gamma||^2 / n + 2 lam ||gamma||_1.
    """
    n, p = X.shape
    Xs = np.empty((n, p - 1))
    for k in range(p - 1):
        kk = k if k < j else k + 1
        for i in range(n):
            Xs[i, k] = X[i, kk]
    yj = X[:, j].copy()
    col_norms = np.empty(p - 1)
    for k in range(p - 1):
        s = 0.0
        for i in range(n):
            s += Xs[i, k] * Xs[i, k]
        col_norms[k] = s / n
    beta0 = np.zeros(p - 1)
    obj = np.empty(0)
    gam, r, _, converged = _cd_core(
        Xs, yj, lam, col_norms, tol, max_sweeps, kkt_tol, beta0, obj
    )
    rss = 0.0
    for i in range(n):
        rss += r[i] * r[i]
    l1 = 0.0
    for k in range(p - 1):
        l1 += abs(gam[k])
    tau_sq = rss / n + 2.0 * lam * l1
    return gam, tau_sq, converged


@njit(cache=True, parallel=True)
def _nodewise_batch(X, lams, tol, max_sweeps, kkt_tols):
    """All p nodewise fits; rows of Gamma hold gamma_j expanded to length p."""
    n, p = X.shape
    Gamma = np.zeros((p, p))
    tau_sq = np.empty(p)
    conv = np.zeros(p, np.bool_)
    for j in prange(p):
        gam, ts, ok = _nodewise_column(X, j, lams[j], tol, max_sweeps, kkt_tols[j])
        tau_sq[j] = ts
        conv[j] = ok
        for k in range(p - 1):
            kk = k if k < j else k + 1
            Gamma[j, kk] = gam[k]
    return Gamma, tau_sq, conv


def _nodewise_kkt_tols(G: np.ndarray) -> np.ndarray:
    """Per-column certificate scale from the off-diagonal Gram magnitudes."""
    p = G.shape[0]
    A = np.abs(G).copy()
    np.fill_diagonal(A, 0.0)
    return NODEWISE_KKT_RTOL * np.maximum(1.0, A.max(axis=1))


def fit_nodewise_column(
    data: Dataset, j: int, lambda_j: float, opts: SolverOptions | None = None
) -> NodewiseColumnFit:
    """Regress column j on the others at penalty lambda_j.

    Raises DegenerateColumnError when the penalized residual variance
    tau_sq falls at or below 1e-12 (column j exactly reproduced, e.g. by a
    duplicate column under a tiny penalty).
    """
    opts = opts or SolverOptions()
    if not 0 <= j < data.p:
        raise DimensionError(f"column index {j} out of range for p={data.p}")
    if lambda_j <= 0:
        raise InvalidDataError(f"lambda_j must be positive, got {lambda_j}")
    G = gram(data)
    kkt_tol = float(_nodewise_kkt_tols(G)[j])
    gam, tau_sq, _ = _nodewise_column(
        data.X, j, lambda_j, opts.tol, opts.max_sweeps, kkt_tol
    )
    if tau_sq <= TAU_SQ_FLOOR:
        raise DegenerateColumnError(j, tau_sq)
    return NodewiseColumnFit(j=j, gamma_hat=gam, lambda_j=lambda_j, tau_sq=tau_sq)


def _cv_lambda(data: Dataset, j: int, base_lambda: float, folds: int,
               opts: SolverOptions) -> float:
    """Pick the nodewise penalty for column j by K-fold prediction error.

    Grid is geometric around the supplied base value (x16 down to /16, 17
    points); folds are contiguous index blocks, so selection is
    deterministic.
    """
    X = data.X
    n = data.n
    grid = np.geomspace(base_lambda * 16.0, base_lambda / 16.0, 17)
    bounds = np.linspace(0, n, folds + 1).astype(int)
    cv = np.zeros(grid.size)
    for f in range(folds):
        lo, hi = bounds[f], bounds[f + 1]
        mask = np.ones(n, bool)
        mask[lo:hi] = False
        Xtr = np.ascontiguousarray(np.delete(X[mask], j, axis=1))
        ytr = X[mask, j].copy()
        Xte = np.delete(X[~mask], j, axis=1)
        yte = X[~mask, j]
        col_norms = np.einsum("ij,ij->j", Xtr, Xtr) / Xtr.shape[0]
        ktol = NODEWISE_KKT_RTOL * max(1.0, np.max(np.abs(Xtr.T @ ytr)) / Xtr.shape[0])
        beta = np.zeros(data.p - 1)
        for gi, lam in enumerate(grid):
            beta, _, _, _ = _cd_core(
                Xtr, ytr, lam, col_norms, opts.tol, opts.max_sweeps, ktol, beta, _EMPTY
            )
            err = yte - Xte @ beta
            cv[gi] += float(err @ err)
    return float(grid[int(np.argmin(cv))])


def build_precision(
    data: Dataset,
    kappa: float,
    opts: SolverOptions | None = None,
    parallel: bool = True,
    scale_by_column_norm: bool = False,
    cv_folds: int | None = None,
) -> PrecisionFit:
    """Run all p nodewise regressions and assemble the inverse surrogate.

    The common penalty is nodewise_lambda(n, p, kappa); with
    scale_by_column_norm each column's penalty is additionally scaled by
    the column's root mean square (an option for designs with uneven
    marginal scales, no fidelity claim). cv_folds switches to per-column
    K-fold selection instead of the fixed rule. parallel=False forces the
    sequential path, which is bit-identical to the parallel one.
    """
    opts = opts or SolverOptions()
    G = gram(data)
    n, p = data.n, data.p
    base = nodewise_lambda(n, p, kappa)
    if cv_folds is not None:
        lams = np.array(
            [_cv_lambda(data, j, base, cv_folds, opts) for j in range(p)]
        )
    elif scale_by_column_norm:
        lams = base * np.sqrt(np.diag(G))
    else:
        lams = np.full(p, base)
    kkt_tols = _nodewise_kkt_tols(G)

    if parallel:
        Gamma, tau_sq, _ = _nodewise_batch(
            data.X, lams, opts.tol, opts.max_sweeps, kkt_tols
        )
        bad = np.flatnonzero(tau_sq <= TAU_SQ_FLOOR)
        if bad.size:
            raise DegenerateColumnError(int(bad[0]), float(tau_sq[bad[0]]))
        fits = []
        for j in range(p):
            gam = np.delete(Gamma[j], j)
            fits.append(
                NodewiseColumnFit(
                    j=j, gamma_hat=gam, lambda_j=float(lams[j]),
                    tau_sq=float(tau_sq[j]),
                )
            )
    else:
        fits = [
            fit_nodewise_column(data, j, float(lams[j]), opts) for j in range(p)
        ]
        tau_sq = np.array([f.tau_sq for f in fits])

    theta = np.zeros((p, p))
    for f in fits:
        row = np.zeros(p)
        idx = np.concatenate([np.arange(f.j), np.arange(f.j + 1, p)])
        row[idx] = -f.gamma_hat
        row[f.j] = 1.0
        theta[f.j] = row / f.tau_sq
    omega = theta @ G @ theta.T
    omega = (omega + omega.T) / 2.0  # scrub rounding from the triple product
    d = np.diag(omega)
    if np.any(d <= 0.0) or not np.isfinite(d).all():
        j = int(np.flatnonzero((d <= 0.0) | ~np.isfinite(d))[0])
        raise InvalidPrecisionError(
            f"omega_hat diagonal entry {j} is {d[j]:.3e}, expected positive"
        )
    return PrecisionFit(
        theta_hat=theta,
        sigma_hat_gram=G,
        omega_hat=omega,
        kappa=float(kappa),
        column_fits=fits,
    )
