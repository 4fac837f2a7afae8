"""Seeded generation of simulation instances.

The predictor precision matrix follows an Erdos-Renyi-style recipe: a
common per-row count of off-diagonal entries is drawn once from
Binomial(p, edge_prob), entries are placed uniformly at random in each row
with magnitudes from U[low, high], the matrix is symmetrized by averaging,
given a unit diagonal, and eigen-shifted to enforce a minimum eigenvalue
of spd_eps. The shift is kept in the diagonal (no rescaling back to a unit
diagonal), matching the covariance family used by the reference
experiments; ``unit_diagonal=True`` restores the rescaled variant.

All randomness flows through numpy Generators (PCG64). Replication r of an
experiment uses the independently derived substream keyed by (seed, r), so
replications can run in any order or in parallel without interference.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, GenerationError, NotSpdError
from .lasso import Dataset

__all__ = [
    "GENERATOR_NAME",
    "SimConfig",
    "ModelTruth",
    "replication_rng",
    "gen_precision_er",
    "sample_design",
    "gen_dataset",
]

GENERATOR_NAME = "pcg64"


@dataclass(frozen=True)
class SimConfig:
    """Simulation scenario: model dimensions, signal, and generator knobs."""

    p: int
    n: int
    s0: int
    beta1: float
    seed: int
    sigma: float = 1.0
    edge_prob: float = 0.05
    magnitude_range: tuple[float, float] = (0.4, 0.8)
    sign_mode: str = "positive"
    spd_eps: float = 0.05
    reps: int = 100
    alpha: float = 0.1
    unit_diagonal: bool = False

    def __post_init__(self):
        if self.p < 2 or self.n < 2:
            raise ConfigError(f"need p >= 2 and n >= 2, got p={self.p}, n={self.n}")
        if not 0 <= self.s0 <= self.p:
            raise ConfigError(f"s0 must be in [0, p], got {self.s0}")
        if self.s0 > 0 and self.beta1 == 0.0:
            raise ConfigError("beta1 = 0 with s0 > 0 plants null effects; rejected")
        if self.sigma < 0:
            raise ConfigError(f"sigma must be nonnegative, got {self.sigma}")
        if not 0.0 < self.edge_prob < 1.0:
            raise ConfigError(f"edge_prob must be in (0,1), got {self.edge_prob}")
        lo, hi = self.magnitude_range
        if not 0 < lo < hi:
            raise ConfigError(
                f"magnitude_range must satisfy 0 < low < high, got {lo}, {hi}"
            )
        if self.sign_mode not in ("positive", "random"):
            raise ConfigError(
                f"sign_mode must be positive|random, got {self.sign_mode!r}"
            )
        if self.spd_eps <= 0:
            raise ConfigError(f"spd_eps must be positive, got {self.spd_eps}")
        if self.reps < 1:
            raise ConfigError(f"reps must be >= 1, got {self.reps}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must be in (0,1), got {self.alpha}")
        object.__setattr__(self, "magnitude_range", (float(lo), float(hi)))


@dataclass(frozen=True)
class ModelTruth:
    """Ground truth of one simulated instance."""

    beta: np.ndarray
    support: np.ndarray  # indices with beta != 0, ascending, 0-based
    s0: int
    sigma: float
    Sigma: np.ndarray
    Theta: np.ndarray
    i0: np.ndarray = field(repr=False)
    p0: int = 0
    s_max: int = 0


def replication_rng(seed: int, rep: int) -> np.random.Generator:
    """Independent substream for replication ``rep`` of experiment ``seed``."""
    return np.random.default_rng(np.random.SeedSequence((seed, rep)))


def _place_row_entries(B, j, count, lo, hi, sign_mode, rng):
    if count == 0:
        return
    pos = rng.choice(B.shape[0] - 1, size=count, replace=False)
    cols = np.where(pos < j, pos, pos + 1)  # skip the diagonal slot
    mags = rng.uniform(lo, hi, size=count)
    if sign_mode == "random":
        mags = mags * rng.choice(np.array([-1.0, 1.0]), size=count)
    B[j, cols] = mags


def _gen_precision_impl(p, cfg, rng, per_row_counts):
    """Shared generator body; returns (Theta, Sigma, s_max)."""
    lo, hi = cfg.magnitude_range
    for _ in range(5):
        B = np.zeros((p, p))
        if per_row_counts:
            counts = rng.binomial(p, cfg.edge_prob, size=p)
            s_max = int(counts.max())
            for j in range(p):
                _place_row_entries(B, j, int(counts[j]), lo, hi, cfg.sign_mode, rng)
        else:
            s_max = int(rng.binomial(p, cfg.edge_prob))
            for j in range(p):
                _place_row_entries(B, j, s_max, lo, hi, cfg.sign_mode, rng)
        B = (B + B.T) / 2.0
        np.fill_diagonal(B, 1.0)
        eigvals = np.linalg.eigvalsh(B)
        if not np.isfinite(eigvals).all():
            continue
        lmin = float(eigvals[0])
        if lmin < cfg.spd_eps:
            B = B + (cfg.spd_eps - lmin) * np.eye(p)
        if cfg.unit_diagonal:
            d = np.sqrt(np.diag(B))
            B = B / np.outer(d, d)
        Theta = (B + B.T) / 2.0
        Sigma = np.linalg.inv(Theta)
        Sigma = (Sigma + Sigma.T) / 2.0
        if not (np.isfinite(Theta).all() and np.isfinite(Sigma).all()):
            continue
        return Theta, Sigma, s_max
    raise GenerationError(
        "precision generation failed 5 times (non-finite eigensolve)"
    )


def gen_precision_er(
    p: int,
    cfg: SimConfig,
    rng: np.random.Generator,
    per_row_counts: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """Random sparse precision matrix and its inverse covariance.

    A single s_max ~ Binomial(p, edge_prob) fixes the per-row off-diagonal
    count (per_row_counts=True draws an independent count for each row
    instead). After symmetrization and the spd_eps eigen-shift the matrix
    is returned as is; with cfg.unit_diagonal the diagonal is rescaled
    back to one. Retries with fresh randomness up to 5 times if the
    eigensolve returns non-finite values.
    """
    Theta, Sigma, _ = _gen_precision_impl(p, cfg, rng, per_row_counts)
    return Theta, Sigma


def sample_design(n: int, Sigma: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Gaussian design: rows i.i.d. N(0, Sigma) via the lower Cholesky factor."""
    try:
        L = np.linalg.cholesky(Sigma)
    except np.linalg.LinAlgError as exc:
        raise NotSpdError(f"covariance is not positive definite: {exc}") from exc
    G = rng.standard_normal((n, Sigma.shape[0]))
    return G @ L.T


def gen_dataset(cfg: SimConfig, rng: np.random.Generator) -> tuple[Dataset, ModelTruth]:
    """One simulated instance: design, response, and full ground truth.

    beta has the first s0 coordinates equal to beta1, the rest zero;
    y = X beta + sigma * eps with standard normal noise. sigma = 0 is
    allowed for solver tests and flagged with a warning.
    """
    p = cfg.p
    Theta, Sigma, s_max = _gen_precision_impl(p, cfg, rng, per_row_counts=False)
    X = sample_design(cfg.n, Sigma, rng)
    beta = np.zeros(p)
    beta[: cfg.s0] = cfg.beta1
    if cfg.sigma == 0.0:
        warnings.warn("sigma = 0: noiseless response, solver tests only")
    eps = rng.standard_normal(cfg.n)
    y = X @ beta + cfg.sigma * eps
    support = np.flatnonzero(beta)
    i0 = np.setdiff1d(np.arange(p), support)
    truth = ModelTruth(
        beta=beta,
        support=support,
        s0=int(support.size),
        sigma=float(cfg.sigma),
        Sigma=Sigma,
        Theta=Theta,
        i0=i0,
        p0=int(i0.size),
        s_max=s_max,
    )
    return Dataset(X=X, y=y), truth
