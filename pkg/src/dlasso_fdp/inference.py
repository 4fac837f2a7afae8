"""Selection layer: FDP estimation, threshold search, baselines, evaluation.

With R(t) = #{j : |z_j| > t}, the plug-in estimate of the false discovery
proportion of the rule "select |z_j| > t" is

    fdp_hat(t) = 2 p Phi(-t) / max(R(t), 1)

(uncapped; only comparisons against the target level matter). The exact
minimizer t_alpha = min{t >= 0 : fdp_hat(t) <= alpha} is computed on the
piecewise structure between order statistics of |z|. Note that selecting
{|z_j| > exact t_alpha} coincides with the Benjamini-Hochberg step-up on
two-sided normal p-values; the selection method therefore defaults to a
conservative fixed-step threshold search (t restricted to multiples of
``t_step``), which keeps the plug-in rule distinct from the BH baseline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import ConfigError, DimensionError, InvalidDataError

__all__ = [
    "SelectionResult",
    "EvalMetrics",
    "CurvePoint",
    "normal_cdf",
    "normal_quantile",
    "fdp_hat",
    "find_threshold",
    "find_threshold_grid",
    "select_fdp",
    "select_bh",
    "select_fwer",
    "rank_by_z",
    "evaluate",
    "fdp_tpp_curve",
]

T_STEP_DEFAULT = 0.1


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of one selection rule on a statistic vector."""

    method: str  # dlasso_fdp | dlasso_bh | dlasso_fwer
    threshold: float  # |z| cutoff; implied cutoff for step procedures
    selected: np.ndarray  # 0-based indices, ascending
    fdp_hat_at_threshold: float
    alpha: float


@dataclass(frozen=True)
class EvalMetrics:
    """Truth-based counts for one selection: V false, R total."""

    V: int
    R: int
    FDP: float
    TPP: float


@dataclass(frozen=True)
class CurvePoint:
    tpp_level: float
    fdp: float


def normal_cdf(x: float) -> float:
    """Standard normal CDF (machine accurate on |x| <= 8)."""
    return float(ndtr(x))


def normal_quantile(u: float) -> float:
    """Inverse standard normal CDF; domain is the open interval (0, 1)."""
    if not 0.0 < u < 1.0:
        raise InvalidDataError(f"quantile input must be in (0,1), got {u}")
    return float(ndtri(u))


def _check_z(z) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 1 or z.size == 0:
        raise DimensionError(f"z must be a nonempty 1-d vector, got shape {z.shape}")
    if not np.isfinite(z).all():
        raise InvalidDataError("non-finite statistic values")
    return z


def _check_alpha(alpha: float) -> float:
    if not 0.0 < alpha < 1.0:
        raise InvalidDataError(f"alpha must be in (0,1), got {alpha}")
    return float(alpha)


def fdp_hat(z, t: float) -> float:
    """Plug-in FDP estimate 2 p Phi(-t) / max(R(t), 1); may exceed 1."""
    z = _check_z(z)
    if t < 0:
        raise InvalidDataError(f"t must be nonnegative, got {t}")
    R = int(np.sum(np.abs(z) > t))
    return 2.0 * z.size * float(ndtr(-t)) / max(R, 1)


def fdp_hat_curve(z, t_grid) -> np.ndarray:
    """Vectorized fdp_hat over an increasing grid of thresholds."""
    z = _check_z(z)
    t_grid = np.asarray(t_grid, dtype=np.float64)
    a = np.sort(np.abs(z))
    R = z.size - np.searchsorted(a, t_grid, side="right")
    return 2.0 * z.size * ndtr(-t_grid) / np.maximum(R, 1)


def find_threshold(z, alpha: float) -> float:
    """Exact minimum t >= 0 with fdp_hat(z, t) <= alpha.

    On the interval between consecutive order statistics of |z| the count
    R is constant and fdp_hat is continuous and decreasing, so the
    interval-local minimizer is max(lower endpoint, the root of
    2 p Phi(-t) = alpha R). The global answer is the smallest feasible
    local minimizer over all intervals; the interval above max|z| is
    always feasible, so the search is total. A few one-ulp nudges absorb
    quantile rounding so the returned t always satisfies the inequality.
    """
    z = _check_z(z)
    alpha = _check_alpha(alpha)
    p = z.size
    a = np.sort(np.abs(z))[::-1]
    # interval k (R = k on [lower_k, upper_k)): upper_0 = inf, lower_p = 0
    ks = np.arange(p + 1)
    upper = np.concatenate([[np.inf], a])  # upper[k] = a_(k), inf for k = 0
    lower = np.concatenate([a, [0.0]])  # lower[k] = a_(k+1), 0 for k = p
    roots = np.maximum(-ndtri(alpha * np.maximum(ks, 1) / (2.0 * p)), 0.0)
    cand = np.maximum(lower, roots)
    best = np.inf
    for k in range(p, -1, -1):
        t = cand[k]
        hi = upper[k]
        if t >= hi:
            continue
        # absorb inverse-CDF rounding: fdp_hat must hold at the answer
        for _ in range(64):
            if fdp_hat(z, t) <= alpha:
                break
            t = np.nextafter(t, np.inf)
            if t >= hi:
                break
        else:
            continue
        if t < hi and fdp_hat(z, t) <= alpha and t < best:
            best = t
    return float(best)


def find_threshold_grid(z, alpha: float, step: float = T_STEP_DEFAULT) -> float:
    """Smallest multiple of ``step`` with fdp_hat <= alpha (conservative search)."""
    z = _check_z(z)
    alpha = _check_alpha(alpha)
    if step <= 0:
        raise InvalidDataError(f"step must be positive, got {step}")
    p = z.size
    # beyond both max|z| and the R=0 root the estimate is certainly <= alpha
    t_stop = max(float(np.max(np.abs(z))), -float(ndtri(alpha / (2.0 * p)))) + step
    ts = np.arange(0.0, t_stop + step, step)
    est = fdp_hat_curve(z, ts)
    idx = np.flatnonzero(est <= alpha)
    return float(ts[idx[0]])


def _result(method: str, z: np.ndarray, t: float, alpha: float) -> SelectionResult:
    selected = np.flatnonzero(np.abs(z) > t)
    return SelectionResult(
        method=method,
        threshold=float(t),
        selected=selected,
        fdp_hat_at_threshold=fdp_hat(z, t),
        alpha=alpha,
    )


def select_fdp(z, alpha: float, t_step: float | None = T_STEP_DEFAULT) -> SelectionResult:
    """Select {j : |z_j| > t_alpha} with t_alpha from the plug-in FDP rule.

    t_step=None uses the exact interval search (equivalent to BH, see
    module docstring); the default fixed-step search rounds the threshold
    up to the next grid multiple and is slightly conservative.
    """
    z = _check_z(z)
    alpha = _check_alpha(alpha)
    if t_step is None:
        t = find_threshold(z, alpha)
    else:
        t = find_threshold_grid(z, alpha, t_step)
    return _result("dlasso_fdp", z, t, alpha)


def _two_sided_pvalues(z: np.ndarray) -> np.ndarray:
    return 2.0 * ndtr(-np.abs(z))


def _implied_cutoff(a_desc: np.ndarray, n_selected: int) -> float:
    """Largest non-selected |z|, so that {|z| > cutoff} is the selected set."""
    if n_selected == 0:
        return float(a_desc[0])
    if n_selected == a_desc.size:
        return 0.0
    return float(a_desc[n_selected])


def select_bh(z, alpha: float) -> SelectionResult:
    """Benjamini-Hochberg step-up on two-sided normal p-values.

    k* = max{k : p_(k) <= k alpha / p}; the k* smallest p-values are
    rejected. Tied |z| values never straddle the boundary, so the
    selection equals {|z| > implied cutoff}.
    """
    z = _check_z(z)
    alpha = _check_alpha(alpha)
    p = z.size
    a = np.sort(np.abs(z))[::-1]
    pv_sorted = 2.0 * ndtr(-a)  # ascending p-values
    passing = np.flatnonzero(pv_sorted <= (np.arange(1, p + 1) * alpha / p))
    k_star = int(passing[-1]) + 1 if passing.size else 0
    t = _implied_cutoff(a, k_star)
    return _result("dlasso_bh", z, t, alpha)


def select_fwer(z, alpha: float, variant: str = "holm") -> SelectionResult:
    """Family-wise error baseline: Holm step-down (or plain Bonferroni).

    Holm: walk the ascending p-values, rejecting while
    p_(i) <= alpha / (p - i); stop at the first failure.
    """
    z = _check_z(z)
    alpha = _check_alpha(alpha)
    p = z.size
    a = np.sort(np.abs(z))[::-1]
    pv_sorted = 2.0 * ndtr(-a)
    if variant == "holm":
        denom = p - np.arange(p)
        failing = np.flatnonzero(pv_sorted > alpha / denom)
        k = int(failing[0]) if failing.size else p
    elif variant == "bonferroni":
        k = int(np.sum(pv_sorted <= alpha / p))
    else:
        raise ConfigError(f"unknown FWER variant {variant!r}")
    t = _implied_cutoff(a, k)
    return _result("dlasso_fwer", z, t, alpha)


def rank_by_z(z) -> np.ndarray:
    """Indices sorted by |z| descending, ties broken by ascending index."""
    z = _check_z(z)
    return np.lexsort((np.arange(z.size), -np.abs(z)))


def evaluate(selected, truth) -> EvalMetrics:
    """Score a selection against simulation ground truth.

    V counts selections outside the support, R all selections;
    FDP = V / max(R, 1) and TPP = (R - V) / s0. An empty support makes TPP
    undefined and raises.
    """
    sel = np.asarray(selected, dtype=np.int64)
    support = np.asarray(truth.support, dtype=np.int64)
    if support.size == 0:
        raise ConfigError("TPP undefined: truth has empty support (s0 = 0)")
    R = int(sel.size)
    tp = int(np.isin(sel, support).sum())
    V = R - tp
    return EvalMetrics(V=V, R=R, FDP=V / max(R, 1), TPP=tp / support.size)


def fdp_tpp_curve(ranking, truth) -> list[CurvePoint]:
    """False-discovery price of each recall level along a ranking.

    For k = 1..s0 take the shortest ranking prefix containing k members of
    the support; the curve point at level k/s0 is the fraction of
    non-support indices in that prefix.
    """
    ranking = np.asarray(ranking, dtype=np.int64)
    p = ranking.size
    if np.sort(ranking).tolist() != list(range(p)):
        raise InvalidDataError("ranking is not a permutation of 0..p-1")
    support = set(int(j) for j in np.asarray(truth.support))
    s0 = len(support)
    if s0 == 0:
        raise ConfigError("curve undefined: truth has empty support (s0 = 0)")
    points = []
    tp = 0
    for m, j in enumerate(ranking, start=1):
        if int(j) in support:
            tp += 1
            points.append(CurvePoint(tpp_level=tp / s0, fdp=(m - tp) / m))
            if tp == s0:
                break
    return points
