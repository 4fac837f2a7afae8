import numpy as np
import pytest

from dlasso_fdp.errors import ConfigError, NotSpdError
from dlasso_fdp.simulate import (
    GENERATOR_NAME,
    ModelTruth,
    SimConfig,
    gen_dataset,
    gen_precision_er,
    replication_rng,
    sample_design,
)


def cfg(**kw):
    base = dict(p=200, n=150, s0=10, beta1=0.5, seed=42)
    base.update(kw)
    return SimConfig(**base)


# ------------------------------------------------------------------ SimConfig

def test_config_validation():
    with pytest.raises(ConfigError):
        cfg(s0=201)  # s0 > p
    with pytest.raises(ConfigError):
        cfg(beta1=0.0)  # planted nulls
    with pytest.raises(ConfigError):
        cfg(sigma=-1.0)
    with pytest.raises(ConfigError):
        cfg(magnitude_range=(0.8, 0.4))
    with pytest.raises(ConfigError):
        cfg(sign_mode="flip")
    with pytest.raises(ConfigError):
        cfg(alpha=1.0)
    assert cfg(s0=0, beta1=0.0).s0 == 0  # the global null is allowed


# ----------------------------------------------------------- gen_precision_er

def test_precision_identity_limit():
    c = cfg(edge_prob=1e-12)
    Theta, Sigma = gen_precision_er(20, c, replication_rng(0, 0))
    np.testing.assert_allclose(Theta, np.eye(20), atol=1e-12)
    np.testing.assert_allclose(Sigma, np.eye(20), atol=1e-12)


def test_precision_construction_guarantees():
    c = cfg()
    for rep in range(5):
        Theta, Sigma = gen_precision_er(100, c, replication_rng(3, rep))
        np.testing.assert_allclose(Theta, Theta.T, atol=0)
        evals = np.linalg.eigvalsh(Theta)
        assert evals[0] >= c.spd_eps - 1e-8
        np.testing.assert_allclose(Sigma @ Theta, np.eye(100), atol=1e-8)


def test_precision_unit_diagonal_mode():
    c = cfg(unit_diagonal=True)
    Theta, Sigma = gen_precision_er(50, c, replication_rng(4, 0))
    np.testing.assert_allclose(np.diag(Theta), 1.0, atol=1e-12)
    evals = np.linalg.eigvalsh(Theta)
    assert evals[0] > 0


def test_precision_smax_binomial_concentration():
    # B(200, 0.05) row count: concentration over 100 seeded instances
    from scipy.stats import binom

    # the [3, 18] band carries >= 99% of the binomial mass
    band_mass = binom.cdf(18, 200, 0.05) - binom.cdf(2, 200, 0.05)
    assert band_mass >= 0.99
    smax = []
    for seed in range(100):
        c = cfg(n=10, s0=0, beta1=0.0, seed=seed)
        _, truth = gen_dataset(c, replication_rng(seed, 0))
        smax.append(truth.s_max)
    inside = sum(3 <= v <= 18 for v in smax)
    assert inside >= 97
    assert 8 <= np.mean(smax) <= 12


def test_precision_per_row_counts_mode():
    c = cfg()
    Theta, Sigma = gen_precision_er(60, c, replication_rng(5, 0),
                                    per_row_counts=True)
    assert np.isfinite(Theta).all()
    assert np.linalg.eigvalsh(Theta)[0] >= c.spd_eps - 1e-8


# -------------------------------------------------------------- sample_design

def test_sample_design_identity_gram_band():
    n, p = 400, 6
    X = sample_design(n, np.eye(p), replication_rng(7, 0))
    G = X.T @ X / n
    assert np.max(np.abs(G - np.eye(p))) < 4 / np.sqrt(n)


def test_sample_design_deterministic():
    Sigma = np.eye(4)
    X1 = sample_design(10, Sigma, replication_rng(9, 3))
    X2 = sample_design(10, Sigma, replication_rng(9, 3))
    np.testing.assert_array_equal(X1, X2)


def test_sample_design_covariance_recovery():
    rng = replication_rng(11, 0)
    A = rng.standard_normal((5, 5))
    Sigma = A @ A.T + np.eye(5)
    X = sample_design(5000, Sigma, rng)
    G = X.T @ X / 5000
    assert np.max(np.abs(G - Sigma)) < 0.1 * np.max(np.abs(Sigma))


def test_sample_design_rejects_non_spd():
    bad = np.array([[1.0, 2.0], [2.0, 1.0]])  # indefinite
    with pytest.raises(NotSpdError):
        sample_design(5, bad, replication_rng(0, 0))


# ---------------------------------------------------------------- gen_dataset

def test_gen_dataset_structure():
    c = cfg(p=50, n=30, s0=5, beta1=0.7)
    data, truth = gen_dataset(c, replication_rng(13, 0))
    assert data.X.shape == (30, 50)
    np.testing.assert_array_equal(truth.support, np.arange(5))
    np.testing.assert_array_equal(truth.i0, np.arange(5, 50))
    assert truth.p0 + truth.s0 == 50
    assert np.all(truth.beta[:5] == 0.7) and np.all(truth.beta[5:] == 0)
    np.testing.assert_allclose(truth.Sigma @ truth.Theta, np.eye(50), atol=1e-8)


def test_gen_dataset_sigma_zero_flagged():
    c = cfg(p=10, n=20, s0=2, beta1=1.0, sigma=0.0)
    with pytest.warns(UserWarning, match="sigma = 0"):
        data, truth = gen_dataset(c, replication_rng(1, 0))
    np.testing.assert_allclose(data.y, data.X @ truth.beta, atol=0)


def test_gen_dataset_moment_identity():
    # E ||y||^2 / n = beta' Sigma beta + sigma^2, checked by Monte Carlo
    c = cfg(p=10, n=5000, s0=3, beta1=0.8, sigma=1.0)
    data, truth = gen_dataset(c, replication_rng(17, 0))
    expected = truth.beta @ truth.Sigma @ truth.beta + 1.0
    observed = data.y @ data.y / data.n
    assert observed == pytest.approx(expected, rel=0.15)


def test_gen_dataset_reproducible_bitwise():
    c = cfg(p=40, n=25, s0=4, beta1=1.0)
    d1, t1 = gen_dataset(c, replication_rng(c.seed, 2))
    d2, t2 = gen_dataset(c, replication_rng(c.seed, 2))
    np.testing.assert_array_equal(d1.X, d2.X)
    np.testing.assert_array_equal(d1.y, d2.y)
    np.testing.assert_array_equal(t1.Theta, t2.Theta)


def test_gen_dataset_stream_independence():
    # replication 3's data does not depend on whether 0..2 were generated
    c = cfg(p=30, n=20, s0=3, beta1=1.0)
    solo = gen_dataset(c, replication_rng(c.seed, 3))[0]
    for rep in range(3):
        gen_dataset(c, replication_rng(c.seed, rep))
    again = gen_dataset(c, replication_rng(c.seed, 3))[0]
    np.testing.assert_array_equal(solo.X, again.X)
    np.testing.assert_array_equal(solo.y, again.y)


def test_generator_name_recorded():
    assert GENERATOR_NAME == "pcg64"
