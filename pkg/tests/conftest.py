import numpy as np
import pytest
from hypothesis import HealthCheck, settings

# MC-heavy suite: per-example deadlines are meaningless here
settings.register_profile(
    "default",
    deadline=None,
    suppress_health_check=(HealthCheck.too_slow,),
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_dataset(rng, n=30, p=8, s0=2, beta=1.5, sigma=1.0):
    """Small dense-noise instance for solver-level tests."""
    from dlasso_fdp.lasso import Dataset

    X = rng.standard_normal((n, p))
    b = np.zeros(p)
    b[:s0] = beta
    y = X @ b + sigma * rng.standard_normal(n)
    return Dataset(X=X, y=y)
