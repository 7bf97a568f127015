import numpy as np
import pytest

from doublelambda import SystemParams


def random_params(rng, with_fields=False) -> SystemParams:
    """Random physically-valid parameter draw for property suites."""
    kw = dict(
        gamma1=rng.uniform(0.1, 2), gamma2=rng.uniform(0.1, 2),
        gamma3=rng.uniform(0.1, 2), gamma4=rng.uniform(0.1, 2),
        gamma0=rng.uniform(0.1, 2),
        p1=rng.uniform(-1, 1), p2=rng.uniform(-1, 1),
        omega42=rng.uniform(0.5, 3), delta1=rng.uniform(-4, 4),
        g=rng.uniform(0.1, 0.6),
    )
    if with_fields:
        kw["a1_mean"] = rng.uniform(0.5, 2)
        kw["a2_mean"] = rng.uniform(0.5, 2)
    return SystemParams(**kw)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


@pytest.fixture
def defaults():
    return SystemParams()
