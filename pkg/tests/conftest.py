import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def rel_err(got, want):
    """Relative deviation with a floor for tiny references."""
    got = np.asarray(got, dtype=float)
    want = np.asarray(want, dtype=float)
    scale = np.maximum(np.abs(want), 1e-300)
    return np.max(np.abs(got - want) / scale)
