import numpy as np
import pytest

from netrct import WattsStrogatzParams, generate_watts_strogatz


@pytest.fixture(scope="session")
def ring_10k_k50():
    """Exact ring lattice, n=10000, k=50."""
    return generate_watts_strogatz(WattsStrogatzParams(10000, 50, 0.0, seed=1))


@pytest.fixture(scope="session")
def ws_10k_k50():
    """Rewired graph, n=10000, k=50, p=0.1."""
    return generate_watts_strogatz(WattsStrogatzParams(10000, 50, 0.1, seed=5))


@pytest.fixture(scope="session")
def small_ws():
    """Small rewired graph for cheap structural tests."""
    return generate_watts_strogatz(WattsStrogatzParams(200, 8, 0.2, seed=3))


def reference_logistic(x: float) -> float:
    """Plain logistic used by test oracles, independent of scipy."""
    import math

    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def bisect_root(f, lo: float, hi: float, iterations: int = 200) -> float:
    """Bracketing bisection oracle."""
    flo = f(lo)
    assert flo < 0 < f(hi), "root not bracketed"
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if f(mid) <= 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def group_arrays_equal(a: np.ndarray, b: np.ndarray) -> bool:
    return a.shape == b.shape and bool(np.all(a == b))
