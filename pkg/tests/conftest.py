"""
Pytest configuration and fixtures for quadctrl tests.

Provides the bundled example systems, the named model instances and a
seeded generator of random systems with small integer data.
"""

from fractions import Fraction
from typing import Callable, Optional

import numpy as np
import pytest

from quadctrl import ControllabilityAnalyzer, QuadraticSystem, lorenz, paper_examples, rank, sprott

RandomSystemFactory = Callable[..., QuadraticSystem]


def random_system(
    rng: np.random.Generator,
    n: Optional[int] = None,
    k: Optional[int] = None,
    low: int = -2,
    high: int = 2,
    linear: bool = False,
) -> QuadraticSystem:
    """Random RATIONAL system with integer data in ``[low, high]``."""
    n = n if n is not None else int(rng.integers(2, 6))
    k = k if k is not None else int(rng.integers(1, n))
    m = n - k

    def ints(*shape: int) -> list:
        return rng.integers(low, high + 1, size=shape).tolist()

    while True:
        controls = ints(m, n)
        if rank(controls, ambient_dim=n) == m:
            break
    zero = [0] * n
    return QuadraticSystem.build(
        ints(n, n),
        zero if linear else ints(n),
        zero if linear else ints(n),
        zero if linear else ints(n),
        controls,
    )


@pytest.fixture
def rng():
    """Fixed-seed generator so every randomized test is reproducible."""
    return np.random.default_rng(20240611)


@pytest.fixture
def make_random_system() -> RandomSystemFactory:
    """Factory ``make_random_system(rng, n=None, k=None, ...)``."""
    return random_system


@pytest.fixture
def examples():
    """The bundled worked systems keyed by name."""
    return paper_examples()


@pytest.fixture
def r5(examples):
    """Five-dimensional non-accessible example."""
    return examples["r5-nonaccessible"]


@pytest.fixture
def counterexample(examples):
    """x' = u1, y' = u2, z' = y^2."""
    return examples["sprott-counterexample-flow"]


@pytest.fixture
def r3_stlc(examples):
    """Two-input system on R^3 decided by the rank-one rule."""
    return examples["r3-stlc"]


@pytest.fixture
def hypergraph_system(examples):
    """x' = yz, y' = xz, z' = xy with f = (1, 2, 3)."""
    return examples["hypergraph"]


@pytest.fixture
def sprott_mu1():
    """Sprott system, mu = 1, f = e1."""
    return sprott(1, [(1, 0, 0)])


@pytest.fixture
def lorenz_classic():
    """Lorenz system (10, 28, 8/3), f = (1, 1, 1)."""
    return lorenz(10, 28, Fraction(8, 3), [(1, 1, 1)])


@pytest.fixture
def analyzer():
    """Analyzer with a small simulation budget for unit tests."""
    return ControllabilityAnalyzer(sim_samples=200, seed=3)
