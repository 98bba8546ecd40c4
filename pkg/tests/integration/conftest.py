"""
Pytest configuration and fixtures for the quadctrl integration suites.

These suites run the full-scale randomized equivalence checks and the
N=2000 simulation cross-checks. Every module sets
``pytestmark = pytest.mark.integration``, so the default ``addopts``
deselect them; run them explicitly with::

    pytest tests/integration -m integration

Each suite draws from its own fixed seed so that a failure report names a
reproducible instance.
"""

from fractions import Fraction
from typing import Callable, List

import numpy as np
import pytest

SUITE_SEED = 20240611


@pytest.fixture
def suite_rng(request):
    """Generator seeded per test function, stable across runs."""
    return np.random.default_rng([SUITE_SEED, sum(map(ord, request.node.name))])


@pytest.fixture
def random_fraction() -> Callable[..., Fraction]:
    """``random_fraction(rng, positive=False)``: p/q with |p| <= 9 and 1 <= q <= 5."""

    def draw(rng: np.random.Generator, positive: bool = False) -> Fraction:
        low = 1 if positive else -9
        return Fraction(int(rng.integers(low, 10)), int(rng.integers(1, 6)))

    return draw


@pytest.fixture
def nonzero_vector() -> Callable[..., List[int]]:
    """``nonzero_vector(rng, n, bound=3)``: integer vector in [-bound, bound]^n, not zero."""

    def draw(rng: np.random.Generator, n: int, bound: int = 3) -> List[int]:
        while True:
            v = rng.integers(-bound, bound + 1, size=n).tolist()
            if any(v):
                return v

    return draw
