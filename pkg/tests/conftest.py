from __future__ import annotations

from collections.abc import Callable
from fractions import Fraction

import numpy as np
import pytest

from ncleapfrog.algebra import Backend, RingValue, random_generic
from ncleapfrog.errors import NCLeapfrogError

# Random instances per identity in the seeded sweeps
SWEEP_SIZE = 50


def scalar(x) -> RingValue:
    return RingValue.scalar(Fraction(x))


def rational(rows) -> RingValue:
    return RingValue.from_rows(rows, Backend.RATIONAL)


def sweep(check: Callable[[np.random.Generator], None], count: int = SWEEP_SIZE) -> list[int]:
    """Run `check` on the first `count` non-degenerate seeds and return the seeds skipped as degenerate.

    A draw that raises a library error is not in general position; the scan gives up after 2 * count seeds,
    so a check that always raises fails instead of passing vacuously.
    """
    passed, skipped = 0, []
    for seed in range(2 * count):
        try:
            check(np.random.default_rng(seed))
        except NCLeapfrogError:
            skipped.append(seed)
            continue
        passed += 1
        if passed == count:
            return skipped
    pytest.fail(f"only {passed} of {count} seeds were generic; degenerate seeds: {skipped}")


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


@pytest.fixture(params=[(Backend.SCALAR, 1), (Backend.RATIONAL, 2)], ids=["scalar", "matrix"])
def ring(request):
    """(backend, d) pairs covering the commutative and the matrix case."""
    return request.param


@pytest.fixture(
    params=[(Backend.SCALAR, 1), (Backend.RATIONAL, 2), (Backend.RATIONAL, 3)], ids=["d1", "d2", "d3"]
)
def identity_ring(request):
    """Exact rings for the identity sweeps."""
    return request.param


@pytest.fixture
def sample(ring, rng):
    backend, d = ring

    def draw(count: int = 1):
        values = [random_generic(rng, d, backend) for _ in range(count)]
        return values[0] if count == 1 else values

    return draw
