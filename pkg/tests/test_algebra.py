from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from ncleapfrog.algebra import (
    Backend,
    CentralScalar,
    RingValue,
    backend_of,
    is_unit,
    random_assignment,
    random_generic,
    residual_norm,
    ring_inv,
    ring_star,
)
from ncleapfrog.errors import BackendMismatch, NotInvertible
from tests.conftest import rational, scalar

# ---------------------------------------------------------
# Inverse
# ---------------------------------------------------------


def test_inverse_of_identity_is_identity():
    one = RingValue.identity(3)
    assert ring_inv(one) == one


def test_closed_form_two_by_two_inverse():
    a = rational([[1, 2], [3, 4]])
    assert ring_inv(a) == rational([[-2, 1], [Fraction(3, 2), Fraction(-1, 2)]])


def test_zero_matrix_is_not_invertible():
    with pytest.raises(NotInvertible):
        ring_inv(RingValue.zeros(2))
    assert not is_unit(RingValue.zeros(2))


def test_inverse_is_two_sided(sample):
    a = sample()
    assert a * ring_inv(a) == a.one()
    assert ring_inv(a) * a == a.one()


def test_float_inverse_refuses_ill_conditioned_matrix():
    nearly_singular = RingValue.from_rows([[1.0, 1.0], [1.0, 1.0 + 1e-14]], Backend.FLOAT)
    with pytest.raises(NotInvertible) as excinfo:
        ring_inv(nearly_singular)
    assert excinfo.value.rcond is not None


def test_negative_power_uses_inverse():
    a = rational([[2, 1], [1, 1]])
    assert a**-2 == ring_inv(a * a)
    assert a**0 == a.one()


# ---------------------------------------------------------
# Involution
# ---------------------------------------------------------


def test_star_transposes():
    assert ring_star(rational([[1, 2], [3, 4]])) == rational([[1, 3], [2, 4]])


def test_star_is_anti_automorphism(rng):
    a, b = random_generic(rng, 2), random_generic(rng, 2)
    assert (a * b).star() == b.star() * a.star()


def test_star_on_scalars_is_identity():
    assert ring_star(scalar(5)) == scalar(5)


# ---------------------------------------------------------
# Sampling
# ---------------------------------------------------------


def test_sampler_is_deterministic():
    assert random_generic(1, 2) == random_generic(1, 2)


def test_sampler_depends_on_seed():
    assert random_generic(1, 2) != random_generic(2, 2)


def test_sampled_values_are_invertible(ring, rng):
    backend, d = ring
    for _ in range(20):
        assert is_unit(random_generic(rng, d, backend))


def test_scalar_backend_rejects_matrices():
    with pytest.raises(ValueError):
        random_generic(0, 2, Backend.SCALAR)


def test_assignment_order_is_stable():
    first = random_assignment(5, ["a1", "b1", "c1"], 2)
    second = random_assignment(np.random.default_rng(5), ["a1", "b1", "c1"], 2)
    assert list(first) == ["a1", "b1", "c1"]
    assert first == second


# ---------------------------------------------------------
# Arithmetic
# ---------------------------------------------------------


def test_backends_do_not_mix():
    with pytest.raises(BackendMismatch):
        _ = RingValue.identity(2) + RingValue.identity(2, Backend.FLOAT)
    with pytest.raises(BackendMismatch):
        _ = RingValue.identity(2) * RingValue.identity(3)
    assert backend_of(RingValue.identity(2), rational([[1, 0], [0, 2]])) is Backend.RATIONAL
    with pytest.raises(BackendMismatch):
        backend_of(RingValue.identity(2), RingValue.identity(2, Backend.FLOAT))


def test_numbers_act_as_central_elements():
    a = rational([[1, 2], [3, 4]])
    assert 1 - a == a.one() - a
    assert a * Fraction(1, 2) == rational([[Fraction(1, 2), 1], [Fraction(3, 2), 2]])
    assert a * CentralScalar(2) == a + a


def test_floats_enter_exact_backends_without_rounding():
    value = RingValue.from_rows([[0.1]], Backend.SCALAR)
    assert value.to_scalar() == Fraction(0.1)
    assert value.to_scalar() != Fraction(1, 10)
    assert rational([[0.5, 2], [0, 1.25]]) == rational([[Fraction(1, 2), 2], [0, Fraction(5, 4)]])


def test_matrices_do_not_commute():
    a, b = rational([[1, 1], [0, 1]]), rational([[1, 0], [1, 1]])
    assert a * b != b * a


def test_kron_dimensions_and_trace():
    a, b = rational([[1, 2], [3, 4]]), rational([[0, 1], [1, 0]])
    product = a.kron(b)
    assert product.d == 4
    assert product.trace() == a.trace() * b.trace()


def test_float_closeness_is_relative():
    a = RingValue.from_rows([[1e6, 0.0], [0.0, 1.0]], Backend.FLOAT)
    b = a + RingValue.from_rows([[1e-7, 0.0], [0.0, 0.0]], Backend.FLOAT)
    assert a.is_close(b)


def test_residual_norm_of_mapping():
    residuals = {0: scalar(0), 1: scalar(Fraction(-3, 2))}
    assert residual_norm(residuals) == 1.5
    assert residual_norm([]) == 0.0
