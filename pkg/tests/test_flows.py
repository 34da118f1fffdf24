from __future__ import annotations

import numpy as np
import pytest

from ncleapfrog.biortho import Flow
from ncleapfrog.flows import (
    DEFAULT_H_VALUES,
    FlowFamily,
    convergence_slope,
    convergence_table,
    flow_moments,
    moment_derivative_residual,
    negative_flow_residual,
    positive_flow_residual,
    random_flow_family,
)

SLOPE_TARGET = 2.0
SLOPE_TOLERANCE = 0.3


@pytest.fixture(params=[Flow.NEGATIVE, Flow.POSITIVE], ids=["negative", "positive"])
def family(request):
    return random_flow_family(0, request.param, n_max=1)


# ---------------------------------------------------------
# Moments
# ---------------------------------------------------------


def test_moments_at_time_zero():
    rng = np.random.default_rng(1)
    U, W = rng.standard_normal((2, 4)), rng.standard_normal((4, 2))
    V = np.diag([0.5, 1.0, 2.0, 3.0])
    M = flow_moments(U, V, 0.0, Flow.POSITIVE, (-2, 2), W)
    for k in range(-2, 3):
        expected = U @ np.linalg.matrix_power(V if k >= 0 else np.linalg.inv(V), abs(k)) @ W
        np.testing.assert_allclose(M[k].payload, expected, atol=1e-12)
    assert M.t == 0.0
    assert M.flow is Flow.POSITIVE


def test_moments_need_a_flow_direction():
    with pytest.raises(ValueError):
        flow_moments(np.eye(2), np.eye(2), 0.0, Flow.NONE, (0, 1))


def test_family_checks_factor_shapes():
    with pytest.raises(ValueError):
        FlowFamily(np.ones((2, 3)), np.eye(4), np.ones((4, 2)), Flow.NEGATIVE, (0, 1))


def test_family_inner_dimension_supports_the_degree():
    fam = random_flow_family(3, Flow.NEGATIVE, n_max=2, d=2)
    assert fam.V.shape == (8, 8)
    assert fam.d == 2


def test_moment_derivative_is_second_order(family):
    coarse = moment_derivative_residual(family, 0.0, 1e-2)
    fine = moment_derivative_residual(family, 0.0, 1e-3)
    assert fine < coarse / 30


# ---------------------------------------------------------
# Flow equations
# ---------------------------------------------------------


def test_residuals_are_reported_by_equation(family):
    residuals = (negative_flow_residual if family.flow is Flow.NEGATIVE else positive_flow_residual)(
        family, 0.0, 1, 1e-3
    )
    assert set(residuals) == {"Q", "psi", "xi", "lax"}
    assert all(value < 1e-3 for value in residuals.values())


def test_flow_direction_must_match(family):
    wrong = positive_flow_residual if family.flow is Flow.NEGATIVE else negative_flow_residual
    with pytest.raises(ValueError):
        wrong(family, 0.0, 1, 1e-3)


def test_convergence_slopes(family):
    rows, slopes = convergence_table(family, 0.0, 1, DEFAULT_H_VALUES)
    assert [row["h"] for row in rows] == list(DEFAULT_H_VALUES)
    for key, slope in slopes.items():
        assert abs(slope - SLOPE_TARGET) <= SLOPE_TOLERANCE, key


def test_shifted_xi_breaks_the_flow(family):
    residual = negative_flow_residual if family.flow is Flow.NEGATIVE else positive_flow_residual
    clean = residual(family, 0.0, 1, 1e-3)
    shifted = residual(family, 0.0, 1, 1e-3, xi_offset=0.1)
    assert shifted["psi"] > 1e-2
    assert shifted["psi"] > 100 * clean["psi"]
    assert shifted["xi"] > clean["xi"]


# ---------------------------------------------------------
# Slopes
# ---------------------------------------------------------


def test_slope_of_exact_power_law():
    assert convergence_slope({1e-2: 3e-4, 1e-3: 3e-6}) == pytest.approx(2.0)


def test_slope_needs_two_step_sizes():
    with pytest.raises(ValueError):
        convergence_slope({1e-2: 1e-4})


def test_slope_needs_positive_residuals():
    with pytest.raises(ValueError):
        convergence_slope({1e-2: 1e-4, 1e-3: 0.0})
