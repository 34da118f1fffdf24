from __future__ import annotations

from fractions import Fraction

import pytest

from ncleapfrog.algebra import Backend
from ncleapfrog.errors import DegenerateConfiguration
from ncleapfrog.leapfrog import (
    Lattice,
    LeapfrogState,
    Mode,
    PQCoords,
    ab_from_vertices,
    ab_trajectory,
    commutative_y_residual,
    con_det_residuals,
    cross_ratio_ab_residuals,
    cross_ratio_property_residual,
    g_contract_residuals,
    lax_residual,
    lift_relation_residuals,
    pq_from_vertices,
    random_state,
    step_ab,
    step_pq,
    step_vertices,
    trajectory,
    y_cross_ratio_residual,
    y_history,
    y_intermediate_residuals,
    y_system_residual,
)
from ncleapfrog.reports import max_norm
from tests.conftest import scalar


def all_zero(residuals) -> bool:
    return max_norm(residuals) == 0.0


def small_state(v_minus_0=2) -> LeapfrogState:
    v = [scalar(0), scalar(1), scalar(3)]
    v_minus = [scalar(5), scalar(v_minus_0), scalar(7)]
    return LeapfrogState.windowed(1, v_minus, v, -1)


# ---------------------------------------------------------
# Vertex coordinates
# ---------------------------------------------------------


def test_scalar_single_step():
    S = small_state()
    pq = pq_from_vertices(S)
    assert pq.p[0] == scalar(-2)
    assert pq.q[0] == scalar(-1)
    nxt = step_vertices(S)
    assert nxt.v.indices() == range(0, 1)
    assert nxt.v[0] == scalar(Fraction(1, 3))
    assert nxt.v_minus[0] == scalar(1)


def test_coincident_successor_is_degenerate():
    # v_{i+1} = v⁻_i makes q_i vanish
    with pytest.raises(DegenerateConfiguration) as excinfo:
        step_vertices(small_state(v_minus_0=3))
    assert excinfo.value.index == 0


def test_trajectory_reports_the_failing_step():
    S = small_state(v_minus_0=3)
    with pytest.raises(DegenerateConfiguration) as excinfo:
        trajectory(S, 1)
    assert excinfo.value.step == 0


def test_window_shrinks_by_one_on_each_side():
    S = random_state(0, N=4, W=3)
    states = trajectory(S, 2)
    assert [s.v.indices() for s in states] == [range(-3, 7), range(-2, 6), range(-1, 5)]
    assert states[1].v_minus.values == S.v.values[1:-1]


def test_periodic_step_matches_windowed_extension(ring):
    backend, d = ring
    periodic = random_state(1, N=4, mode=Mode.PERIODIC, d=d, backend=backend)
    values = [periodic.v[i] for i in range(-2, 6)]
    minus = [periodic.v_minus[i] for i in range(-2, 6)]
    windowed = LeapfrogState.windowed(4, minus, values, -2)
    a, b = step_vertices(periodic), step_vertices(windowed)
    assert a.v.indices() == range(0, 4)
    for i in b.v.indices():
        assert a.v[i] == b.v[i]


def test_windowed_state_must_be_centred():
    with pytest.raises(ValueError):
        LeapfrogState.windowed(2, [scalar(1)] * 3, [scalar(2)] * 3, -1)


def test_sampler_is_reproducible():
    assert random_state(5, d=2) == random_state(5, d=2)


# ---------------------------------------------------------
# (p, q) coordinates and the Lax pair
# ---------------------------------------------------------


@pytest.mark.parametrize("mode", [Mode.PERIODIC, Mode.WINDOWED])
def test_pq_step_agrees_with_vertex_step(ring, mode):
    backend, d = ring
    S = random_state(2, N=5, mode=mode, W=3, d=d, backend=backend)
    stepped = step_pq(pq_from_vertices(S))
    after = pq_from_vertices(step_vertices(S))
    for i in stepped.indices():
        assert stepped.p[i] == after.p[i]
        assert stepped.q[i] == after.q[i]


def test_lax_pair_holds_only_at_unit_spectral_value(ring):
    backend, d = ring
    S = random_state(3, N=5, d=d, backend=backend)
    pq = pq_from_vertices(S)
    first, second = lax_residual(pq, S)
    assert all_zero(first)
    assert all_zero(second)
    off, _ = lax_residual(pq, S, zc=2)
    assert not all_zero(off)


def test_lax_residual_reads_the_given_coordinates(ring):
    backend, d = ring
    S = random_state(3, N=5, d=d, backend=backend)
    pq = pq_from_vertices(S)
    doubled = PQCoords(Lattice.build(lambda i: pq.p[i] * 2, pq.indices(), pq.p.period), pq.q)
    first, second = lax_residual(doubled, S)
    assert not all_zero(first)
    assert not all_zero(second)


def test_g_matrix_contract(ring):
    backend, d = ring
    S = random_state(4, N=4, d=d, backend=backend)
    for i in pq_from_vertices(S).indices():
        residuals = g_contract_residuals(S, i)
        assert all(point.is_zero() for point in residuals.values())


def test_cross_ratio_is_preserved_by_the_step(ring):
    backend, d = ring
    S = random_state(5, N=4, d=d, backend=backend)
    assert all_zero(cross_ratio_property_residual(S))


def test_float_backend_stays_within_tolerance():
    S = random_state(6, N=4, d=3, backend=Backend.FLOAT)
    first, second = lax_residual(pq_from_vertices(S), S)
    assert max_norm(first) < 1e-8
    assert max_norm(second) < 1e-8


# ---------------------------------------------------------
# (a, b) coordinates
# ---------------------------------------------------------


def test_ab_extraction_needs_a_window():
    S = random_state(7, N=4, mode=Mode.PERIODIC)
    with pytest.raises(ValueError):
        ab_from_vertices(S)


def test_ab_indices_and_default_anchor(ring):
    backend, d = ring
    S = random_state(8, N=4, W=2, d=d, backend=backend)
    ab, scalings = ab_from_vertices(S)
    assert ab.indices() == range(S.lo + 1, S.hi - 1)
    assert scalings.V.indices() == range(S.lo + 1, S.hi)


def test_ab_step_agrees_with_vertex_step(ring):
    backend, d = ring
    layers = [ab for ab, _ in ab_trajectory(random_state(9, N=4, W=4, d=d, backend=backend), 2)]
    for j in range(2):
        stepped = step_ab(layers[j])
        for i in stepped.indices():
            assert stepped.a[i] == layers[j + 1].a[i]
            assert stepped.b[i] == layers[j + 1].b[i]


def test_lift_relations(ring):
    backend, d = ring
    residuals = lift_relation_residuals(random_state(10, N=4, d=d, backend=backend))
    assert set(residuals) == {"a_relation", "b_relation", "c_relation", "abc_sum"}
    for values in residuals.values():
        assert all_zero(values)


def test_boxed_determinants_agree(ring):
    backend, d = ring
    assert all_zero(con_det_residuals(random_state(11, N=4, d=d, backend=backend)))


def test_ab_as_cross_ratios(ring):
    backend, d = ring
    S = random_state(12, N=4, d=d, backend=backend)
    residuals = cross_ratio_ab_residuals(S)
    assert residuals
    assert all_zero(residuals)
    assert all_zero(y_cross_ratio_residual(S))


# ---------------------------------------------------------
# Y-system
# ---------------------------------------------------------


def y_layers(ring, seed=13, steps=2):
    backend, d = ring
    return [ab for ab, _ in ab_trajectory(random_state(seed, N=4, W=steps + 2, d=d, backend=backend), steps)]


def test_y_system_holds(ring):
    layers = y_layers(ring)
    residuals = y_system_residual(y_history(layers), layers)
    assert residuals
    assert all_zero(residuals)


def test_y_system_detects_perturbation(ring):
    layers = y_layers(ring)
    hist = y_history(layers)
    i = hist[2].indices().start + 1
    perturbed = hist.replace(2, i, hist[2][i] + 1)
    assert not all_zero(y_system_residual(perturbed, layers))


def test_commutative_y_system():
    layers = y_layers((Backend.SCALAR, 1), seed=14)
    residuals = commutative_y_residual(y_history(layers))
    assert residuals
    assert all_zero(residuals)


def test_commutative_y_system_refuses_matrices():
    with pytest.raises(ValueError):
        commutative_y_residual(y_history(y_layers((Backend.RATIONAL, 2))))


def test_intermediate_recurrences(ring):
    residuals = y_intermediate_residuals(y_layers(ring, seed=15))
    assert residuals["space"]
    assert residuals["time"]
    assert all_zero(residuals["space"])
    assert all_zero(residuals["time"])
