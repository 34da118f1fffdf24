from __future__ import annotations

import functools

import pytest

from ncleapfrog.algebra import Backend, random_generic
from ncleapfrog.biortho import (
    BiorthoSystem,
    LaurentPoly,
    MomentWindow,
    build_family,
    build_ladder,
    christoffel_residual,
    direct_coefficient_residuals,
    discrete_lax_residual,
    discrete_toda_residual,
    geometric_moments,
    geronimus_residual,
    inner_product,
    lax_factors,
    leapfrog_correspondence,
    moment_window_for,
    orthogonality_residuals,
    orthogonality_table,
    random_moments,
    recurrence_residual,
)
from ncleapfrog.errors import MomentOutOfWindow, SingularToeplitz
from ncleapfrog.reports import max_norm
from tests.conftest import scalar

SHIFTS = (-1, 0, 1)
LADDER_SEEDS = range(20)
LADDER_N_MAX = 5


@functools.cache
def ladder(ring, seed: int, n_max: int = LADDER_N_MAX) -> dict[int, BiorthoSystem] | None:
    """Families at every shift for one moment seed; None when a Toeplitz block is singular."""
    backend, d = ring
    window = moment_window_for(SHIFTS, n_max)
    try:
        return build_ladder(random_moments(seed, window, d, backend), SHIFTS, n_max)
    except SingularToeplitz:
        return None


@pytest.fixture
def ladders(ring) -> list[tuple[int, dict[int, BiorthoSystem]]]:
    """(seed, ladder) for every generic seed in LADDER_SEEDS."""
    built = {seed: ladder(ring, seed) for seed in LADDER_SEEDS}
    skipped = [seed for seed, systems in built.items() if systems is None]
    # random moments are generic with high probability
    assert len(skipped) <= len(LADDER_SEEDS) // 4, f"degenerate moment seeds: {skipped}"
    return [(seed, systems) for seed, systems in built.items() if systems is not None]


def poly(rng, powers, d=2) -> LaurentPoly:
    return LaurentPoly.from_dict({p: random_generic(rng, d) for p in powers})


# ---------------------------------------------------------
# Moments and the pairing
# ---------------------------------------------------------


def test_moment_window_bounds():
    M = random_moments(0, (-2, 3), d=1, backend=Backend.SCALAR)
    assert (M.k_min, M.k_max) == (-2, 3)
    with pytest.raises(MomentOutOfWindow) as excinfo:
        _ = M[4]
    assert excinfo.value.window == (-2, 3)


def test_moments_must_be_contiguous():
    with pytest.raises(ValueError):
        MomentWindow.from_mapping({0: scalar(1), 2: scalar(2)})


def test_window_needed_for_a_ladder():
    assert moment_window_for(SHIFTS, 3) == (-6, 4)


def test_pairing_of_constants_and_monomials(rng):
    M = random_moments(rng, (-3, 3))
    one = M.sample.one()
    for k in (-1, 0, 1):
        assert inner_product(LaurentPoly.monomial(0, one), LaurentPoly.monomial(0, one), k, M) == M[k]
        assert inner_product(LaurentPoly.monomial(1, one), LaurentPoly.monomial(1, one), k, M) == M[k]


def test_multiplying_by_z_shifts_the_pairing(rng):
    M = random_moments(rng, (-6, 6))
    f, g = poly(rng, (-1, 0, 2)), poly(rng, (0, 1))
    assert inner_product(f.shifted(1), g, 0, M) == inner_product(f, g, 1, M)
    assert inner_product(f.shifted(1), g.shifted(1), 0, M) == inner_product(f, g, 0, M)


def test_star_is_an_involution(rng):
    f = poly(rng, (-2, 0, 3))
    assert f.star().star() == f
    assert f.star().powers == [-3, 0, 2]


def test_geometric_moments():
    U, V = scalar(3), scalar(2)
    M = geometric_moments([(U, V), (scalar(1), scalar(5))], (-1, 2))
    assert M[2] == scalar(3 * 4 + 25)
    assert M[-1] == scalar(3) * V**-1 + scalar(1) * scalar(5) ** -1


# ---------------------------------------------------------
# Families
# ---------------------------------------------------------


def test_degree_zero_family(ring):
    backend, d = ring
    M = random_moments(3, moment_window_for([0], 0), d, backend)
    system = build_family(M, 0, 0)
    one = M.sample.one()
    assert system.P[0] == LaurentPoly.monomial(0, one)
    assert system.Q_star[0] == LaurentPoly.monomial(0, one)
    assert system.H[0] == M[0]
    assert system.G[0] == M[0]


def test_too_small_window_is_rejected():
    M = random_moments(0, (-1, 1))
    with pytest.raises(MomentOutOfWindow):
        build_family(M, 0, 1)


def test_negative_degree_is_rejected():
    with pytest.raises(ValueError):
        build_family(random_moments(0, (-4, 4)), 0, -1)


def test_rank_deficient_moments_are_singular():
    # two geometric terms support degree 1 but not degree 2
    M = geometric_moments([(scalar(1), scalar(2)), (scalar(1), scalar(3))], moment_window_for([0], 2))
    build_family(M, 0, 1)
    with pytest.raises(SingularToeplitz) as excinfo:
        build_family(M, 0, 2)
    assert excinfo.value.n == 2


def test_orthogonality(ladders):
    for seed, systems in ladders:
        system = systems[0]
        table = orthogonality_table(system)
        for n in range(system.n_max + 1):
            assert table[n][n] == system.H[n], seed
        assert max_norm(orthogonality_residuals(system)) == 0.0, seed


def test_coefficients_match_quasi_determinants(ladders):
    for seed, systems in ladders:
        residuals = direct_coefficient_residuals(systems[0])
        assert residuals
        assert max_norm(residuals) == 0.0, seed


def test_families_are_monic(ladders):
    for seed, systems in ladders:
        system = systems[1]
        one = system.H[0].one()
        for n in range(system.n_max + 1):
            assert system.P[n].coefficient(n) == one, seed
            assert system.Q_star[n].coefficient(-n) == one, seed


# ---------------------------------------------------------
# Transformations between shifts
# ---------------------------------------------------------


def test_christoffel_and_geronimus(ladders):
    for seed, systems in ladders:
        assert max_norm(christoffel_residual(systems[0], systems[1])) == 0.0, seed
        assert max_norm(geronimus_residual(systems[-1], systems[0])) == 0.0, seed


def test_shifts_must_be_adjacent(ladders):
    _, systems = ladders[0]
    with pytest.raises(ValueError):
        christoffel_residual(systems[-1], systems[1])


def test_three_term_recurrence(ladders):
    for seed, systems in ladders:
        for system in systems.values():
            assert max_norm(recurrence_residual(system)) == 0.0, seed


def test_discrete_toda(ladders):
    for seed, systems in ladders:
        residuals = discrete_toda_residual(systems[0], systems[1])
        assert residuals["first"]
        assert max_norm(residuals) == 0.0, seed


def test_lax_factors_shape(ladders):
    _, systems = ladders[0]
    system = systems[0]
    A, B = lax_factors(system)
    assert (A.rows, A.cols) == (LADDER_N_MAX + 1, LADDER_N_MAX + 1)
    assert B[0, 0] == system.psi[0]
    assert A[0, 1] == system.xi[0]
    assert A[1, 0].is_zero()


def test_discrete_lax(ladders):
    for seed, systems in ladders:
        assert discrete_lax_residual(systems[0], systems[-1]).is_zero(), seed


def test_leapfrog_correspondence(ladders):
    for seed, systems in ladders:
        residuals = leapfrog_correspondence(systems[0], systems[-1])
        assert set(residuals) == {"a", "b"}
        assert residuals["a"]
        assert max_norm(residuals) == 0.0, seed


def test_float_moments_within_tolerance():
    systems = next(s for s in (ladder((Backend.FLOAT, 2), seed, 2) for seed in LADDER_SEEDS) if s is not None)
    assert max_norm(orthogonality_residuals(systems[0])) < 1e-8
    assert max_norm(discrete_toda_residual(systems[0], systems[1])) < 1e-8
