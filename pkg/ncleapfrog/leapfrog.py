"""
The non-commutative leapfrog map in vertex, (p, q) and (a, b) coordinates.

A state is a pair of point sequences (S⁻, S) on the projective line, stored by affine coordinates
v⁻_i and v_i. One step sends (S⁻, S) to (S, S⁺). Sequences are either N-periodic or live on a finite
window [lo, hi) that loses one index on each side per step.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from ncleapfrog._compat import StrEnum
from typing import Generic, TypeVar

import numpy as np

from ncleapfrog.algebra import (
    MAX_SAMPLE_ATTEMPTS,
    Backend,
    CentralScalar,
    RingValue,
    as_generator,
    random_generic,
    ring_inv,
)
from ncleapfrog.errors import DegenerateConfiguration, NCLeapfrogError, NotInvertible, SingularH
from ncleapfrog.projective import PointP1, boxed_pair, cross_ratio
from ncleapfrog.quasidet import QMatrix

logger = logging.getLogger(__name__)

T = TypeVar("T")


class Mode(StrEnum):
    PERIODIC = "periodic"
    WINDOWED = "windowed"


@dataclass(frozen=True)
class Lattice(Generic[T]):
    """Values indexed by integers: periodic modulo `period`, or on the window [lo, lo + len)."""

    values: tuple[T, ...]
    lo: int = 0
    period: int | None = None

    def __post_init__(self):
        if not self.values:
            raise ValueError("window is exhausted: no indices left")
        if self.period is not None and (self.lo != 0 or len(self.values) != self.period):
            raise ValueError(f"periodic lattice needs {self.period} values starting at 0")

    @classmethod
    def build(cls, fn: Callable[[int], T], indices: range, period: int | None = None) -> Lattice[T]:
        return cls(tuple(fn(i) for i in indices), indices.start, period)

    @property
    def hi(self) -> int:
        return self.lo + len(self.values)

    @property
    def periodic(self) -> bool:
        return self.period is not None

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i: int) -> T:
        if self.period is not None:
            return self.values[i % self.period]
        if not self.lo <= i < self.hi:
            raise IndexError(f"index {i} outside window [{self.lo}, {self.hi})")
        return self.values[i - self.lo]

    def covers(self, i: int) -> bool:
        return self.periodic or self.lo <= i < self.hi

    def indices(self) -> range:
        return range(len(self.values)) if self.periodic else range(self.lo, self.hi)

    def interior(self) -> range:
        """Indices whose two neighbours are both available."""
        return self.indices() if self.periodic else range(self.lo + 1, self.hi - 1)

    def restrict(self, indices: range) -> Lattice[T]:
        if self.periodic:
            return self
        return Lattice.build(self.__getitem__, indices)

    def replace(self, i: int, value: T) -> Lattice[T]:
        values = list(self.values)
        values[(i % self.period) if self.period is not None else i - self.lo] = value
        return Lattice(tuple(values), self.lo, self.period)


@dataclass(frozen=True)
class LeapfrogState:
    """A pair (S⁻, S) of point sequences given by affine coordinates."""

    N: int
    mode: Mode
    v_minus: Lattice[RingValue]
    v: Lattice[RingValue]

    def __post_init__(self):
        if self.v.indices() != self.v_minus.indices():
            raise ValueError("v_minus and v must share one index range")
        if self.mode is Mode.PERIODIC and self.v.period != self.N:
            raise ValueError(f"periodic state needs period N={self.N}, got {self.v.period}")
        if self.mode is Mode.WINDOWED and (self.v.periodic or self.v.hi != self.N - self.v.lo):
            raise ValueError(f"windowed state must cover [-W, N+W) for N={self.N}")

    @classmethod
    def periodic(cls, v_minus: Sequence[RingValue], v: Sequence[RingValue]) -> LeapfrogState:
        N = len(v)
        return cls(N, Mode.PERIODIC, Lattice(tuple(v_minus), 0, N), Lattice(tuple(v), 0, N))

    @classmethod
    def windowed(cls, N: int, v_minus: Sequence[RingValue], v: Sequence[RingValue], lo: int) -> LeapfrogState:
        return cls(N, Mode.WINDOWED, Lattice(tuple(v_minus), lo), Lattice(tuple(v), lo))

    @property
    def lo(self) -> int:
        return self.v.lo

    @property
    def hi(self) -> int:
        return self.v.hi

    @property
    def half_width(self) -> int:
        return 0 if self.mode is Mode.PERIODIC else -self.lo

    @property
    def backend(self) -> Backend:
        return self.v.values[0].backend

    @property
    def d(self) -> int:
        return self.v.values[0].d


@dataclass(frozen=True)
class PQCoords:
    p: Lattice[RingValue]
    q: Lattice[RingValue]

    def indices(self) -> range:
        return self.p.indices()


@dataclass(frozen=True)
class ABCoords:
    a: Lattice[RingValue]
    b: Lattice[RingValue]

    def indices(self) -> range:
        return self.a.indices()


@dataclass(frozen=True)
class Scalings:
    """Right scalings V_i, V⁻_i of the affine lifts that turn a state into (a, b) form."""

    V: Lattice[RingValue]
    V_minus: Lattice[RingValue]


@dataclass(frozen=True)
class YHistory:
    """y_i^j = (a_i^j)^-1 b_i^j for consecutive time layers j = 0, 1, ..."""

    layers: tuple[Lattice[RingValue], ...]

    def __len__(self) -> int:
        return len(self.layers)

    def __getitem__(self, j: int) -> Lattice[RingValue]:
        return self.layers[j]

    def replace(self, j: int, i: int, value: RingValue) -> YHistory:
        layers = list(self.layers)
        layers[j] = layers[j].replace(i, value)
        return YHistory(tuple(layers))


def _inv(x: RingValue, i, what: str) -> RingValue:
    try:
        return ring_inv(x)
    except NotInvertible as exc:
        raise DegenerateConfiguration(i, f"{what} is not invertible") from exc


def _lift(v: RingValue) -> PointP1:
    return PointP1.affine(v)


# -- vertex and (p, q) coordinates ------------------------------------------------------------


def pq_from_vertices(S: LeapfrogState) -> PQCoords:
    """p_i = (v_{i-1} - v_i)^-1 (v_{i+1} - v_i), q_i = (v_i - v⁻_i)^-1 (v_{i+1} - v⁻_i).

    Defined on every index for periodic states and on [lo+1, hi-1) for windowed ones.
    """
    v, vm = S.v, S.v_minus

    def p_at(i: int) -> RingValue:
        p = _inv(v[i - 1] - v[i], i, "v_{i-1} - v_i") * (v[i + 1] - v[i])
        _inv(p, i, "p_i")
        return p

    def q_at(i: int) -> RingValue:
        q = _inv(v[i] - vm[i], i, "v_i - v⁻_i") * (v[i + 1] - vm[i])
        _inv(q, i, "q_i")
        return q

    indices = v.interior()
    return PQCoords(Lattice.build(p_at, indices, v.period), Lattice.build(q_at, indices, v.period))


def step_vertices(S: LeapfrogState) -> LeapfrogState:
    """One leapfrog step (S⁻, S) -> (S, S⁺) with v⁺_i = (v_{i-1} p_i + v_i q_i)(p_i + q_i)^-1."""
    pq = pq_from_vertices(S)
    v = S.v

    def advance(i: int) -> RingValue:
        p, q = pq.p[i], pq.q[i]
        return (v[i - 1] * p + v[i] * q) * _inv(p + q, i, "p_i + q_i")

    indices = pq.indices()
    v_plus = Lattice.build(advance, indices, v.period)
    logger.debug("leapfrog step on indices [%d, %d)", indices.start, indices.stop)
    return LeapfrogState(S.N, S.mode, v.restrict(indices), v_plus)


def trajectory(S: LeapfrogState, steps: int) -> list[LeapfrogState]:
    """States S_0 = S, ..., S_steps; degeneracies carry the step at which they occurred."""
    states = [S]
    for j in range(steps):
        try:
            states.append(step_vertices(states[-1]))
        except DegenerateConfiguration as exc:
            raise exc.at_step(j) from exc
    return states


def g_matrix(S: LeapfrogState, i: int) -> QMatrix:
    """Projective matrix g_i exchanging the neighbours of S_i and sending S⁻_i to S⁺_i."""
    v = S.v
    r = _inv(v[i - 1] - v[i], i, "v_{i-1} - v_i") + _inv(v[i + 1] - v[i], i, "v_{i+1} - v_i")
    vi = v[i]
    return QMatrix.from_rows([[vi * r + 1, -((vi * r + 2) * vi)], [r, -(r * vi + 1)]])


def g_contract_residuals(S: LeapfrogState, i: int) -> dict[str, PointP1]:
    """Residuals of the mapping contract of g_i with scalings (p_i^-1, -1, p_i) and (1 - q_i)(p_i + q_i)^-1."""
    g = g_matrix(S, i)
    pq = pq_from_vertices(S)
    p, q = pq.p[i], pq.q[i]
    v_plus = step_vertices(S).v[i]
    v = S.v
    return {
        "previous": _lift(v[i - 1]).transformed(g) - _lift(v[i + 1]) * ring_inv(p),
        "middle": _lift(v[i]).transformed(g) + _lift(v[i]),
        "next": _lift(v[i + 1]).transformed(g) - _lift(v[i - 1]) * p,
        "successor": _lift(S.v_minus[i]).transformed(g) * ((1 - q) * _inv(p + q, i, "p_i + q_i")) - _lift(v_plus),
    }


def step_pq(pq: PQCoords) -> PQCoords:
    """Leapfrog step in (p, q) coordinates.

    T(q_i) = (p_i + q_i) q_{i+1} (p_{i+1} + q_{i+1})^-1 and T(p_i) = h_i^-1 p_i h_{i+1}
    with h_i = (p_{i-1} + q_{i-1})^-1 - q_i (p_i + q_i)^-1.
    """
    p, q = pq.p, pq.q

    def s_inv(i: int) -> RingValue:
        return _inv(p[i] + q[i], i, "p_i + q_i")

    def h(i: int) -> RingValue:
        return s_inv(i - 1) - q[i] * s_inv(i)

    def h_inv(i: int) -> RingValue:
        try:
            return ring_inv(h(i))
        except NotInvertible as exc:
            raise SingularH(i) from exc

    def q_next(i: int) -> RingValue:
        return (p[i] + q[i]) * q[i + 1] * s_inv(i + 1)

    def p_next(i: int) -> RingValue:
        return h_inv(i) * p[i] * h(i + 1)

    indices = p.interior()
    return PQCoords(Lattice.build(p_next, indices, p.period), Lattice.build(q_next, indices, p.period))


def lax_residual(
    pq: PQCoords,
    S: LeapfrogState,
    zc: CentralScalar | int | float = 1,
) -> tuple[dict[int, RingValue], dict[int, RingValue]]:
    """Residuals of the Lax pair at spectral value z for the coordinates `pq` along the state S.

    First: v_{i+1} + v_i (p_i + q_i - 1) - z (v_{i-1} p_i + v_i q_i), zero exactly at z = 1.
    Second: T(v_i) - (v_{i-1} p_i + v_i q_i)(p_i + q_i)^-1, always zero. T(v) is the vertex step of S,
    so this compares the evolution predicted from `pq` with the map itself.
    """
    z = zc.value if isinstance(zc, CentralScalar) else zc
    v = S.v
    v_plus = step_vertices(S).v
    first, second = {}, {}
    for i in pq.indices():
        p, q = pq.p[i], pq.q[i]
        combo = v[i - 1] * p + v[i] * q
        first[i] = v[i + 1] + v[i] * (p + q - 1) - combo * z
        second[i] = v_plus[i] - combo * _inv(p + q, i, "p_i + q_i")
    return first, second


def cross_ratio_property_residual(S: LeapfrogState) -> dict[int, RingValue]:
    """kappa(S_{i-1}, S_{i+1}, S_i, S⁻_i) - beta^-1 kappa(S_{i+1}, S_{i-1}, S_i, S⁺_i) beta with beta = -1."""
    nxt = step_vertices(S)
    v = S.v
    residuals = {}
    for i in nxt.v.indices():
        before = cross_ratio(_lift(v[i - 1]), _lift(v[i + 1]), _lift(v[i]), _lift(S.v_minus[i]))
        after = cross_ratio(_lift(v[i + 1]), _lift(v[i - 1]), _lift(v[i]), _lift(nxt.v[i]))
        residuals[i] = before - after
    return residuals


# -- (a, b) coordinates -----------------------------------------------------------------------


def _x_pair(S: LeapfrogState, i: int) -> tuple[RingValue, RingValue]:
    """Right coordinates of v_i and v_{i+1} relative to the frame (v⁻_i, v⁻_{i+1})."""
    vm, v = S.v_minus, S.v
    base = _inv(vm[i + 1] - vm[i], i, "v⁻_{i+1} - v⁻_i")
    return base * (v[i] - vm[i]), base * (v[i + 1] - vm[i])


def ab_from_vertices(S: LeapfrogState, anchor: RingValue | None = None) -> tuple[ABCoords, Scalings]:
    """(a, b) coordinates of a windowed state and the scalings of its lifts.

    The scalings are solved left to right along the window. `anchor` fixes V⁻_{lo+1}; the default
    corresponds to V_lo = V⁻_lo = one. a and b are reported on [lo+1, hi-1).

    Args:
        S: windowed state
        anchor: optional value of V⁻_{lo+1}, used to continue a chain after a step

    Returns:
        (ABCoords, Scalings)
    """
    if S.mode is not Mode.WINDOWED:
        raise ValueError(f"(a, b) extraction needs a windowed state, got {S.mode.value}")
    lo, hi = S.lo, S.hi
    if hi - lo < 3:
        raise ValueError(f"window [{lo}, {hi}) too narrow for (a, b) extraction")

    x, x_prime = _x_pair(S, lo)
    vm = {lo + 1: anchor if anchor is not None else _inv(x, lo, "X_lo")}
    vv = {lo + 1: vm[lo + 1] * x_prime}
    for i in range(lo + 1, hi - 1):
        x, x_prime = _x_pair(S, i)
        vm[i + 1] = vv[i] * _inv(x, i, "X_i")
        vv[i + 1] = vm[i + 1] * x_prime

    def a_at(i: int) -> RingValue:
        x, _ = _x_pair(S, i)
        return vm[i] * (1 - x) * _inv(vv[i], i, "V_i")

    def b_at(i: int) -> RingValue:
        _, x_prime = _x_pair(S, i)
        return -(vm[i] * (1 - x_prime) * _inv(vv[i + 1], i + 1, "V_i"))

    indices = range(lo + 1, hi - 1)
    lifted = range(lo + 1, hi)
    scalings = Scalings(Lattice.build(vv.__getitem__, lifted), Lattice.build(vm.__getitem__, lifted))
    return ABCoords(Lattice.build(a_at, indices), Lattice.build(b_at, indices)), scalings


def _lifts(S: LeapfrogState, scalings: Scalings) -> tuple[dict[int, PointP1], dict[int, PointP1]]:
    u, u_minus = {}, {}
    for i in scalings.V.indices():
        u[i] = _lift(S.v[i]) * _inv(scalings.V[i], i, "V_i")
        u_minus[i] = _lift(S.v_minus[i]) * _inv(scalings.V_minus[i], i, "V⁻_i")
    return u, u_minus


def leap_a(a: Lattice[RingValue], b: Lattice[RingValue], i: int) -> RingValue:
    """a⁺_i = (a_{i-1} + b_{i-1})^-1 a_{i-1} (a_i + b_i)."""
    return _inv(a[i - 1] + b[i - 1], i - 1, "a_i + b_i") * a[i - 1] * (a[i] + b[i])


def leap_b(a: Lattice[RingValue], b: Lattice[RingValue], i: int) -> RingValue:
    """b⁺_i = (a_i + b_i)^-1 b_i (a_{i+1} + b_{i+1})."""
    return _inv(a[i] + b[i], i, "a_i + b_i") * b[i] * (a[i + 1] + b[i + 1])


def step_ab(ab: ABCoords) -> ABCoords:
    """Leapfrog step in (a, b) coordinates on the interior of the lattice."""
    a, b = ab.a, ab.b
    indices = a.interior()
    return ABCoords(
        Lattice.build(lambda i: leap_a(a, b, i), indices, a.period),
        Lattice.build(lambda i: leap_b(a, b, i), indices, a.period),
    )


def ab_trajectory(S: LeapfrogState, steps: int) -> list[tuple[ABCoords, Scalings]]:
    """(a, b) layers along the vertex trajectory, each chain anchored on the previous one."""
    layers = []
    anchor = None
    state = S
    for j in range(steps + 1):
        try:
            ab, scalings = ab_from_vertices(state, anchor)
            layers.append((ab, scalings))
            if j < steps:
                anchor = scalings.V[state.lo + 2]
                state = step_vertices(state)
        except DegenerateConfiguration as exc:
            raise exc.at_step(j) from exc
    return layers


def lift_relation_residuals(S: LeapfrogState, anchor: RingValue | None = None) -> dict[str, dict[int, object]]:
    """Residuals of the linear relations between the scaled lifts.

    u_i = u⁻_{i+1} + u⁻_i a_i, u_{i+1} = u⁻_{i+1} - u⁻_i b_i, u_{i+1} = u_i + u⁻_i c_i and a + b + c = 0,
    where c_i = V⁻_i (V_{i+1}^-1 - V_i^-1).
    """
    ab, scalings = ab_from_vertices(S, anchor)
    u, um = _lifts(S, scalings)
    V, Vm = scalings.V, scalings.V_minus
    out: dict[str, dict[int, object]] = {"a_relation": {}, "b_relation": {}, "c_relation": {}, "abc_sum": {}}
    for i in ab.indices():
        a, b = ab.a[i], ab.b[i]
        c = Vm[i] * (ring_inv(V[i + 1]) - ring_inv(V[i]))
        out["a_relation"][i] = u[i] - (um[i + 1] + um[i] * a)
        out["b_relation"][i] = u[i + 1] - (um[i + 1] - um[i] * b)
        out["c_relation"][i] = u[i + 1] - (u[i] + um[i] * c)
        out["abc_sum"][i] = a + b + c
    return out


def con_det_residuals(S: LeapfrogState, anchor: RingValue | None = None) -> dict[int, tuple[RingValue, RingValue]]:
    """|u⁻_i u⁻_{i+1}| - |u⁻_i u_i| and |u⁻_i u⁻_{i+1}| - |u⁻_i u_{i+1}|, boxed at the bottom right."""
    ab, scalings = ab_from_vertices(S, anchor)
    u, um = _lifts(S, scalings)
    residuals = {}
    for i in ab.indices():
        base = boxed_pair(um[i], um[i + 1])
        residuals[i] = (base - boxed_pair(um[i], u[i]), base - boxed_pair(um[i], u[i + 1]))
    return residuals


def cross_ratio_ab_residuals(
    S: LeapfrogState,
    anchor: RingValue | None = None,
) -> dict[int, tuple[RingValue, RingValue]]:
    """a_i - kappa(u⁻_{i-1}, u⁻_{i+1}, u⁻_i, u_i) and b_i + kappa(u_i, u_{i+1}, u⁻_i, u⁻_{i+1}) a_i."""
    ab, scalings = ab_from_vertices(S, anchor)
    u, um = _lifts(S, scalings)
    residuals = {}
    for i in ab.indices():
        if i - 1 not in um:
            continue
        a, b = ab.a[i], ab.b[i]
        residuals[i] = (
            a - cross_ratio(um[i - 1], um[i + 1], um[i], u[i]),
            b + cross_ratio(u[i], u[i + 1], um[i], um[i + 1]) * a,
        )
    return residuals


# -- Y-system ---------------------------------------------------------------------------------


def y_history(layers: Sequence[ABCoords]) -> YHistory:
    """y_i^j = (a_i^j)^-1 b_i^j for each layer."""
    history = []
    for ab in layers:
        a, b = ab.a, ab.b
        history.append(Lattice.build(lambda i, a=a, b=b: _inv(a[i], i, "a_i") * b[i], a.indices(), a.period))
    return YHistory(tuple(history))


def _one_plus_inv(y: RingValue, i: int) -> RingValue:
    return 1 + _inv(y, i, "y_i")


def y_system_residual(hist: YHistory, layers: Sequence[ABCoords]) -> dict[tuple[int, int], RingValue]:
    """LHS - RHS of the non-commutative Y-system at every (j, i) with three layers available.

    (b_i^j)^-1 (1 + y_{i-1}^j)(1 + (y_i^j)^-1)^-1 (y_i^{j-1})^-1 b_i^j = (1 + (y_i^j)^-1) y_i^{j+1} (1 + y_{i+1}^j)^-1
    """
    residuals = {}
    for j in range(1, len(hist) - 1):
        y_prev, y, y_next, b = hist[j - 1], hist[j], hist[j + 1], layers[j].b
        for i in y_next.indices():
            if not (y.covers(i - 1) and y.covers(i + 1) and y_prev.covers(i)):
                continue
            w = _one_plus_inv(y[i], i)
            b_inv = _inv(b[i], i, "b_i")
            lhs = b_inv * (1 + y[i - 1]) * _inv(w, i, "1 + y_i^-1") * _inv(y_prev[i], i, "y_i") * b[i]
            rhs = w * y_next[i] * _inv(1 + y[i + 1], i + 1, "1 + y_i")
            residuals[(j, i)] = lhs - rhs
    return residuals


def commutative_y_residual(hist: YHistory) -> dict[tuple[int, int], RingValue]:
    """y^{j+1}_i y^{j-1}_i - (1 + y_{i+1}^j)(1 + y_{i-1}^j) / (1 + (y_i^j)^-1)^2 on a commutative history."""
    if hist[0].values[0].d != 1:
        raise ValueError(f"commutative Y-system needs d=1 values, got d={hist[0].values[0].d}")
    residuals = {}
    for j in range(1, len(hist) - 1):
        y_prev, y, y_next = hist[j - 1], hist[j], hist[j + 1]
        for i in y_next.indices():
            if not (y.covers(i - 1) and y.covers(i + 1) and y_prev.covers(i)):
                continue
            w = _one_plus_inv(y[i], i)
            rhs = (1 + y[i + 1]) * (1 + y[i - 1]) * _inv(w * w, i, "1 + y_i^-1")
            residuals[(j, i)] = y_next[i] * y_prev[i] - rhs
    return residuals


def y_intermediate_residuals(layers: Sequence[ABCoords]) -> dict[str, dict[tuple[int, int], RingValue]]:
    """Residuals of the intermediate recurrences for a along a trajectory.

    space: a_{i+1}^j = (y_i^{j-1})^-1 a_i^j y_i^j
    time: a_i^{j+1} = (1 + y_{i-1}^j)^-1 a_i^j (1 + y_i^j)
    """
    hist = y_history(layers)
    space, time = {}, {}
    for j, ab in enumerate(layers):
        a, y = ab.a, hist[j]
        if j >= 1:
            y_prev = hist[j - 1]
            for i in a.indices():
                if a.covers(i + 1) and y_prev.covers(i):
                    space[(j, i)] = a[i + 1] - _inv(y_prev[i], i, "y_i") * a[i] * y[i]
        if j + 1 < len(layers):
            a_next = layers[j + 1].a
            for i in a_next.indices():
                if y.covers(i - 1):
                    time[(j, i)] = a_next[i] - _inv(1 + y[i - 1], i - 1, "1 + y_i") * a[i] * (1 + y[i])
    return {"space": space, "time": time}


def y_cross_ratio_residual(S: LeapfrogState, anchor: RingValue | None = None) -> dict[int, RingValue]:
    """(a_i)^-1 b_i + kappa(u_i, u_{i+1}, u⁻_i a_i, u⁻_{i+1}): the cross-ratio form of y."""
    ab, scalings = ab_from_vertices(S, anchor)
    u, um = _lifts(S, scalings)
    residuals = {}
    for i in ab.indices():
        a, b = ab.a[i], ab.b[i]
        residuals[i] = _inv(a, i, "a_i") * b + cross_ratio(u[i], u[i + 1], um[i] * a, um[i + 1])
    return residuals


# -- sampling ---------------------------------------------------------------------------------


def random_state(
    seed: int | np.random.Generator,
    N: int = 6,
    mode: Mode | str = Mode.WINDOWED,
    W: int = 4,
    d: int = 2,
    backend: Backend | str = Backend.RATIONAL,
) -> LeapfrogState:
    """Generic state that admits at least one step; resamples on degeneracy.

    Windowed states cover [-W, N+W); periodic states have N vertices.
    """
    mode = Mode(mode)
    rng = as_generator(seed)
    size = N if mode is Mode.PERIODIC else N + 2 * W
    for _ in range(MAX_SAMPLE_ATTEMPTS):
        v_minus = [random_generic(rng, d, backend) for _ in range(size)]
        v = [random_generic(rng, d, backend) for _ in range(size)]
        if mode is Mode.PERIODIC:
            state = LeapfrogState.periodic(v_minus, v)
        else:
            state = LeapfrogState.windowed(N, v_minus, v, -W)
        try:
            step_vertices(state)
        except NCLeapfrogError:
            continue
        return state
    raise DegenerateConfiguration(None, f"no generic state after {MAX_SAMPLE_ATTEMPTS} attempts")
