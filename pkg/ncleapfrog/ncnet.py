"""
The leapfrog map as square moves on a cylindric network.

Each of the N faces carries edge weights a_i, b_i, c_i, d_i, either numeric (RingValue) or symbolic
(NCExpr over generators a1, b1, ...). Face weights X_i, Y_i and the monodromy Z are read off in a
fixed gauge; a square move on every face followed by the regauge is one step of the map, which in
face weights is step_xy. Conserved quantities are the coefficients of the traces of powers of the
monodromy matrix, and the bracket relations of the face weights are checked symbolically.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction

from ncleapfrog.algebra import CentralScalar, RingValue, random_assignment, ring_inv
from ncleapfrog.brackets import DEFAULT_EVAL_D, DEFAULT_POINTS, FACE_TABLE, BracketEngine, Space, check_equal
from ncleapfrog.errors import DegenerateConfiguration, NCLeapfrogError, NotInvertible, SingularF
from ncleapfrog.leapfrog import Lattice, leap_a, leap_b
from ncleapfrog.quasidet import QMatrix, nc_inverse
from ncleapfrog.words import AtomRegistry, NCExpr, TensorExpr, format_expr

logger = logging.getLogger(__name__)

Weight = RingValue | NCExpr

KINDS = ("a", "b", "c", "d")

# Symbolic relation checks grow quickly with the number of faces
MAX_SYMBOLIC_FACES = 4


@dataclass(frozen=True)
class NetworkState:
    """Edge weights of the N faces; entry k of each tuple belongs to face k + 1.

    `moved[k]` records that face k + 1 has been through a square move (colours swapped), which
    changes the gauge in which face weights are read. Symbolic states carry the registry of the
    atoms F_i = (b_i + a_i d_i c_i)^-1 introduced by moves.
    """

    a: tuple[Weight, ...]
    b: tuple[Weight, ...]
    c: tuple[Weight, ...]
    d: tuple[Weight, ...]
    moved: tuple[bool, ...] = ()
    registry: AtomRegistry | None = field(default=None, compare=False)

    def __post_init__(self):
        n = len(self.a)
        if n < 1:
            raise ValueError("network needs at least one face")
        if not len(self.b) == len(self.c) == len(self.d) == n:
            raise ValueError("weights a, b, c, d must have one entry per face")
        if not self.moved:
            object.__setattr__(self, "moved", (False,) * n)
        elif len(self.moved) != n:
            raise ValueError(f"moved flags need {n} entries, got {len(self.moved)}")

    @property
    def N(self) -> int:  # noqa: N802
        return len(self.a)

    @property
    def symbolic(self) -> bool:
        return self.registry is not None

    def weight(self, kind: str, i: int) -> Weight:
        """Weight `kind` of face i (1-based)."""
        if kind not in KINDS:
            raise ValueError(f"unknown weight kind {kind!r}")
        if not 1 <= i <= self.N:
            raise ValueError(f"face index {i} outside 1..{self.N}")
        return getattr(self, kind)[i - 1]

    def with_face(self, i: int, a: Weight, b: Weight, c: Weight, d: Weight, moved: bool) -> NetworkState:
        def put(values, value):
            return values[: i - 1] + (value,) + values[i:]

        return replace(
            self,
            a=put(self.a, a),
            b=put(self.b, b),
            c=put(self.c, c),
            d=put(self.d, d),
            moved=put(self.moved, moved),
        )

    def _one(self) -> Weight:
        return NCExpr.const(1) if self.symbolic else self.a[0].one()

    def _inv(self, value: Weight, index, what: str) -> Weight:
        if self.symbolic:
            return value.inverse(self.registry)
        try:
            return ring_inv(value)
        except NotInvertible as exc:
            raise DegenerateConfiguration(index, f"{what} not invertible") from exc


@dataclass(frozen=True)
class FaceWeights:
    """Face weights X_1..X_N, Y_1..Y_N and monodromy Z, with X_{i+N} = Z X_i Z^-1."""

    X: tuple[Weight, ...]
    Y: tuple[Weight, ...]
    Z: Weight

    @property
    def N(self) -> int:  # noqa: N802
        return len(self.X)

    def _twisted(self, values: tuple[RingValue, ...], i: int) -> RingValue:
        turns, k = divmod(i - 1, self.N)
        return (self.Z**turns) * values[k] * (self.Z**-turns)

    def x(self, i: int) -> RingValue:
        """X_i for any integer i (numeric weights only)."""
        return self._twisted(self.X, i)

    def y(self, i: int) -> RingValue:
        return self._twisted(self.Y, i)


def numeric_network(a, b, c, d) -> NetworkState:
    return NetworkState(tuple(a), tuple(b), tuple(c), tuple(d))


def random_network(seed, N: int, d: int = 2, backend="rational") -> NetworkState:
    """Generic invertible weights for every edge."""
    names = [f"{kind}{i}" for i in range(1, N + 1) for kind in KINDS]
    values = random_assignment(seed, names, d, backend)
    return NetworkState(*(tuple(values[f"{kind}{i}"] for i in range(1, N + 1)) for kind in KINDS))


def symbolic_network(N: int) -> NetworkState:
    """Network whose weights are the free generators a1..dN."""
    weights = [tuple(NCExpr.gen(f"{kind}{i}") for i in range(1, N + 1)) for kind in KINDS]
    return NetworkState(*weights, registry=AtomRegistry())


# -- moves -------------------------------------------------------------------------------------


def square_move(state: NetworkState, i: int) -> NetworkState:
    """Square move on face i (1-based): f = b + a d c, then

    ã = d c f^-1, b̃ = f, c̃ = f^-1 a d, d̃ = d c f^-1 b c^-1.
    """
    if state.moved[i - 1]:
        raise ValueError(f"face {i} has already been moved; regauge with gauge_to_xy first")
    a, b, c, d = (state.weight(kind, i) for kind in KINDS)
    f = b + a * d * c
    if state.symbolic:
        F = state.registry.register(f"F{i}", f)
    else:
        try:
            F = ring_inv(f)
        except NotInvertible as exc:
            raise SingularF(i) from exc
    c_inv = state._inv(c, i, "c_i")
    logger.debug("square move on face %d", i)
    return state.with_face(i, d * c * F, f, F * a * d, d * c * F * b * c_inv, moved=True)


def move_all(state: NetworkState) -> NetworkState:
    """One time step of the network: a square move on every face."""
    for i in range(1, state.N + 1):
        state = square_move(state, i)
    return state


def square_boundary_matrix(state: NetworkState, i: int) -> QMatrix:
    """Boundary measurements of face i.

    [[b+adc, ad], [dc, d]] before the move, [[b̃, b̃c̃], [ãb̃, ãb̃c̃+d̃]] after it.
    """
    if state.symbolic:
        raise ValueError("square_boundary_matrix needs numeric weights")
    a, b, c, d = (state.weight(kind, i) for kind in KINDS)
    if state.moved[i - 1]:
        return QMatrix.from_rows([[b, b * c], [a * b, a * b * c + d]])
    return QMatrix.from_rows([[b + a * d * c, a * d], [d * c, d]])


# -- gauges ------------------------------------------------------------------------------------


def _unmoved_gauge(state: NetworkState) -> FaceWeights:
    N = state.N
    a, b, c, d = state.a, state.b, state.c, state.d
    inv = state._inv
    c_inv = [inv(c[k], k + 1, "c_i") for k in range(N)]
    d_inv = [inv(d[k], k + 1, "d_i") for k in range(N)]

    # z[k] = d_1 c_1 ... d_{k} c_{k} d_{k+1}, z_inv alongside
    z, z_inv = [d[0]], [d_inv[0]]
    for k in range(1, N):
        z.append(z[-1] * c[k - 1] * d[k])
        z_inv.append(d_inv[k] * c_inv[k - 1] * z_inv[-1])

    X = [c_inv[N - 1] * a[0]]
    Y = [c_inv[N - 1] * b[0] * c_inv[0] * d_inv[0]]
    for k in range(1, N):
        X.append(z[k - 1] * a[k] * c_inv[k - 1] * z_inv[k - 1])
        Y.append(z[k - 1] * b[k] * c_inv[k] * d_inv[k] * c_inv[k - 1] * z_inv[k - 1])
    return FaceWeights(tuple(X), tuple(Y), z[N - 1] * c[N - 1])


def _moved_gauge(state: NetworkState) -> FaceWeights:
    N = state.N
    a, c, d = state.a, state.c, state.d
    b = tuple(state.registry.compress(x) for x in state.b) if state.symbolic else state.b
    inv = state._inv
    a_inv = [inv(a[k], k + 1, "moved a_i") for k in range(N)]
    b_inv = [inv(b[k], k + 1, "moved b_i") for k in range(N)]

    # xi[k] = ã_1 b̃_1 ... ã_k b̃_k
    xi, xi_inv = [state._one()], [state._one()]
    for k in range(N):
        xi.append(xi[-1] * a[k] * b[k])
        xi_inv.append(b_inv[k] * a_inv[k] * xi_inv[-1])

    X, Y = [], []
    for k in range(N):
        X.append(xi[k] * c[k - 1] * a_inv[k] * xi_inv[k])
        Y.append(xi[k] * d[k] * a_inv[(k + 1) % N] * b_inv[k] * a_inv[k] * xi_inv[k])
    return FaceWeights(tuple(X), tuple(Y), xi[N])


def xy_weights(state: NetworkState) -> FaceWeights:
    """Face weights in the standard gauge, or in the moved gauge when every face has been moved."""
    if not any(state.moved):
        return _unmoved_gauge(state)
    if all(state.moved):
        return _moved_gauge(state)
    raise ValueError("face weights need all faces moved or none; got a partially moved network")


def face_weights(state: NetworkState) -> FaceWeights:
    return xy_weights(state)


def gauge_to_xy(weights: FaceWeights) -> NetworkState:
    """An unmoved numeric network with the given face weights (c_i = d_i = 1 except c_N = Z)."""
    N = weights.N
    one = weights.Z.one()
    Z = weights.Z
    a = [Z * weights.X[0]] + list(weights.X[1:])
    if N == 1:
        b = [Z * weights.Y[0] * Z]
    else:
        b = [Z * weights.Y[0]] + list(weights.Y[1 : N - 1]) + [weights.Y[N - 1] * Z]
    c = [one] * (N - 1) + [Z]
    return numeric_network(a, b, c, [one] * N)


def time_step(state: NetworkState) -> NetworkState:
    """Move every face, then return to the standard gauge."""
    return gauge_to_xy(xy_weights(move_all(state)))


# -- dynamics in face weights ------------------------------------------------------------------


def step_xy(weights: FaceWeights) -> FaceWeights:
    """X̃_i = (X_{i-1}+Y_{i-1})^-1 X_{i-1} (X_i+Y_i), Ỹ_i = (X_i+Y_i)^-1 Y_i (X_{i+1}+Y_{i+1}), Z̃ = Z."""
    N = weights.N
    window = range(0, N + 2)
    X = Lattice.build(weights.x, window)
    Y = Lattice.build(weights.y, window)
    inner = range(1, N + 1)
    return FaceWeights(
        tuple(leap_a(X, Y, i) for i in inner),
        tuple(leap_b(X, Y, i) for i in inner),
        weights.Z,
    )


def _mu_value(mu):
    return mu.value if isinstance(mu, CentralScalar) else mu


def face_boundary_matrix(weights: FaceWeights, i: int, mu) -> QMatrix:
    """ℬ_i(μ) = [[X_i, μ(X_i+Y_i)], [μ, μ²]]."""
    m = _mu_value(mu)
    X, Y = weights.X[i - 1], weights.Y[i - 1]
    one = X.one()
    return QMatrix.from_rows([[X, (X + Y) * m], [one * m, one * (m * m)]])


def boundary_matrix(weights: FaceWeights, mu) -> QMatrix:
    """ℬ(μ) = ℬ_1(μ) ⋯ ℬ_N(μ)."""
    result = face_boundary_matrix(weights, 1, mu)
    for i in range(2, weights.N + 1):
        result = result @ face_boundary_matrix(weights, i, mu)
    return result


def monodromy_matrix(weights: FaceWeights, mu) -> QMatrix:
    """ℬ(μ) diag(Z, Z)."""
    return boundary_matrix(weights, mu) @ QMatrix.diagonal([weights.Z, weights.Z])


MuPolynomial = list[QMatrix]


def _poly_mul(p: MuPolynomial, q: MuPolynomial) -> MuPolynomial:
    out: list[QMatrix | None] = [None] * (len(p) + len(q) - 1)
    for i, x in enumerate(p):
        for j, y in enumerate(q):
            term = x @ y
            out[i + j] = term if out[i + j] is None else out[i + j] + term
    return out


def _monodromy_polynomial(weights: FaceWeights) -> MuPolynomial:
    """Coefficients of μ^0, μ^1, ... of the monodromy matrix."""
    poly: MuPolynomial | None = None
    for X, Y in zip(weights.X, weights.Y, strict=True):
        one, zero = X.one(), X.zero()
        face = [
            QMatrix.from_rows([[X, zero], [zero, zero]]),
            QMatrix.from_rows([[zero, X + Y], [one, zero]]),
            QMatrix.from_rows([[zero, zero], [zero, one]]),
        ]
        poly = face if poly is None else _poly_mul(poly, face)
    twist = QMatrix.diagonal([weights.Z, weights.Z])
    return [coefficient @ twist for coefficient in poly]


def _trace(M: QMatrix):
    return sum((M[r, r].trace() for r in range(M.rows)), start=0)


def invariants(weights: FaceWeights, max_power: int | None = None) -> dict[tuple[int, int], object]:
    """t_{i,j}: coefficient of μ^j in tr(𝓜(μ)^i), for i = 1..max_power (default 2N).

    Returns:
        dict keyed by (i, j) with exact Fractions on rational weights
    """
    max_power = max_power or 2 * weights.N
    base = _monodromy_polynomial(weights)
    power = base
    table = {}
    for i in range(1, max_power + 1):
        if i > 1:
            power = _poly_mul(power, base)
        for j, coefficient in enumerate(power):
            table[(i, j)] = _trace(coefficient)
    return table


def lax_factorization_residual(weights: FaceWeights, mu) -> dict[int, QMatrix]:
    """ℬ_i - A_i L_i A_{i+1}^-1 for every face, which vanishes for any μ != 0.

    λ = μ², L_i = [[0, λY_i], [1, λ+X_{i+1}]] and A_i = [[λ^-1, λ^-1 X_i], [0, μ^-1]].
    """
    m = _mu_value(mu)
    if m == 0:
        raise ValueError("Lax factorization needs mu != 0")
    lam = m * m
    inv_mu = 1 / Fraction(m) if isinstance(m, int | Fraction) else 1.0 / m
    inv_lam = inv_mu * inv_mu
    one = weights.Z.one()
    zero = one.zero()

    def A(i: int) -> QMatrix:
        return QMatrix.from_rows([[one * inv_lam, weights.x(i) * inv_lam], [zero, one * inv_mu]])

    residuals = {}
    for i in range(1, weights.N + 1):
        L = QMatrix.from_rows([[zero, weights.y(i) * lam], [one, one * lam + weights.x(i + 1)]])
        residuals[i] = face_boundary_matrix(weights, i, m) - A(i) @ L @ nc_inverse(A(i + 1))
    return residuals


@dataclass
class ConservationReport:
    initial: dict[tuple[int, int], object]
    rows: list[dict]
    drift: dict[tuple[int, int], float]

    @property
    def conserved(self) -> bool:
        return all(value == 0 for value in self.drift.values())


def invariants_conservation(
    weights: FaceWeights,
    steps: int,
    max_power: int | None = None,
    perturb: tuple[int, RingValue] | None = None,
) -> ConservationReport:
    """Track every t_{i,j} along `steps` applications of step_xy.

    Args:
        weights: initial face weights
        steps: number of steps
        max_power: largest power i (default 2N)
        perturb: optional (step, delta) adding delta to X_1 after that step, as a control

    Returns:
        ConservationReport with one row per (step, i, j) and the largest drift per (i, j)
    """
    initial = invariants(weights, max_power)
    rows = [{"step": 0, "i": i, "j": j, "value": v, "drift": 0} for (i, j), v in initial.items()]
    drift = dict.fromkeys(initial, 0.0)
    current = weights
    for step in range(1, steps + 1):
        try:
            current = step_xy(current)
        except DegenerateConfiguration as exc:
            raise exc.at_step(step) from None
        if perturb is not None and perturb[0] == step:
            current = FaceWeights((current.X[0] + perturb[1],) + current.X[1:], current.Y, current.Z)
        table = invariants(current, max_power)
        for key, value in table.items():
            delta = value - initial.get(key, 0)
            rows.append({"step": step, "i": key[0], "j": key[1], "value": value, "drift": delta})
            drift[key] = max(drift.get(key, 0.0), abs(float(delta)))
        logger.debug("conservation step %d: max drift %g", step, max(drift.values(), default=0.0))
    return ConservationReport(initial, rows, drift)


# -- bracket relations -------------------------------------------------------------------------


@dataclass(frozen=True)
class Relation:
    """lhs = rhs, asserted in `space`."""

    relation_id: str
    group: str
    lhs: NCExpr | TensorExpr
    rhs: NCExpr | TensorExpr
    space: Space


def _face_relations(tag: str, group: str, engine: BracketEngine, w: FaceWeights) -> list[Relation]:
    """Neighbour rules, the wrap-around rules and commuting X for face weights X, Y, Z."""
    N = w.N
    X, Y, Z = w.X, w.Y, w.Z
    Z_inv = Z.inverse(engine.registry)
    h0 = engine.induced_bracket
    relations = []
    for i in range(N):
        for j in range(i + 1, N):
            relations.append(
                Relation(f"{tag}<X{i + 1},X{j + 1}>=0", group, h0(X[i], X[j]), NCExpr.zero(), Space.CYCLIC)
            )
    for i in range(N):
        relations.append(Relation(f"{tag}<Y{i + 1},X{i + 1}>", group, h0(Y[i], X[i]), Y[i] * X[i], Space.CYCLIC))
    for i in range(N - 1):
        relations.append(
            Relation(f"{tag}<X{i + 2},Y{i + 1}>", group, h0(X[i + 1], Y[i]), X[i + 1] * Y[i], Space.CYCLIC)
        )
    wrap = Y[0] * Z_inv * Y[N - 1] * Z
    if N >= 3:
        for i in range(N - 1):
            relations.append(
                Relation(f"{tag}<Y{i + 2},Y{i + 1}>", group, h0(Y[i + 1], Y[i]), Y[i + 1] * Y[i], Space.CYCLIC)
            )
        relations.append(Relation(f"{tag}<Y1,Y{N}>", group, h0(Y[0], Y[N - 1]), wrap, Space.CYCLIC))
    elif N == 2:
        # with two faces Y2 is both the right and the left neighbour of Y1: the neighbour rule and the
        # wrap-around rule land on the same bracket <Y2,Y1>, so their terms are checked as one sum
        relations.append(Relation(f"{tag}<Y2,Y1>", group, h0(Y[1], Y[0]), Y[1] * Y[0] - wrap, Space.CYCLIC))
    relations.append(
        Relation(f"{tag}<X1,Y{N}>", group, h0(X[0], Y[N - 1]), X[0] * Z_inv * Y[N - 1] * Z, Space.CYCLIC)
    )
    return relations


def _table_relations(engine: BracketEngine, N: int) -> list[Relation]:
    relations = []
    for i in range(1, N + 1):
        for x in KINDS:
            for y in KINDS:
                entry = FACE_TABLE.get((x, y))
                expected = TensorExpr()
                if entry is not None:
                    c, left, right = entry
                    expected = TensorExpr.pure(
                        tuple((f"{k}{i}", 1) for k in left), tuple((f"{k}{i}", 1) for k in right), c
                    )
                lhs = engine.double_bracket(NCExpr.gen(f"{x}{i}"), NCExpr.gen(f"{y}{i}"))
                relations.append(Relation(f"{{{{{x}{i},{y}{i}}}}}", "edge_table", lhs, expected, Space.TENSOR))
    if N >= 2:
        lhs = engine.double_bracket(NCExpr.gen("a1"), NCExpr.gen("b2"))
        relations.append(Relation("{{a1,b2}}=0", "edge_table", lhs, TensorExpr(), Space.TENSOR))
    return relations


def _moved_table_relations(engine: BracketEngine, moved: NetworkState) -> list[Relation]:
    """{{b̃,ã}} = ½ ãb̃⊗1, {{ã,d̃}} = ½ ã⊗d̃, {{b̃,c̃}} = ½ 1⊗b̃c̃, {{c̃,d̃}} = ½ d̃⊗c̃."""
    half = Fraction(1, 2)
    relations = []
    for i in range(1, moved.N + 1):
        a, c, d = (moved.weight(kind, i) for kind in ("a", "c", "d"))
        b = moved.registry.compress(moved.weight("b", i))
        one = NCExpr.const(1)
        pairs = [
            ("b~,a~", b, a, a * b, one),
            ("a~,d~", a, d, a, d),
            ("b~,c~", b, c, one, b * c),
            ("c~,d~", c, d, d, c),
        ]
        for name, x, y, left, right in pairs:
            lhs = engine.double_bracket(x, y)
            rhs = _tensor(left, right) * half
            relations.append(Relation(f"{{{{{name}}}}}_{i}", "moved_edge_table", lhs, rhs, Space.TENSOR))
    return relations


def _tensor(left: NCExpr, right: NCExpr) -> TensorExpr:
    total = TensorExpr()
    for w1, c1 in left.terms:
        for w2, c2 in right.terms:
            total = total + TensorExpr.pure(w1, w2, c1 * c2)
    return total


def _jacobi_relations(engine: BracketEngine, w: FaceWeights) -> list[Relation]:
    X, Y, Z = w.X, w.Y, w.Z
    triples = [("X1,Y1,Z", X[0], Y[0], Z), ("X1,Y1,X2", X[0], Y[0], X[1]), ("Y1,Y2,X1Y1", Y[0], Y[1], X[0] * Y[0])]
    return [
        Relation(f"h0-jacobi({name})", "jacobi", engine.h0_jacobiator(x, y, z), NCExpr.zero(), Space.CYCLIC)
        for name, x, y, z in triples
    ]


def bracket_relation_suite(
    N: int,
    points: int = DEFAULT_POINTS,
    d: int = DEFAULT_EVAL_D,
    seed: int = 0,
    jacobi: bool = True,
) -> dict:
    """Check the bracket relations of face weights before and after one step, and both face tables.

    Returns:
        dict with a `results` list (one entry per relation with a `success` flag) and a `summary`
    """
    if not 2 <= N <= MAX_SYMBOLIC_FACES:
        raise ValueError(f"bracket relation suite supports 2 <= N <= {MAX_SYMBOLIC_FACES}, got N={N}")
    state = symbolic_network(N)
    moved = move_all(state)
    engine = BracketEngine(state.registry)

    builders = [
        lambda: _table_relations(engine, N),
        lambda: _face_relations("", "face_weights", engine, face_weights(state)),
        lambda: _moved_table_relations(engine, moved),
        lambda: _face_relations("~", "invariance", engine, face_weights(moved)),
    ]
    if jacobi:
        builders.append(lambda: _jacobi_relations(engine, face_weights(state)))

    results = []
    for build in builders:
        for relation in build():
            logger.info("checking %s", relation.relation_id)
            try:
                check = check_equal(relation.lhs, relation.rhs, relation.space, engine.registry, points, d, seed)
                results.append(
                    {
                        "relation": relation.relation_id,
                        "group": relation.group,
                        "space": relation.space.value,
                        "success": check.equal,
                        "seed": seed,
                        "points": check.points,
                        "failing_point": check.failing_point,
                    }
                )
            except NCLeapfrogError as e:
                results.append(
                    {
                        "relation": relation.relation_id,
                        "group": relation.group,
                        "space": relation.space.value,
                        "success": False,
                        "seed": seed,
                        "error": str(e),
                    }
                )

    passed = sum(1 for r in results if r["success"])
    return {
        "N": N,
        "results": results,
        "summary": {"total_relations": len(results), "passed": passed, "failed": len(results) - passed},
    }


def describe(weights: FaceWeights) -> dict[str, str]:
    """Text form of symbolic face weights."""
    out = {f"X{i + 1}": format_expr(x) for i, x in enumerate(weights.X)}
    out.update({f"Y{i + 1}": format_expr(y) for i, y in enumerate(weights.Y)})
    out["Z"] = format_expr(weights.Z)
    return out


def conjugated(weights: FaceWeights, g: RingValue) -> FaceWeights:
    """Simultaneous conjugation g W g^-1 of every face weight."""
    g_inv = ring_inv(g)
    return FaceWeights(
        tuple(g * x * g_inv for x in weights.X), tuple(g * y * g_inv for y in weights.Y), g * weights.Z * g_inv
    )
