"""
Double brackets on the free algebra of network edge weights, the induced bracket, the cyclic space,
and identity testing by evaluation at generic rational matrices.

Brackets of base letters come from the face table below; inverse letters and atoms are handled by the
inverse rule {{g^-1, y}} = -(p g^-1) ⊗ (g^-1 q) summed over {{g, y}} = p ⊗ q (and its mirror in the
right slot), and words by the two Leibniz rules.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from ncleapfrog._compat import StrEnum
from fractions import Fraction

import numpy as np

from ncleapfrog.algebra import MAX_SAMPLE_ATTEMPTS, Backend, RingValue, random_assignment, ring_inv
from ncleapfrog.errors import NotInvertible
from ncleapfrog.words import (
    EMPTY,
    AtomRegistry,
    Letter,
    NCExpr,
    TensorExpr,
    TripleTensor,
    Word,
    cyclic_normal_word,
    letters,
)

logger = logging.getLogger(__name__)

EDGE_WEIGHT = re.compile(r"^(?P<kind>[abcd])(?P<index>\d+)$")

HALF = Fraction(1, 2)

# {{x_i, y_i}} = coefficient * left ⊗ right; letters of one face, all other pairs vanish
FACE_TABLE: dict[tuple[str, str], tuple[Fraction, str, str]] = {
    ("b", "a"): (HALF, "b", "a"),
    ("a", "b"): (-HALF, "a", "b"),
    ("b", "c"): (HALF, "c", "b"),
    ("c", "b"): (-HALF, "b", "c"),
    ("a", "d"): (HALF, "", "ad"),
    ("d", "a"): (-HALF, "ad", ""),
    ("c", "d"): (HALF, "dc", ""),
    ("d", "c"): (-HALF, "", "dc"),
}

DEFAULT_POINTS = 20
DEFAULT_EVAL_D = 3


def _face_word(kinds: str, index: str) -> Word:
    return tuple((f"{kind}{index}", 1) for kind in kinds)


class BracketEngine:
    """Double bracket calculator with a per-letter cache; atoms are looked up in `registry`."""

    def __init__(self, registry: AtomRegistry | None = None):
        self.registry = registry or AtomRegistry()
        self._cache: dict[tuple[Letter, Letter], TensorExpr] = {}

    # -- letters ----------------------------------------------------------------------------

    def _base_bracket(self, x: str, y: str) -> TensorExpr:
        mx, my = EDGE_WEIGHT.match(x), EDGE_WEIGHT.match(y)
        if mx is None or my is None:
            unknown = x if mx is None else y
            raise ValueError(f"unknown generator {unknown!r}: expected a_i, b_i, c_i, d_i or a registered atom")
        if mx["index"] != my["index"]:
            return TensorExpr()
        entry = FACE_TABLE.get((mx["kind"], my["kind"]))
        if entry is None:
            return TensorExpr()
        coefficient, left, right = entry
        index = mx["index"]
        return TensorExpr.pure(_face_word(left, index), _face_word(right, index), coefficient)

    def letter_bracket(self, x: Letter, y: Letter) -> TensorExpr:
        key = (x, y)
        if key not in self._cache:
            self._cache[key] = self._letter_bracket(x, y)
        return self._cache[key]

    def _letter_bracket(self, x: Letter, y: Letter) -> TensorExpr:
        (gx, px), (gy, py) = x, y
        own: Word = (x,)
        if self.registry.is_atom(gx):
            definition = self.registry.definition(gx)
            inner = self.expr_bracket(definition, NCExpr.word((y,)))
            return inner if px < 0 else -inner.sandwich(EMPTY, own, own, EMPTY)
        if px < 0:
            return -self.letter_bracket((gx, 1), y).sandwich(EMPTY, own, own, EMPTY)
        own = (y,)
        if self.registry.is_atom(gy):
            definition = self.registry.definition(gy)
            inner = self.expr_bracket(NCExpr.word((x,)), definition)
            return inner if py < 0 else -inner.sandwich(own, EMPTY, EMPTY, own)
        if py < 0:
            return -self.letter_bracket(x, (gy, 1)).sandwich(own, EMPTY, EMPTY, own)
        return self._base_bracket(gx, gy)

    # -- words and expressions --------------------------------------------------------------

    def word_bracket(self, u: Word, w: Word) -> TensorExpr:
        """Sum over letter pairs of (w_<l X u_>k) ⊗ (u_<k Y w_>l) with X ⊗ Y = {{u_k, w_l}}."""
        us, ws = letters(u), letters(w)
        total = TensorExpr()
        for k, uk in enumerate(us):
            before_u, after_u = tuple(us[:k]), tuple(us[k + 1 :])
            for l, wl in enumerate(ws):  # noqa: E741
                inner = self.letter_bracket(uk, wl)
                if inner.is_zero():
                    continue
                total = total + inner.sandwich(tuple(ws[:l]), after_u, before_u, tuple(ws[l + 1 :]))
        return total

    def expr_bracket(self, e1: NCExpr, e2: NCExpr) -> TensorExpr:
        total = TensorExpr()
        for w1, c1 in e1.terms:
            for w2, c2 in e2.terms:
                total = total + self.word_bracket(w1, w2) * (c1 * c2)
        return total

    def double_bracket(self, e1: NCExpr, e2: NCExpr) -> TensorExpr:
        return self.expr_bracket(e1, e2)

    def induced_bracket(self, e1: NCExpr, e2: NCExpr) -> NCExpr:
        """{e1, e2} = mu({{e1, e2}})."""
        return self.expr_bracket(e1, e2).multiply()

    def h0_bracket(self, e1: NCExpr, e2: NCExpr) -> NCExpr:
        """The bracket on the cyclic space, returned in natural form."""
        return natural_form(self.induced_bracket(e1, e2))

    def _left_triple(self, x: NCExpr, inner: TensorExpr) -> TripleTensor:
        acc: dict[tuple[Word, Word, Word], Fraction] = {}
        for (p, q), c in inner.terms:
            for (r, s), c2 in self.expr_bracket(x, NCExpr.word(p)).terms:
                key = (r, s, q)
                acc[key] = acc.get(key, Fraction(0)) + c * c2
        return TripleTensor.from_mapping(acc)

    def double_jacobiator(self, x: NCExpr, y: NCExpr, z: NCExpr) -> TripleTensor:
        """{{x,{{y,z}}}}_L + t{{y,{{z,x}}}}_L + t^2{{z,{{x,y}}}}_L with t(p⊗q⊗r) = r⊗p⊗q."""
        first = self._left_triple(x, self.expr_bracket(y, z))
        second = self._left_triple(y, self.expr_bracket(z, x)).rotate()
        third = self._left_triple(z, self.expr_bracket(x, y)).rotate().rotate()
        return first + second + third

    def h0_jacobiator(self, x: NCExpr, y: NCExpr, z: NCExpr) -> NCExpr:
        """<x,<y,z>> + <y,<z,x>> + <z,<x,y>> in natural form."""
        total = (
            self.induced_bracket(x, self.induced_bracket(y, z))
            + self.induced_bracket(y, self.induced_bracket(z, x))
            + self.induced_bracket(z, self.induced_bracket(x, y))
        )
        return natural_form(total)


def double_bracket(e1: NCExpr, e2: NCExpr, registry: AtomRegistry | None = None) -> TensorExpr:
    return BracketEngine(registry).double_bracket(e1, e2)


def induced_bracket(e1: NCExpr, e2: NCExpr, registry: AtomRegistry | None = None) -> NCExpr:
    return BracketEngine(registry).induced_bracket(e1, e2)


def natural_form(e: NCExpr) -> NCExpr:
    """Representative of the class of e in the cyclic space: every word rotated to its necklace form."""
    acc: dict[Word, Fraction] = {}
    for word, c in e.terms:
        key = cyclic_normal_word(word)
        acc[key] = acc.get(key, Fraction(0)) + c
    return NCExpr.from_mapping(acc)


# -- evaluation ------------------------------------------------------------------------------


class _Evaluator:
    def __init__(self, assignment: dict[str, RingValue], registry: AtomRegistry, d: int, backend: Backend):
        self.assignment = assignment
        self.registry = registry
        self.one = RingValue.identity(d, backend)
        self._atoms: dict[str, RingValue] = {}

    def generator(self, name: str) -> RingValue:
        if self.registry.is_atom(name):
            if name not in self._atoms:
                self._atoms[name] = ring_inv(self.expr(self.registry.definition(name)))
            return self._atoms[name]
        try:
            return self.assignment[name]
        except KeyError:
            raise ValueError(f"no value assigned to generator {name!r}") from None

    def word(self, word: Word) -> RingValue:
        value = self.one
        for gen, power in word:
            value = value * (self.generator(gen) ** power)
        return value

    def expr(self, e: NCExpr) -> RingValue:
        total = self.one.zero()
        for word, c in e.terms:
            total = total + self.word(word) * c
        return total

    def tensor(self, t: TensorExpr) -> RingValue:
        d = self.one.d
        total = RingValue.zeros(d * d, self.one.backend)
        for (p, q), c in t.terms:
            total = total + self.word(p).kron(self.word(q)) * c
        return total

    def triple(self, t: TripleTensor) -> RingValue:
        d = self.one.d
        total = RingValue.zeros(d**3, self.one.backend)
        for (p, q, r), c in t.terms:
            total = total + self.word(p).kron(self.word(q)).kron(self.word(r)) * c
        return total


def eval_expr(
    e: NCExpr | TensorExpr | TripleTensor,
    assignment: dict[str, RingValue],
    registry: AtomRegistry | None = None,
    d: int | None = None,
) -> RingValue:
    """Evaluate at a point; tensors evaluate to Kronecker sums of their factors.

    Args:
        e: expression, tensor or triple tensor
        assignment: generator name -> invertible RingValue (atoms are evaluated from their definitions)
        registry: atoms in use
        d: dimension, needed only when the assignment is empty

    Returns:
        RingValue of size d (d^2 for tensors, d^3 for triple tensors)
    """
    if assignment:
        sample = next(iter(assignment.values()))
        d, backend = sample.d, sample.backend
    elif d is None:
        raise ValueError("empty assignment: pass d explicitly")
    else:
        backend = Backend.RATIONAL
    evaluator = _Evaluator(assignment, registry or AtomRegistry(), d, backend)
    if isinstance(e, TensorExpr):
        return evaluator.tensor(e)
    if isinstance(e, TripleTensor):
        return evaluator.triple(e)
    return evaluator.expr(e)


class Space(StrEnum):
    """Where an identity is asserted: the algebra, its cyclic space, or a tensor power."""

    ALGEBRA = "algebra"
    CYCLIC = "cyclic"
    TENSOR = "tensor"


@dataclass(frozen=True)
class EqualityCheck:
    equal: bool
    points: int
    seed: int
    failing_point: int | None = None

    def __bool__(self) -> bool:
        return self.equal


def _generators_of(registry: AtomRegistry, *items) -> list[str]:
    exprs = []
    for item in items:
        if isinstance(item, NCExpr):
            exprs.append(item)
        else:
            exprs.extend(NCExpr.word(w) for factors, _ in item.terms for w in factors)
    return registry.base_generators(*exprs)


def check_equal(
    lhs,
    rhs,
    space: Space | str = Space.ALGEBRA,
    registry: AtomRegistry | None = None,
    points: int = DEFAULT_POINTS,
    d: int = DEFAULT_EVAL_D,
    seed: int = 0,
) -> EqualityCheck:
    """Decide lhs = rhs by exact evaluation at `points` generic rational matrix points.

    Points whose atoms are singular are resampled. In the cyclic space the traces are compared;
    tensors compare their Kronecker evaluations.
    """
    space = Space(space)
    registry = registry or AtomRegistry()
    names = _generators_of(registry, lhs, rhs)
    for point in range(points):
        for attempt in range(MAX_SAMPLE_ATTEMPTS):
            assignment = random_assignment(np.random.default_rng([seed, point, attempt]), names, d)
            try:
                left = eval_expr(lhs, assignment, registry, d)
                right = eval_expr(rhs, assignment, registry, d)
            except NotInvertible:
                logger.debug("point %d attempt %d singular, resampling", point, attempt)
                continue
            break
        else:
            raise NotInvertible(f"no regular evaluation point after {MAX_SAMPLE_ATTEMPTS} attempts")
        same = left.trace() == right.trace() if space is Space.CYCLIC else left == right
        if not same:
            return EqualityCheck(False, point + 1, seed, point)
    return EqualityCheck(True, points, seed)
