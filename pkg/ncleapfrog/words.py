"""
Formal expressions over network edge weights: reduced words, rational linear combinations of words,
tensors of words, and the registry of atoms standing for inverses of sums.

A word is a tuple of (generator, power) syllables reduced as in a free group. An atom such as F1 is a
letter whose value is the inverse of a registered defining expression (F1 = (b1 + a1*d1*c1)^-1), so
F1^-1 behaves like the sum itself while all expressions stay inside the free-group algebra.

Text form: terms sorted, coefficient first as p/q, letters joined by `*`, `^k` for powers, e.g.
`1/2*b1*a1 - a1^-1*b1*F1`.
"""

from __future__ import annotations

import re
from collections import defaultdict
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from fractions import Fraction

from ncleapfrog.errors import UnregisteredInverse

Syllable = tuple[str, int]
Word = tuple[Syllable, ...]
Letter = tuple[str, int]

EMPTY: Word = ()

IDENTIFIER = re.compile(r"^[A-Za-z][A-Za-z]*\d+$")
FACTOR = re.compile(r"^(?P<name>[A-Za-z][A-Za-z]*\d+)(\^(?P<power>-?\d+))?$")
COEFFICIENT = re.compile(r"^\d+(/\d+)?$")


def reduce_word(syllables: Iterable[Syllable]) -> Word:
    """Merge equal neighbours and drop zero powers."""
    word: list[Syllable] = []
    for gen, power in syllables:
        if word and word[-1][0] == gen:
            word[-1] = (gen, word[-1][1] + power)
        else:
            word.append((gen, power))
        if word and word[-1][1] == 0:
            word.pop()
    return tuple(word)


def concat(*words: Word) -> Word:
    return reduce_word(s for w in words for s in w)


def invert_word(word: Word) -> Word:
    return tuple((gen, -power) for gen, power in reversed(word))


def letters(word: Word) -> list[Letter]:
    """Expand syllables into letters of power +-1."""
    out = []
    for gen, power in word:
        step = 1 if power > 0 else -1
        out.extend([(gen, step)] * abs(power))
    return out


def cyclic_normal_word(word: Word) -> Word:
    """Lexicographically least rotation of the cyclically reduced word."""
    seq = letters(word)
    while len(seq) >= 2 and seq[0][0] == seq[-1][0] and seq[0][1] == -seq[-1][1]:
        seq = seq[1:-1]
    if not seq:
        return EMPTY
    best = min(tuple(seq[k:] + seq[:k]) for k in range(len(seq)))
    return reduce_word(best)


def format_word(word: Word) -> str:
    if not word:
        return "1"
    return "*".join(gen if power == 1 else f"{gen}^{power}" for gen, power in word)


def _word_key(word: Word):
    return len(word), word


@dataclass(frozen=True)
class NCExpr:
    """Finite rational linear combination of reduced words, stored in canonical order."""

    terms: tuple[tuple[Word, Fraction], ...] = ()

    @classmethod
    def from_mapping(cls, mapping: Mapping[Word, Fraction]) -> NCExpr:
        items = [(w, Fraction(c)) for w, c in mapping.items() if c != 0]
        return cls(tuple(sorted(items, key=lambda item: _word_key(item[0]))))

    @classmethod
    def word(cls, word: Word, coefficient=1) -> NCExpr:
        return cls.from_mapping({reduce_word(word): Fraction(coefficient)})

    @classmethod
    def gen(cls, name: str, power: int = 1) -> NCExpr:
        if not IDENTIFIER.match(name):
            raise ValueError(f"invalid generator name {name!r}")
        return cls.word(((name, power),))

    @classmethod
    def const(cls, value=1) -> NCExpr:
        return cls.word(EMPTY, value)

    @classmethod
    def zero(cls) -> NCExpr:
        return cls()

    def as_dict(self) -> dict[Word, Fraction]:
        return dict(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def generators(self) -> set[str]:
        return {gen for word, _ in self.terms for gen, _ in word}

    def __iter__(self) -> Iterator[tuple[Word, Fraction]]:
        return iter(self.terms)

    def _combine(self, other: NCExpr, sign: int) -> NCExpr:
        acc: dict[Word, Fraction] = defaultdict(Fraction, self.as_dict())
        for word, c in other.terms:
            acc[word] += sign * c
        return NCExpr.from_mapping(acc)

    def __add__(self, other) -> NCExpr:
        return self._combine(_as_expr(other), 1)

    __radd__ = __add__

    def __sub__(self, other) -> NCExpr:
        return self._combine(_as_expr(other), -1)

    def __rsub__(self, other) -> NCExpr:
        return _as_expr(other)._combine(self, -1)

    def __neg__(self) -> NCExpr:
        return NCExpr(tuple((w, -c) for w, c in self.terms))

    def __mul__(self, other) -> NCExpr:
        if isinstance(other, int | Fraction):
            return NCExpr.from_mapping({w: c * other for w, c in self.terms})
        other = _as_expr(other)
        acc: dict[Word, Fraction] = defaultdict(Fraction)
        for w1, c1 in self.terms:
            for w2, c2 in other.terms:
                acc[concat(w1, w2)] += c1 * c2
        return NCExpr.from_mapping(acc)

    def __rmul__(self, other) -> NCExpr:
        if isinstance(other, int | Fraction):
            return self * other
        return _as_expr(other) * self

    def inverse(self, registry: AtomRegistry | None = None) -> NCExpr:
        """Inverse of a monomial, or the registered atom of a sum."""
        if self.is_monomial():
            word, c = self.terms[0]
            return NCExpr.word(invert_word(word), 1 / c)
        if registry is not None:
            atom = registry.atom_for(self)
            if atom is not None:
                return NCExpr.gen(atom)
        raise UnregisteredInverse(format_expr(self))

    def __str__(self) -> str:
        return format_expr(self)


def _as_expr(value) -> NCExpr:
    if isinstance(value, NCExpr):
        return value
    if isinstance(value, int | Fraction):
        return NCExpr.const(value)
    raise TypeError(f"cannot combine NCExpr with {type(value).__name__}")


@dataclass(frozen=True)
class TensorExpr:
    """Rational linear combination of pure tensors word ⊗ word."""

    terms: tuple[tuple[tuple[Word, Word], Fraction], ...] = ()

    @classmethod
    def from_mapping(cls, mapping: Mapping[tuple[Word, Word], Fraction]) -> TensorExpr:
        items = [(pair, Fraction(c)) for pair, c in mapping.items() if c != 0]
        return cls(tuple(sorted(items, key=lambda item: (_word_key(item[0][0]), _word_key(item[0][1])))))

    @classmethod
    def pure(cls, left: Word, right: Word, coefficient=1) -> TensorExpr:
        return cls.from_mapping({(reduce_word(left), reduce_word(right)): Fraction(coefficient)})

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: TensorExpr) -> TensorExpr:
        acc: dict[tuple[Word, Word], Fraction] = defaultdict(Fraction, dict(self.terms))
        for pair, c in other.terms:
            acc[pair] += c
        return TensorExpr.from_mapping(acc)

    def __neg__(self) -> TensorExpr:
        return TensorExpr(tuple((pair, -c) for pair, c in self.terms))

    def __sub__(self, other: TensorExpr) -> TensorExpr:
        return self + (-other)

    def __mul__(self, scalar) -> TensorExpr:
        return TensorExpr.from_mapping({pair: c * scalar for pair, c in self.terms})

    __rmul__ = __mul__

    def sandwich(self, outer_left: Word, inner_left: Word, inner_right: Word, outer_right: Word) -> TensorExpr:
        """Map p ⊗ q to (outer_left p inner_left) ⊗ (inner_right q outer_right)."""
        acc: dict[tuple[Word, Word], Fraction] = defaultdict(Fraction)
        for (p, q), c in self.terms:
            acc[(concat(outer_left, p, inner_left), concat(inner_right, q, outer_right))] += c
        return TensorExpr.from_mapping(acc)

    def swap(self) -> TensorExpr:
        """The flip p ⊗ q -> q ⊗ p."""
        return TensorExpr.from_mapping({(q, p): c for (p, q), c in self.terms})

    def multiply(self) -> NCExpr:
        """Multiplication map p ⊗ q -> p q."""
        acc: dict[Word, Fraction] = defaultdict(Fraction)
        for (p, q), c in self.terms:
            acc[concat(p, q)] += c
        return NCExpr.from_mapping(acc)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return "".join(
            _signed(c, f"{format_word(p)} ⊗ {format_word(q)}", first=k == 0)
            for k, ((p, q), c) in enumerate(self.terms)
        )


@dataclass(frozen=True)
class TripleTensor:
    """Rational linear combination of word ⊗ word ⊗ word."""

    terms: tuple[tuple[tuple[Word, Word, Word], Fraction], ...] = ()

    @classmethod
    def from_mapping(cls, mapping: Mapping[tuple[Word, Word, Word], Fraction]) -> TripleTensor:
        items = [(triple, Fraction(c)) for triple, c in mapping.items() if c != 0]
        return cls(tuple(sorted(items, key=lambda item: tuple(_word_key(w) for w in item[0]))))

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: TripleTensor) -> TripleTensor:
        acc: dict[tuple[Word, Word, Word], Fraction] = defaultdict(Fraction, dict(self.terms))
        for triple, c in other.terms:
            acc[triple] += c
        return TripleTensor.from_mapping(acc)

    def rotate(self) -> TripleTensor:
        """The cyclic permutation x ⊗ y ⊗ z -> z ⊗ x ⊗ y."""
        return TripleTensor.from_mapping({(z, x, y): c for (x, y, z), c in self.terms})

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return "".join(
            _signed(c, " ⊗ ".join(format_word(w) for w in triple), first=k == 0)
            for k, (triple, c) in enumerate(self.terms)
        )


@dataclass
class AtomRegistry:
    """Atoms standing for inverses of registered defining expressions."""

    definitions: dict[str, NCExpr] = field(default_factory=dict)

    def register(self, name: str, definition: NCExpr) -> NCExpr:
        """Register name = definition^-1 and return the atom as an expression."""
        if not IDENTIFIER.match(name):
            raise ValueError(f"invalid atom name {name!r}")
        known = self.definitions.get(name)
        if known is not None and known != definition:
            raise ValueError(f"atom {name} already registered for {format_expr(known)}")
        self.definitions[name] = definition
        return NCExpr.gen(name)

    def is_atom(self, name: str) -> bool:
        return name in self.definitions

    def definition(self, name: str) -> NCExpr:
        try:
            return self.definitions[name]
        except KeyError:
            raise UnregisteredInverse(name) from None

    def atom_for(self, expr: NCExpr) -> str | None:
        for name, definition in self.definitions.items():
            if definition == expr:
                return name
        return None

    def compress(self, expr: NCExpr) -> NCExpr:
        """Replace a registered defining sum by the letter atom^-1."""
        atom = self.atom_for(expr)
        return expr if atom is None else NCExpr.gen(atom, -1)

    def base_generators(self, *exprs: NCExpr) -> list[str]:
        """Sorted base generator names, looking through atom definitions."""
        seen: set[str] = set()
        stack = [g for e in exprs for g in e.generators()]
        while stack:
            name = stack.pop()
            if name in seen:
                continue
            seen.add(name)
            if self.is_atom(name):
                stack.extend(self.definitions[name].generators())
        return sorted(name for name in seen if not self.is_atom(name))


def _signed(c: Fraction, body: str, first: bool) -> str:
    sign = "-" if c < 0 else "+"
    magnitude = abs(c)
    text = body if magnitude == 1 else (str(magnitude) if body == "1" else f"{magnitude}*{body}")
    if first:
        return f"-{text}" if sign == "-" else text
    return f" {sign} {text}"


def format_expr(e: NCExpr) -> str:
    """Deterministic text form of an expression."""
    if e.is_zero():
        return "0"
    return "".join(_signed(c, format_word(w), first=k == 0) for k, (w, c) in enumerate(e.terms))


def parse_expr(text: str) -> NCExpr:
    """Parse the text form, e.g. `1/2*b1*a1 - a1^-1*F1 + 3`."""
    source = text.replace(" ", "")
    if not source:
        raise ValueError("empty expression")
    if source == "0":
        return NCExpr.zero()
    # a sign starts a new term unless it belongs to a power such as ^-1
    pieces = [p for p in re.split(r"(?<!\^)(?=[+-])", source) if p]
    total = NCExpr.zero()
    for piece in pieces:
        sign = -1 if piece.startswith("-") else 1
        body = piece[1:] if piece[0] in "+-" else piece
        if not body:
            raise ValueError(f"malformed expression {text!r}")
        coefficient = Fraction(sign)
        syllables: list[Syllable] = []
        for factor in body.split("*"):
            if COEFFICIENT.match(factor):
                coefficient *= Fraction(factor)
                continue
            match = FACTOR.match(factor)
            if match is None:
                raise ValueError(f"invalid token {factor!r} in {text!r}")
            syllables.append((match["name"], int(match["power"] or 1)))
        total = total + NCExpr.word(tuple(syllables), coefficient)
    return total
