"""
Concrete models of the skew field: exact rational d x d matrices, float d x d matrices and
commutative rational scalars.

Identities that hold in the free skew field are tested by evaluating both sides at random
generic matrices, so everything downstream only needs this small ring interface.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from ncleapfrog._compat import StrEnum
from fractions import Fraction

import numpy as np

from ncleapfrog.errors import BackendMismatch, NotInvertible

logger = logging.getLogger(__name__)

# Float backend refuses to invert below this reciprocal condition number
FLOAT_RCOND_THRESHOLD = 1e-10

# Sampler draws numerators in [-9, 9] and denominators in [1, 4]
SAMPLE_NUMERATOR_BOUND = 9
SAMPLE_DENOMINATOR_BOUND = 4
MAX_SAMPLE_ATTEMPTS = 100


class Backend(StrEnum):
    RATIONAL = "rational"
    FLOAT = "float"
    SCALAR = "scalar"

    @property
    def exact(self) -> bool:
        return self is not Backend.FLOAT


Number = int | Fraction | float


def _to_entry(value, backend: Backend):
    # floats enter the exact backends as their exact binary value
    if backend is Backend.FLOAT:
        return float(value)
    return Fraction(value)


def _freeze(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


@dataclass(frozen=True)
class CentralScalar:
    """A number commuting with every ring element, promoted to c * one on demand."""

    value: Number

    def promote(self, backend: Backend, d: int) -> RingValue:
        return RingValue.identity(d, backend) * self.value


@dataclass(frozen=True, eq=False)
class RingValue:
    """An element of one backend model of the skew field.

    The payload is always a square array: object dtype holding Fractions for the exact
    backends (the scalar backend uses 1 x 1 payloads), float64 for the float backend.
    """

    backend: Backend
    payload: np.ndarray

    def __post_init__(self):
        payload = self.payload
        if payload.ndim != 2 or payload.shape[0] != payload.shape[1]:
            raise ValueError(f"RingValue payload must be square, got shape {payload.shape}")
        if self.backend is Backend.SCALAR and payload.shape != (1, 1):
            raise ValueError(f"scalar backend needs a 1 x 1 payload, got {payload.shape}")
        if payload.flags.writeable:
            object.__setattr__(self, "payload", _freeze(payload.copy()))

    # -- constructors ---------------------------------------------------------------------

    @classmethod
    def from_rows(cls, rows, backend: Backend | str = Backend.RATIONAL) -> RingValue:
        backend = Backend(backend)
        dtype = float if backend is Backend.FLOAT else object
        array = np.array([[_to_entry(x, backend) for x in row] for row in rows], dtype=dtype)
        return cls(backend, array)

    @classmethod
    def scalar(cls, value: Number) -> RingValue:
        return cls.from_rows([[value]], Backend.SCALAR)

    @classmethod
    def identity(cls, d: int, backend: Backend | str = Backend.RATIONAL) -> RingValue:
        backend = Backend(backend)
        return cls.from_rows([[int(r == c) for c in range(d)] for r in range(d)], backend)

    @classmethod
    def zeros(cls, d: int, backend: Backend | str = Backend.RATIONAL) -> RingValue:
        backend = Backend(backend)
        return cls.from_rows([[0] * d for _ in range(d)], backend)

    # -- structure ------------------------------------------------------------------------

    @property
    def d(self) -> int:
        return self.payload.shape[0]

    def one(self) -> RingValue:
        return RingValue.identity(self.d, self.backend)

    def zero(self) -> RingValue:
        return RingValue.zeros(self.d, self.backend)

    def is_zero(self) -> bool:
        return bool(np.all(self.payload == 0))

    def norm(self) -> float:
        """Largest absolute entry, as a float."""
        return max(abs(float(x)) for x in self.payload.flat)

    def trace(self):
        return sum(self.payload[i, i] for i in range(self.d))

    def to_scalar(self):
        if self.d != 1:
            raise ValueError(f"to_scalar needs a 1 x 1 value, got d={self.d}")
        return self.payload[0, 0]

    def is_close(self, other: RingValue, tol: float = 1e-12) -> bool:
        """Entrywise comparison relative to the larger norm; exact backends compare exactly."""
        other = self._coerce(other)
        if self.backend.exact:
            return self == other
        scale = max(1.0, self.norm(), other.norm())
        return (self - other).norm() <= tol * scale

    def kron(self, other: RingValue) -> RingValue:
        """Kronecker product, the matrix model of the tensor self ⊗ other."""
        if other.backend is not self.backend:
            raise BackendMismatch(f"cannot tensor {self.backend.value} with {other.backend.value}")
        d, e = self.d, other.d
        outer = np.multiply.outer(self.payload, other.payload).transpose(0, 2, 1, 3).reshape(d * e, d * e)
        return RingValue(self.backend, outer)

    # -- arithmetic -----------------------------------------------------------------------

    def _coerce(self, other) -> RingValue:
        if isinstance(other, RingValue):
            check_same_backend(self, other)
            return other
        if isinstance(other, CentralScalar):
            return other.promote(self.backend, self.d)
        if isinstance(other, int | Fraction | float):
            return RingValue.identity(self.d, self.backend) * other
        return NotImplemented

    def __add__(self, other) -> RingValue:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return RingValue(self.backend, self.payload + other.payload)

    __radd__ = __add__

    def __sub__(self, other) -> RingValue:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return RingValue(self.backend, self.payload - other.payload)

    def __rsub__(self, other) -> RingValue:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return RingValue(self.backend, other.payload - self.payload)

    def __neg__(self) -> RingValue:
        return RingValue(self.backend, -self.payload)

    def __mul__(self, other) -> RingValue:
        if isinstance(other, int | Fraction | float):
            return RingValue(self.backend, self.payload * _to_entry(other, self.backend))
        if isinstance(other, CentralScalar):
            return self * other.value
        if isinstance(other, RingValue):
            check_same_backend(self, other)
            return RingValue(self.backend, self.payload @ other.payload)
        return NotImplemented

    def __rmul__(self, other) -> RingValue:
        if isinstance(other, int | Fraction | float | CentralScalar):
            return self * other
        return NotImplemented

    def __pow__(self, n: int) -> RingValue:
        if n < 0:
            return ring_inv(self) ** -n
        result, base = self.one(), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def inv(self) -> RingValue:
        return ring_inv(self)

    def star(self) -> RingValue:
        return ring_star(self)

    # -- comparison -----------------------------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, RingValue):
            return NotImplemented
        return (
            self.backend is other.backend
            and self.payload.shape == other.payload.shape
            and bool(np.all(self.payload == other.payload))
        )

    def __hash__(self) -> int:
        return hash((self.backend, self.payload.shape, tuple(self.payload.flat)))

    def __repr__(self) -> str:
        if self.backend is Backend.SCALAR:
            return f"RingValue(scalar {self.payload[0, 0]})"
        rows = "; ".join(", ".join(str(x) for x in row) for row in self.payload)
        return f"RingValue({self.backend.value} [{rows}])"


def check_same_backend(*values: RingValue) -> None:
    """Raise BackendMismatch unless all values share one backend and one dimension."""
    first = values[0]
    for value in values[1:]:
        if value.backend is not first.backend or value.d != first.d:
            raise BackendMismatch(
                f"cannot combine {first.backend.value}(d={first.d}) with {value.backend.value}(d={value.d})"
            )


def backend_of(*values: RingValue) -> Backend:
    """The common backend of `values`; BackendMismatch if they disagree."""
    check_same_backend(*values)
    return values[0].backend


def _exact_inverse(x: np.ndarray) -> np.ndarray | None:
    """Gauss-Jordan elimination over Fractions; None when the matrix is singular."""
    n = x.shape[0]
    x = x.copy()
    y = np.array([[Fraction(int(r == c)) for c in range(n)] for r in range(n)], dtype=object)

    for i in range(n):
        # first nonzero pivot from (i, i) downwards
        for j in range(i, n):
            if x[j, i] != 0:
                if i != j:
                    x[[i, j]] = x[[j, i]]
                    y[[i, j]] = y[[j, i]]
                break
        else:
            return None

        pivot = x[i, i]
        y[i, :] = y[i, :] / pivot
        x[i, :] = x[i, :] / pivot

        for j in range(n):
            if j != i and x[j, i] != 0:
                factor = x[j, i]
                y[j, :] = y[j, :] - factor * y[i, :]
                x[j, :] = x[j, :] - factor * x[i, :]

    return y


def ring_inv(a: RingValue) -> RingValue:
    """Two-sided inverse; raises NotInvertible."""
    if a.backend.exact:
        inverse = _exact_inverse(a.payload)
        if inverse is None:
            raise NotInvertible("rank-deficient exact matrix")
        return RingValue(a.backend, inverse)

    try:
        with np.errstate(divide="ignore", invalid="ignore"):
            cond = np.linalg.cond(a.payload, 1)
    except np.linalg.LinAlgError:
        cond = np.inf
    rcond = 0.0 if not np.isfinite(cond) or cond == 0 else 1.0 / cond
    if rcond <= FLOAT_RCOND_THRESHOLD:
        raise NotInvertible("ill-conditioned float matrix", rcond=rcond)
    return RingValue(a.backend, np.linalg.inv(a.payload))


def is_unit(a: RingValue) -> bool:
    try:
        ring_inv(a)
    except NotInvertible:
        return False
    return True


def ring_star(a: RingValue) -> RingValue:
    """Involution: transpose on matrix backends, identity on commutative scalars."""
    if a.backend is Backend.SCALAR:
        return a
    return RingValue(a.backend, a.payload.T.copy())


def as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_generic(
    seed: int | np.random.Generator,
    d: int = 2,
    backend: Backend | str = Backend.RATIONAL,
    invertible: bool = True,
) -> RingValue:
    """Draw a reproducible generic ring element with small rational entries.

    Args:
        seed: integer seed or a caller-owned numpy Generator
        d: matrix dimension (must be 1 on the scalar backend)
        backend: target backend
        invertible: resample until the value is invertible

    Returns:
        RingValue drawn deterministically from the seed
    """
    backend = Backend(backend)
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if backend is Backend.SCALAR and d != 1:
        raise ValueError(f"scalar backend is commutative and needs d=1, got d={d}")

    rng = as_generator(seed)
    for _ in range(MAX_SAMPLE_ATTEMPTS):
        numerators = rng.integers(-SAMPLE_NUMERATOR_BOUND, SAMPLE_NUMERATOR_BOUND + 1, size=(d, d))
        denominators = rng.integers(1, SAMPLE_DENOMINATOR_BOUND + 1, size=(d, d))
        rows = [
            [Fraction(int(n), int(q)) for n, q in zip(nrow, qrow, strict=True)]
            for nrow, qrow in zip(numerators, denominators, strict=True)
        ]
        value = RingValue.from_rows(rows, backend)
        if not invertible or is_unit(value):
            return value
    raise NotInvertible(f"no invertible sample after {MAX_SAMPLE_ATTEMPTS} attempts")


def random_assignment(
    seed: int | np.random.Generator,
    names: Iterable[str],
    d: int = 3,
    backend: Backend | str = Backend.RATIONAL,
) -> dict[str, RingValue]:
    """Independent invertible generic values for each name, in the given order."""
    rng = as_generator(seed)
    return {name: random_generic(rng, d, backend) for name in names}


def residual_norm(values: Iterable[RingValue] | Mapping[object, RingValue] | RingValue) -> float:
    """Largest norm over a collection of residuals (0.0 when empty)."""
    if isinstance(values, RingValue):
        return values.norm()
    if isinstance(values, Mapping):
        values = values.values()
    norms = [v.norm() for v in values]
    return max(norms, default=0.0)
