"""
Quasi-determinant engine over RingValue matrices.

Provides the QMatrix container, non-commutative Gauss-Jordan inversion, quasi-determinants at
any position, left and right linear solves, and residuals for the Jacobi and homological
identities. Indices are 0-based.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from ncleapfrog.algebra import Backend, RingValue, check_same_backend, is_unit, ring_inv
from ncleapfrog.errors import (
    InconsistentSystem,
    NoInvertiblePivot,
    NotInvertible,
    QuasiDeterminantError,
    SingularMatrix,
    SingularSubmatrix,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QMatrix:
    """Rectangular grid of RingValues sharing one backend and dimension."""

    entries: tuple[tuple[RingValue, ...], ...]

    def __post_init__(self):
        if not self.entries or not self.entries[0]:
            raise ValueError("QMatrix needs at least one row and one column")
        width = len(self.entries[0])
        if any(len(row) != width for row in self.entries):
            raise ValueError("QMatrix rows must have equal length")
        check_same_backend(*(x for row in self.entries for x in row))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[RingValue]]) -> QMatrix:
        return cls(tuple(tuple(row) for row in rows))

    @classmethod
    def identity(cls, n: int, like: RingValue) -> QMatrix:
        one, zero = like.one(), like.zero()
        return cls.from_rows([[one if r == c else zero for c in range(n)] for r in range(n)])

    @classmethod
    def diagonal(cls, values: Sequence[RingValue]) -> QMatrix:
        zero = values[0].zero()
        n = len(values)
        return cls.from_rows([[values[r] if r == c else zero for c in range(n)] for r in range(n)])

    @classmethod
    def column(cls, values: Sequence[RingValue]) -> QMatrix:
        return cls.from_rows([[v] for v in values])

    # -- structure ------------------------------------------------------------------------

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0])

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def sample(self) -> RingValue:
        return self.entries[0][0]

    @property
    def backend(self) -> Backend:
        return self.sample.backend

    def __getitem__(self, index: tuple[int, int]) -> RingValue:
        i, j = index
        return self.entries[i][j]

    def row(self, i: int) -> tuple[RingValue, ...]:
        return self.entries[i]

    def col(self, j: int) -> tuple[RingValue, ...]:
        return tuple(row[j] for row in self.entries)

    def select(self, rows: Sequence[int], cols: Sequence[int]) -> QMatrix:
        return QMatrix.from_rows([[self.entries[i][j] for j in cols] for i in rows])

    def delete(self, row: int, col: int) -> QMatrix:
        """Submatrix without one row and one column."""
        rows = [i for i in range(self.rows) if i != row]
        cols = [j for j in range(self.cols) if j != col]
        return self.select(rows, cols)

    def replace_row(self, i: int, values: Sequence[RingValue]) -> QMatrix:
        entries = list(self.entries)
        entries[i] = tuple(values)
        return QMatrix(tuple(entries))

    def replace_col(self, j: int, values: Sequence[RingValue]) -> QMatrix:
        return QMatrix.from_rows(
            [[values[i] if c == j else x for c, x in enumerate(row)] for i, row in enumerate(self.entries)]
        )

    def flatten(self) -> RingValue:
        """Block-flattened square matrix as a single ring value of dimension rows * d."""
        if self.rows != self.cols:
            raise ValueError(f"flatten needs a square QMatrix, got {self.shape}")
        blocks = [[x.payload for x in row] for row in self.entries]
        backend = Backend.RATIONAL if self.backend is Backend.SCALAR and self.rows > 1 else self.backend
        return RingValue(backend, np.block(blocks))

    def is_zero(self) -> bool:
        return all(x.is_zero() for row in self.entries for x in row)

    def norm(self) -> float:
        return max(x.norm() for row in self.entries for x in row)

    # -- arithmetic -----------------------------------------------------------------------

    def __add__(self, other: QMatrix) -> QMatrix:
        self._check_shape(other)
        return QMatrix.from_rows(
            [[x + y for x, y in zip(r1, r2, strict=True)] for r1, r2 in zip(self.entries, other.entries, strict=True)]
        )

    def __sub__(self, other: QMatrix) -> QMatrix:
        self._check_shape(other)
        return QMatrix.from_rows(
            [[x - y for x, y in zip(r1, r2, strict=True)] for r1, r2 in zip(self.entries, other.entries, strict=True)]
        )

    def __neg__(self) -> QMatrix:
        return QMatrix.from_rows([[-x for x in row] for row in self.entries])

    def __matmul__(self, other: QMatrix) -> QMatrix:
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        rows = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = self.entries[i][0] * other.entries[0][j]
                for k in range(1, self.cols):
                    acc = acc + self.entries[i][k] * other.entries[k][j]
                row.append(acc)
            rows.append(row)
        return QMatrix.from_rows(rows)

    def __mul__(self, other) -> QMatrix:
        """Right multiplication of every entry by a ring element or number."""
        if isinstance(other, QMatrix):
            return self @ other
        return QMatrix.from_rows([[x * other for x in row] for row in self.entries])

    def __rmul__(self, other) -> QMatrix:
        return QMatrix.from_rows([[other * x for x in row] for row in self.entries])

    def _check_shape(self, other: QMatrix) -> None:
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")


def is_invertible(A: QMatrix) -> bool:
    """Exact rank test on the block-flattened matrix (condition test on the float backend)."""
    return A.rows == A.cols and is_unit(A.flatten())


def nc_inverse(A: QMatrix) -> QMatrix:
    """Invert a square QMatrix by Gauss-Jordan elimination with left multiplications.

    The pivot is the first invertible candidate in the column, so results are deterministic.

    Raises:
        SingularMatrix: the block-flattened matrix is rank deficient
        NoInvertiblePivot: the matrix is invertible but no column candidate is
    """
    if A.rows != A.cols:
        raise ValueError(f"nc_inverse needs a square QMatrix, got {A.shape}")
    n = A.rows
    left = [list(row) for row in A.entries]
    right = [list(row) for row in QMatrix.identity(n, A.sample).entries]

    for col in range(n):
        pivot_row, pivot_inv = None, None
        for r in range(col, n):
            try:
                pivot_inv = ring_inv(left[r][col])
            except NotInvertible:
                continue
            pivot_row = r
            break
        if pivot_row is None:
            if not is_invertible(A):
                raise SingularMatrix(f"{n}x{n} matrix is singular (no pivot in column {col})")
            raise NoInvertiblePivot(col)

        left[col], left[pivot_row] = left[pivot_row], left[col]
        right[col], right[pivot_row] = right[pivot_row], right[col]
        left[col] = [pivot_inv * x for x in left[col]]
        right[col] = [pivot_inv * x for x in right[col]]

        for r in range(n):
            factor = left[r][col]
            if r == col or factor.is_zero():
                continue
            left[r] = [x - factor * y for x, y in zip(left[r], left[col], strict=True)]
            right[r] = [x - factor * y for x, y in zip(right[r], right[col], strict=True)]

    return QMatrix.from_rows(right)


def quasi_det(A: QMatrix, i: int, j: int) -> RingValue:
    """Quasi-determinant |A|_{ij} = a_ij - r_i^j (A^{ij})^-1 c_j^i.

    Args:
        A: square QMatrix
        i: boxed row (0-based)
        j: boxed column (0-based)

    Returns:
        RingValue; for a 1 x 1 matrix the single entry
    """
    if A.rows != A.cols:
        raise ValueError(f"quasi_det needs a square QMatrix, got {A.shape}")
    if A.rows == 1:
        return A[0, 0]
    try:
        sub_inv = nc_inverse(A.delete(i, j))
    except QuasiDeterminantError as exc:
        raise SingularSubmatrix((i, j), str(exc)) from exc

    others_r = [r for r in range(A.rows) if r != i]
    others_c = [c for c in range(A.cols) if c != j]
    result = A[i, j]
    for k, c in enumerate(others_c):
        for m, r in enumerate(others_r):
            result = result - A[i, c] * sub_inv[k, m] * A[r, j]
    return result


def _check_residual(residual: Sequence[RingValue], what: str) -> None:
    if all(x.is_close(x.zero(), 1e-9) for x in residual):
        return
    worst = max(x.norm() for x in residual)
    raise InconsistentSystem(f"{what} left residual {worst:.3e}")


def nc_solve(A: QMatrix, xi: Sequence[RingValue]) -> tuple[RingValue, ...]:
    """Solve the column system A x = xi via x_i = sum_j |A|_{ji}^-1 xi_j.

    Falls back to nc_inverse when some |A|_{ji} is undefined or not invertible.
    """
    n = A.rows
    if A.cols != n or len(xi) != n:
        raise ValueError(f"nc_solve needs a square system, got {A.shape} with {len(xi)} right-hand sides")
    try:
        x = []
        for i in range(n):
            acc = ring_inv(quasi_det(A, 0, i)) * xi[0]
            for j in range(1, n):
                acc = acc + ring_inv(quasi_det(A, j, i)) * xi[j]
            x.append(acc)
    except (QuasiDeterminantError, NotInvertible) as first:
        logger.debug("quasi-determinant solve unavailable (%s); falling back to nc_inverse", first)
        try:
            inverse = nc_inverse(A)
        except QuasiDeterminantError as exc:
            if isinstance(first, QuasiDeterminantError):
                raise first from exc
            raise
        x = list((inverse @ QMatrix.column(xi)).col(0))

    _check_residual([lhs - rhs for lhs, rhs in zip((A @ QMatrix.column(x)).col(0), xi, strict=True)], "nc_solve")
    return tuple(x)


def nc_solve_left(A: QMatrix, b: Sequence[RingValue]) -> tuple[RingValue, ...]:
    """Solve the row system x A = b via x_j = sum_i b_i |A|_{ji}^-1, with the same fallback."""
    n = A.rows
    if A.cols != n or len(b) != n:
        raise ValueError(f"nc_solve_left needs a square system, got {A.shape} with {len(b)} entries")
    try:
        x = []
        for j in range(n):
            acc = b[0] * ring_inv(quasi_det(A, j, 0))
            for i in range(1, n):
                acc = acc + b[i] * ring_inv(quasi_det(A, j, i))
            x.append(acc)
    except (QuasiDeterminantError, NotInvertible) as first:
        logger.debug("quasi-determinant left solve unavailable (%s); falling back to nc_inverse", first)
        try:
            inverse = nc_inverse(A)
        except QuasiDeterminantError as exc:
            if isinstance(first, QuasiDeterminantError):
                raise first from exc
            raise
        x = list((QMatrix.from_rows([list(b)]) @ inverse).row(0))

    product = (QMatrix.from_rows([x]) @ A).row(0)
    _check_residual([lhs - rhs for lhs, rhs in zip(product, b, strict=True)], "nc_solve_left")
    return tuple(x)


def _shift(index: int, dropped: int) -> int:
    return index - 1 if index > dropped else index


def _quasi_det_without(M: QMatrix, drop: tuple[int, int], at: tuple[int, int]) -> RingValue:
    """|M without row drop[0] and column drop[1]| boxed at the original position `at`."""
    sub = M.delete(*drop)
    return quasi_det(sub, _shift(at[0], drop[0]), _shift(at[1], drop[1]))


def _default_pairs(M: QMatrix, rows, cols) -> tuple[tuple[int, int], tuple[int, int]]:
    if M.rows != M.cols or M.rows < 2:
        raise ValueError(f"identity residuals need a square matrix of order >= 2, got {M.shape}")
    n = M.rows
    return rows or (n - 2, n - 1), cols or (n - 2, n - 1)


def jacobi_residual(
    M: QMatrix,
    rows: tuple[int, int] | None = None,
    cols: tuple[int, int] | None = None,
) -> RingValue:
    """LHS - RHS of the non-commutative Jacobi identity.

    With rows (p, q) and columns (r, s), the identity reads
    |M|_{qs} = |M^{pr}|_{qs} - |M^{ps}|_{qr} |M^{qs}|_{pr}^-1 |M^{qr}|_{ps},
    where M^{xy} drops row x and column y. Defaults to the last two rows and columns.
    """
    (p, q), (r, s) = _default_pairs(M, rows, cols)
    lhs = quasi_det(M, q, s)
    corner = _quasi_det_without(M, (q, s), (p, r))
    try:
        corner_inv = ring_inv(corner)
    except NotInvertible as exc:
        raise SingularSubmatrix((p, r), "corner quasi-determinant is not invertible") from exc
    rhs = _quasi_det_without(M, (p, r), (q, s)) - (
        _quasi_det_without(M, (p, s), (q, r)) * corner_inv * _quasi_det_without(M, (q, r), (p, s))
    )
    return lhs - rhs


def homological_residuals(
    M: QMatrix,
    rows: tuple[int, int] | None = None,
    cols: tuple[int, int] | None = None,
) -> tuple[RingValue, RingValue]:
    """Residuals of the row and column homological relations.

    Row relation: |M|_{qr} = |M|_{qs} |M'|_{qr}, where M' has row q replaced by the unit row e_s.
    Column relation: |M|_{ps} = |M''|_{ps} |M|_{qs}, where M'' has column s replaced by e_q.
    """
    (p, q), (r, s) = _default_pairs(M, rows, cols)
    one, zero = M.sample.one(), M.sample.zero()

    unit_row = [one if c == s else zero for c in range(M.cols)]
    row_residual = quasi_det(M, q, r) - quasi_det(M, q, s) * quasi_det(M.replace_row(q, unit_row), q, r)

    unit_col = [one if i == q else zero for i in range(M.rows)]
    col_residual = quasi_det(M, p, s) - quasi_det(M.replace_col(s, unit_col), p, s) * quasi_det(M, q, s)
    return row_residual, col_residual


def row_dependence_check(A: QMatrix, i: int, j: int, tol: float = 1e-10) -> bool:
    """True iff |A|_{ij} vanishes, i.e. row i is a left combination of the other rows."""
    value = quasi_det(A, i, j)
    if A.backend.exact:
        return value.is_zero()
    return value.norm() <= tol * max(1.0, A.norm())
