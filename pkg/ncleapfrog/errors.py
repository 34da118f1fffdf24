"""
Exception hierarchy for the non-commutative leapfrog toolkit.

Every failure raised by the library derives from NCLeapfrogError so the CLI can map
mid-run degeneracies to a single exit code.
"""

from __future__ import annotations


class NCLeapfrogError(Exception):
    """Base class for all library errors."""


class NotInvertible(NCLeapfrogError):
    """A ring element has no inverse (exact rank deficiency or poor conditioning)."""

    def __init__(self, message: str = "ring element is not invertible", rcond: float | None = None):
        self.rcond = rcond
        if rcond is not None:
            message = f"{message} (reciprocal condition {rcond:.3e})"
        super().__init__(message)


class BackendMismatch(NCLeapfrogError):
    """Operands of a binary operation live in different backends or dimensions."""


class QuasiDeterminantError(NCLeapfrogError):
    """Base class for quasi-determinant engine failures."""


class SingularSubmatrix(QuasiDeterminantError):
    """The submatrix A^{i,j} needed for the quasi-determinant |A|_{ij} has no inverse."""

    def __init__(self, position: tuple[int, int], detail: str = ""):
        self.position = position
        message = f"submatrix for quasi-determinant at {position} is singular"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)


class SingularMatrix(QuasiDeterminantError):
    """The block-flattened matrix is rank deficient."""


class NoInvertiblePivot(QuasiDeterminantError):
    """Elimination found no invertible pivot in a column although the matrix is invertible."""

    def __init__(self, column: int):
        self.column = column
        super().__init__(f"no invertible pivot in column {column}")


class InconsistentSystem(QuasiDeterminantError):
    """A linear system left a nonzero residual after the fallback solve."""


class DegenerateConfiguration(NCLeapfrogError):
    """Points or coordinates are not in general position."""

    def __init__(self, index=None, reason: str = "degenerate configuration", step: int | None = None):
        self.index = index
        self.reason = reason
        self.step = step
        super().__init__(self._format())

    def _format(self) -> str:
        parts = [self.reason]
        if self.index is not None:
            parts.append(f"index {self.index}")
        if self.step is not None:
            parts.append(f"step {self.step}")
        return ", ".join(parts)

    def at_step(self, step: int) -> DegenerateConfiguration:
        """Record the trajectory step at which the degeneracy surfaced."""
        self.step = step
        self.args = (self._format(),)
        return self


class SingularH(DegenerateConfiguration):
    def __init__(self, index):
        super().__init__(index, "h_i is not invertible")


class SingularF(DegenerateConfiguration):
    def __init__(self, index):
        super().__init__(index, "f_i = b_i + a_i d_i c_i is not invertible")


class SingularToeplitz(DegenerateConfiguration):
    def __init__(self, n: int, k: int):
        self.n = n
        self.k = k
        super().__init__(n, f"Toeplitz quasi-determinant of order {n} at shift {k} is singular")


class MomentOutOfWindow(NCLeapfrogError):
    def __init__(self, index: int, window: tuple[int, int]):
        self.index = index
        self.window = window
        super().__init__(f"moment m_{index} outside window [{window[0]}, {window[1]}]")


class UnregisteredInverse(NCLeapfrogError):
    """Inverse of a composite expression requested without a registered atom."""

    def __init__(self, atom: str):
        self.atom = atom
        super().__init__(f"no registered inverse atom for {atom}")
