"""
Quasi-Plücker coordinates and non-commutative cross-ratios on the projective line over a ring.

Points are kept as explicit lifts (x1, x2) so that the conjugation by scalings in the relative
invariance law can be tracked.
"""

from __future__ import annotations

import itertools
from collections.abc import Sequence
from dataclasses import dataclass

from ncleapfrog.algebra import RingValue, ring_inv
from ncleapfrog.errors import DegenerateConfiguration, NotInvertible, QuasiDeterminantError, SingularSubmatrix
from ncleapfrog.quasidet import QMatrix, is_invertible, quasi_det


@dataclass(frozen=True)
class PointP1:
    """A lift (x1, x2) of a point of P^1 over the ring."""

    x1: RingValue
    x2: RingValue

    @classmethod
    def affine(cls, v: RingValue) -> PointP1:
        """Lift of the affine coordinate v as (v, one)."""
        return cls(v, v.one())

    def scaled(self, lam: RingValue) -> PointP1:
        return PointP1(self.x1 * lam, self.x2 * lam)

    def transformed(self, g: QMatrix) -> PointP1:
        return PointP1(g[0, 0] * self.x1 + g[0, 1] * self.x2, g[1, 0] * self.x1 + g[1, 1] * self.x2)

    def __add__(self, other: PointP1) -> PointP1:
        return PointP1(self.x1 + other.x1, self.x2 + other.x2)

    def __sub__(self, other: PointP1) -> PointP1:
        return PointP1(self.x1 - other.x1, self.x2 - other.x2)

    def __mul__(self, lam: RingValue) -> PointP1:
        return self.scaled(lam)

    def is_zero(self) -> bool:
        return self.x1.is_zero() and self.x2.is_zero()

    def norm(self) -> float:
        return max(self.x1.norm(), self.x2.norm())


def coord_matrix(points: Sequence[PointP1]) -> QMatrix:
    """2 x n coordinate matrix whose columns are the point lifts."""
    return QMatrix.from_rows([[p.x1 for p in points], [p.x2 for p in points]])


def _uses_bottom_box(A: QMatrix, i: int) -> bool:
    try:
        ring_inv(A[1, i])
    except NotInvertible:
        return True
    return False


def qpluecker(A: QMatrix, i: int, j: int, k: int) -> RingValue:
    """Quasi-Plücker coordinate q^i_{jk}(A): the right coefficient of column j in column k modulo column i.

    Args:
        A: 2 x n coordinate matrix
        i, j, k: column indices, i != j

    Returns:
        |a_i a_j|^-1 |a_i a_k| with matching boxes
    """
    if i == j:
        raise ValueError(f"qpluecker needs i != j, got i=j={i}")
    if A.rows != 2:
        raise ValueError(f"coordinate matrix must have 2 rows, got {A.rows}")
    row = 1 if _uses_bottom_box(A, i) else 0
    try:
        left = quasi_det(A.select([0, 1], [j, i]), row, 0)
        right = quasi_det(A.select([0, 1], [k, i]), row, 0)
    except QuasiDeterminantError as exc:
        raise SingularSubmatrix((row, j), f"column {i} cannot be eliminated") from exc
    try:
        return ring_inv(left) * right
    except NotInvertible as exc:
        raise SingularSubmatrix((row, j), f"columns {i} and {j} are dependent") from exc


def qpluecker_alt(A: QMatrix, i: int, j: int, k: int) -> RingValue:
    """Single quasi-determinant form -|a_i a_k a_j ; 0 [0] 1| of q^i_{jk}."""
    one, zero = A.sample.one(), A.sample.zero()
    M = QMatrix.from_rows(
        [
            [A[0, i], A[0, k], A[0, j]],
            [A[1, i], A[1, k], A[1, j]],
            [zero, zero, one],
        ]
    )
    return -quasi_det(M, 2, 1)


def boxed_pair(u: PointP1, w: PointP1) -> RingValue:
    """|u w| boxed at the bottom entry of w."""
    return quasi_det(coord_matrix([u, w]), 1, 1)


def check_general_position(points: Sequence[PointP1], names: Sequence[str] | None = None) -> None:
    """Raise DegenerateConfiguration if two of the points coincide in P^1."""
    names = names or [str(n) for n in range(len(points))]
    for (a, p), (b, q) in itertools.combinations(zip(names, points, strict=True), 2):
        if not is_invertible(coord_matrix([p, q])):
            raise DegenerateConfiguration((a, b), "coincident points")


def cross_ratio(x: PointP1, y: PointP1, z: PointP1, t: PointP1) -> RingValue:
    """Non-commutative cross-ratio kappa(x, y, z, t) = q^y_{zt} q^x_{tz}."""
    check_general_position([x, y, z, t], ["x", "y", "z", "t"])
    A = coord_matrix([x, y, z, t])
    try:
        return qpluecker(A, 1, 2, 3) * qpluecker(A, 0, 3, 2)
    except SingularSubmatrix as exc:
        raise DegenerateConfiguration(exc.position, "cross-ratio undefined") from exc


def verify_relative_invariance(
    points: Sequence[PointP1],
    g: QMatrix,
    lambdas: Sequence[RingValue],
) -> RingValue:
    """kappa(g x l1, g y l2, g z l3, g t l4) - l3^-1 kappa(x, y, z, t) l3; zero for valid input."""
    if len(points) != 4 or len(lambdas) != 4:
        raise ValueError("relative invariance needs four points and four scalings")
    moved = [p.transformed(g).scaled(lam) for p, lam in zip(points, lambdas, strict=True)]
    lam3 = lambdas[2]
    return cross_ratio(*moved) - ring_inv(lam3) * cross_ratio(*points) * lam3


def verify_cr_identities(points: Sequence[PointP1], w: PointP1) -> dict[str, RingValue]:
    """Residuals of the chain, complement and permutation identities of the cross-ratio.

    Returns:
        dict with keys chain, complement, permutation_x, permutation_y
    """
    x, y, z, t = points
    kappa = cross_ratio(x, y, z, t)
    A = coord_matrix([x, y, z, t])
    swapped = cross_ratio(y, x, t, z)
    return {
        "chain": kappa - cross_ratio(w, y, z, t) * cross_ratio(x, w, z, t),
        "complement": kappa - (1 - cross_ratio(t, y, z, x)),
        "permutation_x": qpluecker(A, 0, 3, 2) * kappa * qpluecker(A, 0, 2, 3) - swapped,
        "permutation_y": qpluecker(A, 1, 3, 2) * kappa * qpluecker(A, 1, 2, 3) - swapped,
    }


def verify_skew_pluecker(A: QMatrix, indices: tuple[int, int, int, int] = (0, 1, 2, 3)) -> tuple[RingValue, RingValue]:
    """Residuals of q^k_{ij} q^i_{jk} q^j_{ki} = -1 and q^k_{ij} q^l_{ji} + q^k_{il} q^j_{li} = 1."""
    i, j, k, l = indices  # noqa: E741
    if len(set(indices)) != 4:
        raise ValueError(f"indices must be distinct, got {indices}")
    check_general_position([PointP1(A[0, c], A[1, c]) for c in indices], [str(c) for c in indices])
    skew = qpluecker(A, k, i, j) * qpluecker(A, i, j, k) * qpluecker(A, j, k, i) + 1
    pluecker = qpluecker(A, k, i, j) * qpluecker(A, l, j, i) + qpluecker(A, k, i, l) * qpluecker(A, j, l, i) - 1
    return skew, pluecker


def verify_scaling_law(A: QMatrix, lambdas: Sequence[RingValue], i: int, j: int, k: int) -> RingValue:
    """q^i_{jk}(A diag(lambda)) - lambda_j^-1 q^i_{jk}(A) lambda_k."""
    scaled = QMatrix.from_rows([[x * lam for x, lam in zip(row, lambdas, strict=True)] for row in A.entries])
    return qpluecker(scaled, i, j, k) - ring_inv(lambdas[j]) * qpluecker(A, i, j, k) * lambdas[k]


def verify_gl2_invariance(A: QMatrix, g: QMatrix, i: int, j: int, k: int) -> RingValue:
    """q^i_{jk}(g A) - q^i_{jk}(A)."""
    return qpluecker(g @ A, i, j, k) - qpluecker(A, i, j, k)
