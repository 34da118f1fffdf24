"""
Non-commutative Laurent bi-orthogonal polynomials built from a window of formal moments.

The pairing is <sum a_i z^i, sum b_j z^j>_k = sum a_i m_{i-j+k} b_j*. The second family is stored in
starred form (Q_n)* with coefficients at powers -n..0, so the orthogonality check never has to undo the
involution. Adjacent shifts k are related by Christoffel and Geronimus transformations whose
compatibility is the discrete relativistic Toda lattice; its (a, b) form is the leapfrog map.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from ncleapfrog._compat import StrEnum

import numpy as np

from ncleapfrog.algebra import Backend, RingValue, as_generator, random_generic, ring_inv
from ncleapfrog.errors import MomentOutOfWindow, NotInvertible, QuasiDeterminantError, SingularToeplitz
from ncleapfrog.leapfrog import Lattice, leap_a, leap_b
from ncleapfrog.quasidet import QMatrix, nc_solve, nc_solve_left, quasi_det

logger = logging.getLogger(__name__)

# Coefficients are cross-checked against single quasi-determinants up to this degree
DIRECT_CHECK_MAX_DEGREE = 3


class Flow(StrEnum):
    NONE = "none"
    NEGATIVE = "negative"
    POSITIVE = "positive"


@dataclass(frozen=True)
class MomentWindow:
    """Moments m_k for k in [k_min, k_max], optionally tagged with a flow time."""

    moments: tuple[RingValue, ...]
    k_min: int
    t: float | None = None
    flow: Flow = Flow.NONE

    @classmethod
    def from_mapping(cls, moments: Mapping[int, RingValue], t: float | None = None, flow: Flow = Flow.NONE):
        keys = sorted(moments)
        if keys != list(range(keys[0], keys[-1] + 1)):
            raise ValueError(f"moment indices must be contiguous, got {keys}")
        return cls(tuple(moments[k] for k in keys), keys[0], t, Flow(flow))

    @property
    def k_max(self) -> int:
        return self.k_min + len(self.moments) - 1

    @property
    def sample(self) -> RingValue:
        return self.moments[0]

    def __getitem__(self, k: int) -> RingValue:
        if not self.k_min <= k <= self.k_max:
            raise MomentOutOfWindow(k, (self.k_min, self.k_max))
        return self.moments[k - self.k_min]

    def toeplitz(self, k: int, n: int) -> QMatrix:
        """(n+1) x (n+1) shifted Toeplitz matrix with entries m_{k+r-c}."""
        return QMatrix.from_rows([[self[k + r - c] for c in range(n + 1)] for r in range(n + 1)])


@dataclass(frozen=True)
class LaurentPoly:
    """Finite Laurent polynomial with ring coefficients written to the right of z^power."""

    coeffs: tuple[tuple[int, RingValue], ...]

    @classmethod
    def from_dict(cls, mapping: Mapping[int, RingValue]) -> LaurentPoly:
        if not mapping:
            raise ValueError("LaurentPoly needs at least one coefficient")
        return cls(tuple(sorted(mapping.items(), key=lambda item: item[0])))

    @classmethod
    def monomial(cls, power: int, value: RingValue) -> LaurentPoly:
        return cls(((power, value),))

    def as_dict(self) -> dict[int, RingValue]:
        return dict(self.coeffs)

    @property
    def sample(self) -> RingValue:
        return self.coeffs[0][1]

    @property
    def powers(self) -> list[int]:
        return [p for p, _ in self.coeffs]

    def coefficient(self, power: int) -> RingValue:
        return self.as_dict().get(power, self.sample.zero())

    def _combine(self, other: LaurentPoly, sign: int) -> LaurentPoly:
        powers = sorted(set(self.powers) | set(other.powers))
        return LaurentPoly.from_dict({p: self.coefficient(p) + other.coefficient(p) * sign for p in powers})

    def __add__(self, other: LaurentPoly) -> LaurentPoly:
        return self._combine(other, 1)

    def __sub__(self, other: LaurentPoly) -> LaurentPoly:
        return self._combine(other, -1)

    def __neg__(self) -> LaurentPoly:
        return LaurentPoly(tuple((p, -c) for p, c in self.coeffs))

    def __mul__(self, value: RingValue) -> LaurentPoly:
        """Right multiplication of every coefficient."""
        return LaurentPoly(tuple((p, c * value) for p, c in self.coeffs))

    def shifted(self, s: int) -> LaurentPoly:
        """z^s times the polynomial."""
        return LaurentPoly(tuple((p + s, c) for p, c in self.coeffs))

    def star(self) -> LaurentPoly:
        """Apply the involution: z^p c -> z^-p c*."""
        return LaurentPoly.from_dict({-p: c.star() for p, c in self.coeffs})

    def is_zero(self) -> bool:
        return all(c.is_zero() for _, c in self.coeffs)

    def norm(self) -> float:
        return max(c.norm() for _, c in self.coeffs)


def pairing(f: LaurentPoly, g_star: LaurentPoly, k: int, M: MomentWindow) -> RingValue:
    """<f, g>_k given the starred second argument: sum a_i m_{k+i+p} c_p over z^p c_p in g*."""
    total = None
    for i, a in f.coeffs:
        for p, c in g_star.coeffs:
            term = a * M[k + i + p] * c
            total = term if total is None else total + term
    return total


def inner_product(f: LaurentPoly, g: LaurentPoly, k: int, M: MomentWindow) -> RingValue:
    """<sum a_i z^i, sum b_j z^j>_k = sum a_i m_{i-j+k} b_j*."""
    return pairing(f, g.star(), k, M)


@dataclass(frozen=True)
class BiorthoSystem:
    """Families P_n, (Q_n)* at shift k with their Toeplitz quasi-determinants and Toda variables.

    H_n = |T_n^{(k)}|_{n,n} and G_n = |T_n^{(k)}|_{0,n}; psi_n = H_n^-1 H_n^{(k-1)},
    phi_n = G_n^-1 G_n^{(k-1)}, phi_prev_n = phi_n^{(k-1)} and xi_n = psi_n - phi_prev_n.
    """

    k: int
    n_max: int
    moments: MomentWindow = field(repr=False)
    P: tuple[LaurentPoly, ...]
    Q_star: tuple[LaurentPoly, ...]
    H: tuple[RingValue, ...]
    G: tuple[RingValue, ...]
    psi: tuple[RingValue, ...]
    phi: tuple[RingValue, ...]
    phi_prev: tuple[RingValue, ...]
    xi: tuple[RingValue, ...]

    @property
    def zeta(self) -> tuple[RingValue, ...]:
        """zeta_n = (psi_n - xi_{n-1}) xi_n, with xi_{-1} = 0."""
        out = []
        for n in range(self.n_max + 1):
            shifted = self.psi[n] - self.xi[n - 1] if n else self.psi[n]
            out.append(shifted * self.xi[n])
        return tuple(out)

    @property
    def eta(self) -> tuple[RingValue, ...]:
        """eta_n = -xi_{n-1} psi_n^-1 for n >= 1; eta_0 = 0."""
        zero = self.psi[0].zero()
        return (zero,) + tuple(-(self.xi[n - 1] * ring_inv(self.psi[n])) for n in range(1, self.n_max + 1))


def _toeplitz_pair(M: MomentWindow, k: int, n: int) -> tuple[RingValue, RingValue]:
    """(H, G) = (|T|_{n,n}, |T|_{0,n}) for T = T_n^{(k)}, both checked invertible."""
    T = M.toeplitz(k, n)
    try:
        H, G = quasi_det(T, n, n), quasi_det(T, 0, n)
        ring_inv(H)
        ring_inv(G)
    except (QuasiDeterminantError, NotInvertible) as exc:
        raise SingularToeplitz(n, k) from exc
    return H, G


def _ratio(top: RingValue, bottom: RingValue) -> RingValue:
    return ring_inv(top) * bottom


def _q_star(M: MomentWindow, k: int, n: int) -> LaurentPoly:
    """(Q_n)* = sum_c s_c z^-c with s_n = one and sum_c m_{k+r-c} s_c = 0 for r < n."""
    one = M.sample.one()
    if n == 0:
        return LaurentPoly.monomial(0, one)
    try:
        s = nc_solve(M.toeplitz(k, n - 1), [-M[k + r - n] for r in range(n)])
    except QuasiDeterminantError as exc:
        raise SingularToeplitz(n - 1, k) from exc
    return LaurentPoly.from_dict({-c: value for c, value in enumerate([*s, one])})


def _p_monic(M: MomentWindow, k: int, n: int) -> LaurentPoly:
    """P_n = z^n + sum_{i<n} x_i z^i with sum_i x_i m_{k+i-l} = -m_{k+n-l} for l < n."""
    one = M.sample.one()
    if n == 0:
        return LaurentPoly.monomial(0, one)
    try:
        x = nc_solve_left(M.toeplitz(k, n - 1), [-M[k + n - l] for l in range(n)])  # noqa: E741
    except QuasiDeterminantError as exc:
        raise SingularToeplitz(n - 1, k) from exc
    return LaurentPoly.from_dict(dict(enumerate([*x, one])))


def build_family(M: MomentWindow, k: int, n_max: int) -> BiorthoSystem:
    """Bi-orthogonal families at shift k up to degree n_max.

    Needs the moments m_{k-2-n_max}, ..., m_{k+n_max}.

    Raises:
        SingularToeplitz: some Toeplitz quasi-determinant up to n_max is singular
        MomentOutOfWindow: the window is too small
    """
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    P, Q, H, G, psi, phi, phi_prev, xi = [], [], [], [], [], [], [], []
    for n in range(n_max + 1):
        h_k, g_k = _toeplitz_pair(M, k, n)
        h_prev, g_prev = _toeplitz_pair(M, k - 1, n)
        _, g_prev2 = _toeplitz_pair(M, k - 2, n)
        H.append(h_k)
        G.append(g_k)
        psi.append(_ratio(h_k, h_prev))
        phi.append(_ratio(g_k, g_prev))
        phi_prev.append(_ratio(g_prev, g_prev2))
        xi.append(psi[-1] - phi_prev[-1])
        P.append(_p_monic(M, k, n))
        Q.append(_q_star(M, k, n))
    logger.debug("built bi-orthogonal family at shift %d up to degree %d", k, n_max)
    return BiorthoSystem(
        k=k,
        n_max=n_max,
        moments=M,
        P=tuple(P),
        Q_star=tuple(Q),
        H=tuple(H),
        G=tuple(G),
        psi=tuple(psi),
        phi=tuple(phi),
        phi_prev=tuple(phi_prev),
        xi=tuple(xi),
    )


def build_ladder(M: MomentWindow, shifts: Iterable[int], n_max: int) -> dict[int, BiorthoSystem]:
    return {k: build_family(M, k, n_max) for k in shifts}


def direct_coefficient_residuals(system: BiorthoSystem) -> dict[tuple[str, int, int], RingValue]:
    """Solved coefficients minus single quasi-determinant expressions, for degrees up to 3.

    The coefficient of z^-c in (Q_n)* is |T_n with row n replaced by e_c|_{n,n}; the coefficient of
    z^i in P_n is |T_n with column n replaced by e_i|_{n,n}.
    """
    M, k = system.moments, system.k
    one, zero = M.sample.one(), M.sample.zero()
    residuals = {}
    for n in range(1, min(system.n_max, DIRECT_CHECK_MAX_DEGREE) + 1):
        T = M.toeplitz(k, n)
        for c in range(n + 1):
            unit = [one if j == c else zero for j in range(n + 1)]
            residuals[("Q", n, c)] = system.Q_star[n].coefficient(-c) - quasi_det(T.replace_row(n, unit), n, n)
            residuals[("P", n, c)] = system.P[n].coefficient(c) - quasi_det(T.replace_col(n, unit), n, n)
    return residuals


def orthogonality_table(system: BiorthoSystem) -> list[list[RingValue]]:
    """<P_n, Q_m>_k for n, m <= n_max; equals H_n on the diagonal and zero elsewhere."""
    size = system.n_max + 1
    return [
        [pairing(system.P[n], system.Q_star[m], system.k, system.moments) for m in range(size)] for n in range(size)
    ]


def orthogonality_residuals(system: BiorthoSystem) -> dict[tuple[int, int], RingValue]:
    table = orthogonality_table(system)
    return {
        (n, m): value - (system.H[n] if n == m else value.zero())
        for n, row in enumerate(table)
        for m, value in enumerate(row)
    }


def _check_adjacent(lower: BiorthoSystem, upper: BiorthoSystem) -> None:
    if upper.k != lower.k + 1:
        raise ValueError(f"adjacent shifts expected, got k={lower.k} and k={upper.k}")
    if upper.n_max != lower.n_max:
        raise ValueError(f"systems built to different degrees {lower.n_max} and {upper.n_max}")


def christoffel_residual(sys_k: BiorthoSystem, sys_k_plus_1: BiorthoSystem) -> dict[int, LaurentPoly]:
    """(Q_{n+1}^{(k)})* - z^-1 (Q_n^{(k)})* + (Q_n^{(k+1)})* phi_n^{(k)} for n < n_max."""
    _check_adjacent(sys_k, sys_k_plus_1)
    return {
        n: sys_k.Q_star[n + 1] - sys_k.Q_star[n].shifted(-1) + sys_k_plus_1.Q_star[n] * sys_k.phi[n]
        for n in range(sys_k.n_max)
    }


def geronimus_residual(sys_k_minus_1: BiorthoSystem, sys_k: BiorthoSystem) -> dict[int, LaurentPoly]:
    """z^-1 (Q_n^{(k-1)})* - (Q_{n+1}^{(k)})* - (Q_n^{(k)})* psi_n^{(k)} for n < n_max."""
    _check_adjacent(sys_k_minus_1, sys_k)
    return {
        n: sys_k_minus_1.Q_star[n].shifted(-1) - sys_k.Q_star[n + 1] - sys_k.Q_star[n] * sys_k.psi[n]
        for n in range(sys_k.n_max)
    }


def recurrence_residual(sys_k: BiorthoSystem) -> dict[int, LaurentPoly]:
    """Three-term recurrence z((Q_{n+1})* + (Q_n)* psi_n) - (Q_n)* - (Q_{n-1})* xi_{n-1} at shift k."""
    out = {}
    for n in range(sys_k.n_max):
        residual = (sys_k.Q_star[n + 1] + sys_k.Q_star[n] * sys_k.psi[n]).shifted(1) - sys_k.Q_star[n]
        if n:
            residual = residual - sys_k.Q_star[n - 1] * sys_k.xi[n - 1]
        out[n] = residual
    return out


def discrete_toda_residual(sys_k: BiorthoSystem, sys_k_plus_1: BiorthoSystem) -> dict[str, dict[int, RingValue]]:
    """Residuals of the discrete relativistic Toda lattice.

    first: xi_i^{(k+1)} psi_{i+1}^{(k)} - psi_i^{(k+1)} xi_i^{(k)}
    second: psi_i^{(k)} - phi_i^{(k)} - xi_{i-1}^{(k)}, the last term dropped at i = 0
    """
    _check_adjacent(sys_k, sys_k_plus_1)
    first = {
        i: sys_k_plus_1.xi[i] * sys_k.psi[i + 1] - sys_k_plus_1.psi[i] * sys_k.xi[i] for i in range(sys_k.n_max)
    }
    second = {}
    for i in range(sys_k.n_max + 1):
        value = sys_k.psi[i] - sys_k.phi[i]
        second[i] = value - sys_k.xi[i - 1] if i else value
    return {"first": first, "second": second}


def _bidiagonal(diagonal: Sequence[RingValue], off: Sequence[RingValue] | None, upper: bool) -> QMatrix:
    n = len(diagonal)
    zero, one = diagonal[0].zero(), diagonal[0].one()
    rows = [[zero] * n for _ in range(n)]
    for i in range(n):
        rows[i][i] = diagonal[i]
        if upper and i + 1 < n:
            rows[i][i + 1] = off[i] if off is not None else one
        if not upper and i >= 1:
            rows[i][i - 1] = off[i - 1] if off is not None else one
    return QMatrix.from_rows(rows)


def lax_factors(system: BiorthoSystem) -> tuple[QMatrix, QMatrix]:
    """(A, B): A = identity + superdiagonal xi, B = diag(psi) + subdiagonal ones, size n_max + 1."""
    one = system.psi[0].one()
    A = _bidiagonal([one] * (system.n_max + 1), system.xi, upper=True)
    B = _bidiagonal(list(system.psi), None, upper=False)
    return A, B


def discrete_lax_residual(sys_k: BiorthoSystem, sys_k_minus_1: BiorthoSystem) -> QMatrix:
    """B^{(k)} A^{(k-1)} - A^{(k)} B^{(k-1)} on the top-left block unaffected by truncation."""
    _check_adjacent(sys_k_minus_1, sys_k)
    A_k, B_k = lax_factors(sys_k)
    A_prev, B_prev = lax_factors(sys_k_minus_1)
    residual = B_k @ A_prev - A_k @ B_prev
    block = range(sys_k.n_max)
    return residual.select(block, block)


def leapfrog_correspondence(sys_k: BiorthoSystem, sys_k_minus_1: BiorthoSystem) -> dict[str, dict[int, RingValue]]:
    """The leapfrog update checked on a_i = psi_i^{(k)}, b_i = -xi_i^{(k)} with a⁺ = psi^{(k-1)}, b⁺ = -xi^{(k-1)}.

    a⁺ is checked for 1 <= i <= n_max and b⁺ for 0 <= i < n_max.
    """
    _check_adjacent(sys_k_minus_1, sys_k)
    a = Lattice(tuple(sys_k.psi))
    b = Lattice(tuple(-x for x in sys_k.xi))
    n_max = sys_k.n_max
    return {
        "a": {i: leap_a(a, b, i) - sys_k_minus_1.psi[i] for i in range(1, n_max + 1)},
        "b": {i: leap_b(a, b, i) + sys_k_minus_1.xi[i] for i in range(n_max)},
    }


def random_moments(
    seed: int | np.random.Generator,
    k_range: tuple[int, int],
    d: int = 2,
    backend: Backend | str = Backend.RATIONAL,
) -> MomentWindow:
    """Independent generic moments m_k for k in [k_range[0], k_range[1]]."""
    rng = as_generator(seed)
    lo, hi = k_range
    return MomentWindow.from_mapping({k: random_generic(rng, d, backend) for k in range(lo, hi + 1)})


def geometric_moments(terms: Sequence[tuple[RingValue, RingValue]], k_range: tuple[int, int]) -> MomentWindow:
    """m_k = sum_j U_j V_j^k over the (U_j, V_j) terms.

    A single term gives Toeplitz matrices of rank d, so degree n needs at least n + 1 terms.
    """
    lo, hi = k_range
    moments = {}
    for k in range(lo, hi + 1):
        values = [U * V**k for U, V in terms]
        total = values[0]
        for value in values[1:]:
            total = total + value
        moments[k] = total
    return MomentWindow.from_mapping(moments)


def moment_window_for(k_values: Iterable[int], n_max: int) -> tuple[int, int]:
    """Smallest moment range that supports build_family at every shift in k_values."""
    ks = list(k_values)
    return min(ks) - 2 - n_max, max(ks) + n_max
