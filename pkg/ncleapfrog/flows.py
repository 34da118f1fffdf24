"""
Semi-discrete relativistic Toda flows on float moment families.

Moments follow closed forms m_k(t) = U V^k exp(t V^-1) W (negative flow, d/dt m_k = m_{k-1}) or
m_k(t) = U V^k exp(t V) W (positive flow, d/dt m_k = m_{k+1}). Every time derivative is a central
difference, so residuals shrink like h^2.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from ncleapfrog.algebra import Backend, RingValue, as_generator, ring_inv
from ncleapfrog.biortho import (
    BiorthoSystem,
    Flow,
    LaurentPoly,
    MomentWindow,
    build_family,
    lax_factors,
    moment_window_for,
)
from ncleapfrog.quasidet import QMatrix, nc_inverse

logger = logging.getLogger(__name__)

# Shift at which the flow families are built
FLOW_SHIFT = 0

DEFAULT_H_VALUES = (1e-2, 1e-3)

# Eigenvalue range of sampled flow generators
SPECTRUM_LOW = 0.5
SPECTRUM_HIGH = 3.0


def _array(value) -> np.ndarray:
    if isinstance(value, RingValue):
        return np.asarray(value.payload, dtype=float)
    return np.asarray(value, dtype=float)


def flow_moments(
    U,
    V,
    t: float,
    flow: Flow | str,
    window: tuple[int, int],
    W=None,
) -> MomentWindow:
    """Moment window at time t for the negative or positive flow.

    With square U and V and no W every block Toeplitz matrix has rank d, so families beyond degree 0
    need a rectangular U (d x D), V (D x D) and W (D x d) with D >= (n_max + 2) d.

    Args:
        U: d x D left factor (RingValue or array)
        V: D x D invertible generator
        t: time
        flow: "negative" or "positive"
        window: (k_min, k_max)
        W: D x d right factor, identity when omitted

    Returns:
        float d x d moments tagged with t and the flow
    """
    flow = Flow(flow)
    if flow is Flow.NONE:
        raise ValueError("flow_moments needs flow 'negative' or 'positive'")
    U, V = _array(U), _array(V)
    W = np.eye(V.shape[0]) if W is None else _array(W)
    V_inv = np.linalg.inv(V)
    evolution = expm(t * (V_inv if flow is Flow.NEGATIVE else V))
    lo, hi = window
    moments = {
        k: RingValue(Backend.FLOAT, U @ np.linalg.matrix_power(V if k >= 0 else V_inv, abs(k)) @ evolution @ W)
        for k in range(lo, hi + 1)
    }
    return MomentWindow.from_mapping(moments, t=t, flow=flow)


@dataclass(frozen=True, eq=False)
class FlowFamily:
    """Closed-form moment family in time for one flow direction."""

    U: np.ndarray
    V: np.ndarray
    W: np.ndarray
    flow: Flow
    k_range: tuple[int, int]

    def __post_init__(self):
        object.__setattr__(self, "flow", Flow(self.flow))
        if self.flow is Flow.NONE:
            raise ValueError("flow family needs flow 'negative' or 'positive'")
        D = self.V.shape[0]
        if self.V.shape != (D, D) or self.U.shape[1] != D or self.W.shape[0] != D:
            raise ValueError(f"incompatible factor shapes {self.U.shape}, {self.V.shape}, {self.W.shape}")

    @property
    def d(self) -> int:
        return self.U.shape[0]

    def at(self, t: float) -> MomentWindow:
        return flow_moments(self.U, self.V, t, self.flow, self.k_range, self.W)


def random_flow_family(
    seed: int | np.random.Generator,
    flow: Flow | str,
    n_max: int,
    d: int = 2,
) -> FlowFamily:
    """Generic flow family with enough inner dimension for degrees up to n_max.

    V has well separated eigenvalues in [SPECTRUM_LOW, SPECTRUM_HIGH], which keeps the block
    Toeplitz matrices far from singular at small sizes.
    """
    rng = as_generator(seed)
    D = (n_max + 2) * d
    spectrum = np.linspace(SPECTRUM_LOW, SPECTRUM_HIGH, D) + rng.uniform(-0.05, 0.05, size=D)
    basis = np.eye(D) + 0.3 * rng.standard_normal((D, D))
    V = basis @ np.diag(spectrum) @ np.linalg.inv(basis)
    U = rng.standard_normal((d, D))
    W = rng.standard_normal((D, d))
    return FlowFamily(U, V, W, Flow(flow), moment_window_for([FLOW_SHIFT], n_max + 1))


def moment_derivative_residual(family: FlowFamily, t: float, h: float) -> float:
    """Largest |(m_k(t+h) - m_k(t-h)) / 2h - m_{k-1}(t)| (m_{k+1} for the positive flow)."""
    before, now, after = family.at(t - h), family.at(t), family.at(t + h)
    step = -1 if family.flow is Flow.NEGATIVE else 1
    lo, hi = family.k_range
    ks = range(lo + 1, hi + 1) if step < 0 else range(lo, hi)
    return max(((after[k] - before[k]) * (0.5 / h) - now[k + step]).norm() for k in ks)


def _central(before, after, h: float):
    return (after - before) * (0.5 / h)


def _scale(poly: LaurentPoly, factor: float) -> LaurentPoly:
    return LaurentPoly(tuple((p, c * factor) for p, c in poly.coeffs))


def _systems(family: FlowFamily, t: float, h: float, n_max: int) -> tuple[BiorthoSystem, ...]:
    return tuple(build_family(family.at(s), FLOW_SHIFT, n_max + 1) for s in (t - h, t, t + h))


def _lax_operator(system: BiorthoSystem) -> QMatrix:
    A, B = lax_factors(system)
    return B @ nc_inverse(A)


def _superdiagonal(values: Sequence[RingValue], size: int) -> QMatrix:
    zero = values[0].zero()
    rows = [[zero] * size for _ in range(size)]
    for i in range(size - 1):
        rows[i][i + 1] = values[i]
    return QMatrix.from_rows(rows)


def _block(matrix: QMatrix, size: int) -> QMatrix:
    return matrix.select(range(size), range(size))


def _scale_matrix(matrix: QMatrix, factor: float) -> QMatrix:
    return QMatrix.from_rows([[x * factor for x in row] for row in matrix.entries])


def _report(parts: Mapping[str, Sequence[float]]) -> dict[str, float]:
    return {name: max(values, default=0.0) for name, values in parts.items()}


def negative_flow_residual(
    family: FlowFamily,
    t: float,
    n_max: int,
    h: float,
    xi_offset: float = 0.0,
) -> dict[str, float]:
    """Central-difference residuals of the negative flow at time t, degrees n <= n_max.

    Keys: "Q" for d/dt (Q_n)* = (z^-1 (Q_{n-1})* - (Q_n)*) xi_{n-1}, "psi" for
    d/dt psi_n = xi_{n-1} psi_n - psi_n xi_n, "xi" for
    d/dt xi_n = -(psi_n - xi_{n-1}) xi_n - xi_n (xi_{n+1} - psi_{n+1}), and "lax" for
    d/dt (B A^-1) = [B A^-1, C A^-1] with C the superdiagonal of zeta. A nonzero xi_offset shifts xi on
    the right-hand sides, which must break the first three.
    """
    if family.flow is not Flow.NEGATIVE:
        raise ValueError(f"negative_flow_residual needs a negative flow family, got {family.flow.value}")
    before, now, after = _systems(family, t, h, n_max)
    psi, xi = now.psi, tuple(x + xi_offset for x in now.xi)
    zero = psi[0].zero()

    q_res, psi_res, xi_res = [], [], []
    for n in range(n_max + 1):
        xi_prev = xi[n - 1] if n else zero
        d_psi = _central(before.psi[n], after.psi[n], h)
        psi_res.append((d_psi - (xi_prev * psi[n] - psi[n] * xi[n])).norm())
        d_xi = _central(before.xi[n], after.xi[n], h)
        xi_res.append((d_xi + (psi[n] - xi_prev) * xi[n] + xi[n] * (xi[n + 1] - psi[n + 1])).norm())
        if n:
            d_q = _scale(after.Q_star[n] - before.Q_star[n], 0.5 / h)
            rhs = (now.Q_star[n - 1].shifted(-1) - now.Q_star[n]) * xi[n - 1]
            q_res.append((d_q - rhs).norm())

    size = n_max + 2
    L_before, L, L_after = (_lax_operator(s) for s in (before, now, after))
    A, _ = lax_factors(now)
    M = _superdiagonal(now.zeta, size) @ nc_inverse(A)
    lax = _scale_matrix(L_after - L_before, 0.5 / h) - (L @ M - M @ L)
    residuals = _report({"Q": q_res, "psi": psi_res, "xi": xi_res, "lax": [_block(lax, size - 1).norm()]})
    logger.debug("negative flow residuals at t=%s h=%s: %s", t, h, residuals)
    return residuals


def positive_flow_residual(
    family: FlowFamily,
    t: float,
    n_max: int,
    h: float,
    xi_offset: float = 0.0,
) -> dict[str, float]:
    """Central-difference residuals of the positive flow at time t, degrees n <= n_max.

    Keys: "Q" for d/dt (Q_n)* = (Q_{n-1})* eta_n with eta_n = -xi_{n-1} psi_n^-1, "xi" for
    d/dt xi_n = xi_n psi_{n+1}^-1 - psi_n^-1 xi_n, "psi" for
    d/dt psi_n = xi_n psi_{n+1}^-1 - psi_{n-1}^-1 xi_{n-1}, and "lax" for
    d/dt (B A^-1) = [B A^-1, D] with D the superdiagonal of eta_{i+1}. xi_offset as for the negative flow.
    """
    if family.flow is not Flow.POSITIVE:
        raise ValueError(f"positive_flow_residual needs a positive flow family, got {family.flow.value}")
    before, now, after = _systems(family, t, h, n_max)
    psi, xi, eta = now.psi, tuple(x + xi_offset for x in now.xi), now.eta

    q_res, psi_res, xi_res = [], [], []
    for n in range(n_max + 1):
        gain = xi[n] * ring_inv(psi[n + 1])
        d_xi = _central(before.xi[n], after.xi[n], h)
        xi_res.append((d_xi - (gain - ring_inv(psi[n]) * xi[n])).norm())
        d_psi = _central(before.psi[n], after.psi[n], h)
        loss = ring_inv(psi[n - 1]) * xi[n - 1] if n else psi[n].zero()
        psi_res.append((d_psi - (gain - loss)).norm())
        if n:
            d_q = _scale(after.Q_star[n] - before.Q_star[n], 0.5 / h)
            q_res.append((d_q - now.Q_star[n - 1] * eta[n]).norm())

    size = n_max + 2
    L_before, L, L_after = (_lax_operator(s) for s in (before, now, after))
    D = _superdiagonal(list(eta[1:]), size)
    lax = _scale_matrix(L_after - L_before, 0.5 / h) - (L @ D - D @ L)
    residuals = _report({"Q": q_res, "psi": psi_res, "xi": xi_res, "lax": [_block(lax, size - 1).norm()]})
    logger.debug("positive flow residuals at t=%s h=%s: %s", t, h, residuals)
    return residuals


def flow_residual(family: FlowFamily, t: float, n_max: int, h: float) -> dict[str, float]:
    if family.flow is Flow.NEGATIVE:
        return negative_flow_residual(family, t, n_max, h)
    return positive_flow_residual(family, t, n_max, h)


def convergence_slope(residuals_by_h: Mapping[float, float]) -> float:
    """Least-squares slope of log(residual) against log(h)."""
    if len(residuals_by_h) < 2:
        raise ValueError("convergence slope needs residuals at two or more step sizes")
    hs = np.array(sorted(residuals_by_h), dtype=float)
    rs = np.array([residuals_by_h[h] for h in sorted(residuals_by_h)], dtype=float)
    if np.any(rs <= 0):
        raise ValueError("residuals must be positive to measure a convergence slope")
    slope, _ = np.polyfit(np.log(hs), np.log(rs), 1)
    return float(slope)


def convergence_table(family: FlowFamily, t: float, n_max: int, h_values: Sequence[float] = DEFAULT_H_VALUES):
    """Residual reports per h and the slope of each residual family.

    Returns:
        (rows, slopes) where rows is a list of dicts with h and every residual key
    """
    rows = []
    for h in h_values:
        rows.append({"h": h, **flow_residual(family, t, n_max, h)})
    keys = [key for key in rows[0] if key != "h"]
    slopes = {key: convergence_slope({row["h"]: row[key] for row in rows}) for key in keys}
    return rows, slopes
