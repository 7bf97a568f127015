"""Quadrature variances and the Duan inseparability criterion."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .propagation import FieldCovariance

#: joint quadratures: u = x1 + x2 (symmetric), v = p1 - p2 (antisymmetric),
#: with x = a + a+ and p = -i (a - a+)
U_WEIGHTS = np.array([1.0, 1.0, 1.0, 1.0], dtype=complex)
V_WEIGHTS = np.array([-1j, 1j, 1j, -1j], dtype=complex)

#: separability bound for these quadrature normalizations
DUAN_BOUND = 4.0


@dataclass(frozen=True)
class DuanResult:
    v12: float
    du2: float
    dv2: float
    entangled: bool


def quadrature_variance(cov: FieldCovariance, weights) -> float:
    """Symmetrized variance of the operator sum_i w_i v_i.

    Uses sum_ij w_i w_j (C_ij + C_ji)/2; for Hermitian combinations the
    result is real, and the imaginary residual is asserted to be numerical.
    """
    w = np.asarray(weights, dtype=complex)
    if w.shape != (4,):
        raise ValueError("weights must be a 4-vector")
    sym = (cov.c + cov.c.T) / 2.0
    value = w @ sym @ w
    if abs(value.imag) > 1e-10 * max(1.0, abs(value.real)):
        raise ValueError(f"variance has non-negligible imaginary part {value.imag:.2e}")
    return float(value.real)


def duan_v12(cov: FieldCovariance) -> DuanResult:
    """V12 = <du^2> + <dv^2>; values below 4 certify bipartite entanglement."""
    du2 = quadrature_variance(cov, U_WEIGHTS)
    dv2 = quadrature_variance(cov, V_WEIGHTS)
    v12 = du2 + dv2
    return DuanResult(v12=v12, du2=du2, dv2=dv2, entangled=bool(v12 < DUAN_BOUND))
