"""Mean-field steady state of the generator and derived observables."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import expm

from .atom import Generator
from .params import BASIS, SystemParams

#: fallback initial state: unpolarized atoms entering the beam
RHO_UNPOLARIZED = np.diag([0.5, 0.0, 0.5, 0.0]).astype(complex)

DEGENERACY_RATIO = 1e-8
STEADY_RESIDUAL_TOL = 1e-10


class SteadyStateError(RuntimeError):
    pass


@dataclass(frozen=True)
class AtomState:
    """Steady-state expectation values <sigma_ij> in canonical basis order."""

    expectations: np.ndarray
    method: str  # "null-space" | "long-time-integration"

    @property
    def rho(self) -> np.ndarray:
        return BASIS.to_matrix(self.expectations)

    @property
    def populations(self) -> np.ndarray:
        return np.real(self.expectations[BASIS.diagonal])

    def expectation(self, i: int, j: int) -> complex:
        return complex(self.expectations[BASIS.index(i, j)])


def _validate_state(rho: np.ndarray) -> None:
    tr = np.trace(rho)
    if abs(tr - 1.0) > 1e-10:
        raise SteadyStateError(f"steady state trace deviates from 1 by {abs(tr-1):.2e}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > 1e-10:
        raise SteadyStateError(f"steady state not Hermitian, residual {herm:.2e}")
    min_eig = float(np.min(np.linalg.eigvalsh((rho + rho.conj().T) / 2)))
    if min_eig < -1e-10:
        raise SteadyStateError(f"steady state not positive, min eigenvalue {min_eig:.2e}")


def _integrate_to_steady(gen: Generator, rho0: np.ndarray,
                         residual_tol: float = STEADY_RESIDUAL_TOL) -> np.ndarray:
    """Long-time integration by exact exponential stepping with doubling.

    Deterministic: the propagator over an initial interval is squared until
    the generator residual of the evolved state stops improving or passes
    the tolerance.
    """
    lmat = gen.matrix
    scale = np.linalg.norm(lmat, 2)
    if scale == 0:
        return rho0.copy()
    prop = expm(lmat / scale)  # time step 1/||L||
    x = rho0.reshape(16)
    best = None
    for _ in range(60):  # covers times up to 2^60/||L||
        x = prop @ x
        x = x / np.real(np.trace(x.reshape(4, 4)))  # guard against rounding drift
        res = np.linalg.norm(lmat @ x)
        if best is None or res < best[0]:
            best = (res, x.copy())
        if res < residual_tol:
            return x.reshape(4, 4)
        prop = prop @ prop
    res, x = best
    if res < residual_tol * 10:
        return x.reshape(4, 4)
    raise SteadyStateError(
        f"long-time integration did not converge: residual {res:.2e} "
        f"(tolerance {residual_tol:.1e})")


def solve_steady_state(gen: Generator, params: SystemParams,
                       method: str = "auto") -> AtomState:
    """Solve L(rho) = 0 with unit trace.

    Primary route: null space of the 16x16 Liouvillian (SVD) with the trace
    constraint used for normalization.  If the null space is numerically
    degenerate (second-smallest singular value below 1e-8 * ||L||) the solver
    falls back to long-time integration from an unpolarized lower-level
    mixture and records the method used.
    """
    if method not in ("auto", "null-space", "long-time-integration"):
        raise ValueError(f"unknown method {method!r}")
    lmat = gen.matrix
    used = method
    vec = tr = None
    if method in ("auto", "null-space"):
        _, svals, vh = np.linalg.svd(lmat)
        vec = vh[-1].conj()
        tr = np.trace(vec.reshape(4, 4))
        degenerate = (svals[-2] < DEGENERACY_RATIO * svals[0]) or abs(tr) < 1e-8
        if method == "auto":
            used = "long-time-integration" if degenerate else "null-space"
        elif degenerate:
            raise SteadyStateError(
                "null space degenerate (singular-value ratio "
                f"{svals[-2] / svals[0]:.2e}); use long-time integration")
    if used == "null-space":
        rho = (vec / tr).reshape(4, 4)
    else:
        rho = _integrate_to_steady(gen, RHO_UNPOLARIZED)
    rho = (rho + rho.conj().T) / 2
    rho = rho / np.real(np.trace(rho))
    _validate_state(rho)
    return AtomState(expectations=BASIS.expectations(rho), method=used)


@dataclass(frozen=True)
class Observables:
    """Populations, optical-coherence sums, and absorption coefficients."""

    populations: np.ndarray
    s1: complex  # <sigma_14> + <sigma_12>
    s2: complex  # <sigma_34> + <sigma_32>
    alpha1: Optional[float]  # intensity absorption, 1/m; None if <a1> = 0
    alpha2: Optional[float]


def observables(state: AtomState, params: SystemParams) -> Observables:
    """Input-plane observables of the solved steady state.

    alpha_i is the fractional intensity loss per meter of field i at the
    medium input, 2*chi_i*Im(s_i)/<a_i>; the mean fields themselves are never
    depleted.
    """
    s1 = state.expectation(1, 4) + state.expectation(1, 2)
    s2 = state.expectation(3, 4) + state.expectation(3, 2)
    alpha1 = alpha2 = None
    if params.a1_mean > 0:
        alpha1 = 2.0 * params.chi1 * float(np.imag(s1)) / params.a1_mean
    if params.a2_mean > 0:
        alpha2 = 2.0 * params.chi2 * float(np.imag(s2)) / params.a2_mean
    return Observables(populations=state.populations, s1=s1, s2=s2,
                       alpha1=alpha1, alpha2=alpha2)
