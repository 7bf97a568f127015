"""Brute-force validation machinery: direct time evolution, regression-theorem
correlations, Lyapunov covariances, and the cross-check battery.

Everything here recomputes its target from the generator alone (plus its own
integrators) so that agreement with the analytic modules is a genuine
two-route check rather than a tautology.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import fluctuations as fl
from . import propagation as pr
from .atom import Generator, build_generator
from .params import BASIS, SystemParams
from .steady import AtomState, solve_steady_state


class OracleError(RuntimeError):
    pass


@dataclass(frozen=True)
class EvolutionResult:
    times: np.ndarray
    states: np.ndarray           # (n_samples, 4, 4)
    final_residual: float        # ||L(rho_final)||_F
    trace_drift: float           # max |tr(rho) - 1| along the trajectory

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


def time_evolve(gen: Generator, rho0: np.ndarray, t_final: float, dt: float,
                sample_every: int = 100) -> EvolutionResult:
    """Fixed-step 4th-order integration of rho' = L(rho).

    Trace renormalization is never applied; trace drift is a diagnostic of
    integrator quality.  Aborts if the state develops negativity beyond 1e-6.
    """
    lmat = gen.matrix
    lnorm = np.linalg.norm(lmat, 2)
    if dt * lnorm >= 0.1:
        raise ValueError(
            f"dt too large: dt*||L|| = {dt * lnorm:.3f} >= 0.1; "
            f"use dt < {0.1 / lnorm:.2e}")
    n_steps = max(1, int(round(t_final / dt)))
    # classical RK4 on a linear system is exactly the 4th-order Taylor
    # polynomial of the exponential, applied once per step
    ldt = lmat * dt
    step = (np.eye(16) + ldt + ldt @ ldt / 2.0
            + ldt @ ldt @ ldt / 6.0 + ldt @ ldt @ ldt @ ldt / 24.0)
    x = rho0.reshape(16).astype(complex)
    times = [0.0]
    states = [rho0.astype(complex).copy()]
    trace_drift = abs(np.trace(rho0) - 1.0)
    for k in range(1, n_steps + 1):
        x = step @ x
        if k % sample_every == 0 or k == n_steps:
            rho = x.reshape(4, 4)
            trace_drift = max(trace_drift, abs(np.trace(rho) - 1.0))
            min_eig = float(np.min(np.linalg.eigvalsh((rho + rho.conj().T) / 2)))
            if min_eig < -1e-6:
                raise OracleError(
                    f"positivity violated at t = {k * dt:.3f} "
                    f"(min eigenvalue {min_eig:.2e}); reduce dt")
            times.append(k * dt)
            states.append(rho.copy())
    final_residual = float(np.linalg.norm(lmat @ x))
    return EvolutionResult(times=np.array(times), states=np.array(states),
                           final_residual=final_residual,
                           trace_drift=float(trace_drift))


def regression_covariance(gen: Generator, state: AtomState, tau: float,
                          dt: Optional[float] = None) -> np.ndarray:
    """Two-time correlation matrix <d sigma_mu(tau) d sigma_nu(0)>.

    Quantum regression theorem: evolve sigma_nu rho_ss under L for time tau,
    trace against sigma_mu, subtract the product of means.  Returned in the
    full 16-dim basis ordering.
    """
    lmat = gen.matrix
    lnorm = np.linalg.norm(lmat, 2)
    if dt is None:
        dt = 0.02 / max(lnorm, 1e-12)
    if tau < 0:
        raise ValueError("tau must be >= 0")
    rho = state.rho
    # initial conditions sigma_nu rho_ss, vectorized as columns
    init = np.einsum("nkl,lj->nkj", BASIS.sigmas, rho)  # (16, 4, 4)
    y = init.reshape(16, 16).T.copy()  # vec index x nu
    if tau > 0:
        n_steps = max(1, int(round(tau / dt)))
        ldt = lmat * (tau / n_steps)
        step = (np.eye(16) + ldt + ldt @ ldt / 2.0
                + ldt @ ldt @ ldt / 6.0 + ldt @ ldt @ ldt @ ldt / 24.0)
        for _ in range(n_steps):
            y = step @ y
    evolved = y.T.reshape(16, 4, 4)
    corr = np.einsum("mkl,nlk->mn", BASIS.sigmas, evolved)
    means = state.expectations
    return corr - np.outer(means, means)


def lyapunov_covariance(lin: fl.LinearizedSystem) -> np.ndarray:
    """Stationary covariance solving A S + S A^T + 2 D = 0 (dense solve)."""
    a = lin.a
    max_re = float(np.max(np.real(np.linalg.eigvals(a))))
    if max_re >= -1e-14:
        raise OracleError(
            f"drift not strictly stable (max Re eigenvalue {max_re:.2e}); "
            "stationary covariance undefined")
    n = a.shape[0]
    eye = np.eye(n)
    lhs = np.kron(a, eye) + np.kron(eye, a)  # row-major vec(AS + SA^T)
    rhs = -2.0 * lin.d.reshape(n * n)
    return np.linalg.solve(lhs, rhs).reshape(n, n)


@dataclass(frozen=True)
class ValidationCheck:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.residual < self.tolerance)


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> tuple:
        return tuple(c for c in self.checks if not c.passed)

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [
                {"name": c.name, "residual": c.residual,
                 "tolerance": c.tolerance, "passed": c.passed}
                for c in self.checks
            ],
        }


def cross_validate(params: SystemParams) -> ValidationReport:
    """Full consistency battery at one parameter point.

    Covers: state invariants (trace, Hermiticity, positivity), dual-method
    steady-state agreement, the dual-path Einstein-relation identity,
    Lyapunov vs regression covariance, and commutator preservation through
    the propagation.
    """
    checks = []
    gen = build_generator(params)
    state = solve_steady_state(gen, params)
    rho = state.rho
    checks.append(ValidationCheck("trace", abs(np.trace(rho) - 1.0), 1e-10))
    checks.append(ValidationCheck(
        "hermiticity", float(np.max(np.abs(rho - rho.conj().T))), 1e-10))
    min_eig = float(np.min(np.linalg.eigvalsh((rho + rho.conj().T) / 2)))
    checks.append(ValidationCheck("positivity", max(0.0, -min_eig), 1e-10))

    other = solve_steady_state(
        gen, params,
        method="long-time-integration" if state.method == "null-space"
        else "null-space")
    checks.append(ValidationCheck(
        "steady-state dual-method agreement",
        float(np.max(np.abs(other.expectations - state.expectations))), 1e-8))

    d_sandwich = fl.diffusion_matrix(gen, state)
    d_channel = fl.diffusion_matrix_channelwise(gen, state)
    checks.append(ValidationCheck(
        "Einstein-relation dual-path identity",
        float(np.max(np.abs(d_sandwich - d_channel))), 1e-12))

    lin = fl.linearize(gen, state, params)
    sigma_direct = fl.equal_time_covariance(state)
    sigma_lyap = lyapunov_covariance(lin)
    scale = max(float(np.max(np.abs(sigma_direct))), 1e-30)
    checks.append(ValidationCheck(
        "Lyapunov vs regression covariance",
        float(np.max(np.abs(sigma_lyap - sigma_direct))) / scale, 1e-6))

    setup = pr.make_setup(lin, params)
    res = pr.propagate_covariance(setup, pr.input_covariance())
    c1, c2 = res.covariance.commutator_blocks()
    checks.append(ValidationCheck(
        "commutator preservation",
        max(abs(c1 - 1.0), abs(c2 - 1.0)), 1e-6))
    return ValidationReport(checks=tuple(checks))
