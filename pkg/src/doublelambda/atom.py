"""Single-atom rotating-frame Hamiltonian, correlated dissipator, and generator.

The two pump fields couple 1-4/1-2 and 3-4/3-2.  Spontaneous decay of the
upper doublet to each lower level goes through a shared vacuum reservoir, so
the two channels ending on the same final state dissipate with a correlated
2x2 rate matrix whose off-diagonal element carries the dipole alignment
parameter p; those cross terms are what generate the interference coherences
between levels 2 and 4.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import sqrtm

from .params import BASIS, SystemParams

I4 = np.eye(4, dtype=complex)


@dataclass(frozen=True)
class RateMatrices:
    """Correlated decay-rate matrices and lower-level incoherent rates.

    gamma_to_1 / gamma_to_3 act on the channel pairs (4->f, 2->f); diagonals
    are the full rates (2*gamma_i), off-diagonals the interference cross
    rates 2*p*sqrt(gamma_a*gamma_b).
    """

    gamma_to_1: np.ndarray
    gamma_to_3: np.ndarray
    exchange_rate: float   # full rate 2*gamma0, each direction 1<->3
    dephasing_rate: float  # gamma_phi on the 1-3 coherence


def build_rate_matrices(params: SystemParams) -> RateMatrices:
    """Assemble the 2x2 decay-rate matrices for the two final states."""
    # |p| <= 1 is enforced by SystemParams; an indefinite rate matrix would
    # not define a physical dissipator.
    g1 = 2.0 * np.array([
        [params.gamma1, params.p1 * np.sqrt(params.gamma1 * params.gamma2)],
        [params.p1 * np.sqrt(params.gamma1 * params.gamma2), params.gamma2],
    ])
    g3 = 2.0 * np.array([
        [params.gamma3, params.p2 * np.sqrt(params.gamma3 * params.gamma4)],
        [params.p2 * np.sqrt(params.gamma3 * params.gamma4), params.gamma4],
    ])
    return RateMatrices(gamma_to_1=g1, gamma_to_3=g3,
                        exchange_rate=2.0 * params.gamma0,
                        dephasing_rate=params.gamma_phi)


def hamiltonian_with_fields(params: SystemParams, a1, a1d, a2, a2d) -> np.ndarray:
    """Rotating-frame Hamiltonian / hbar with the four field amplitudes as
    independent c-numbers (non-Hermitian unless a1d = conj(a1) etc.).

    Diagonal: levels (1, 2, 3, 4) at (0, -delta2, 0, -delta1).  Level 3 sits
    at zero because two-photon resonance is enforced identically; the raw
    level-3 coefficient is the two-photon detuning, which vanishes here.
    """
    h = np.zeros((4, 4), dtype=complex)
    h[1, 1] = -params.delta2
    h[3, 3] = -params.delta1
    g = params.g
    # field 1 on 1-4 and 1-2, field 2 on 3-4 and 3-2 (equal dipoles)
    h[3, 0] += -g * a1
    h[1, 0] += -g * a1
    h[0, 3] += -g * a1d
    h[0, 1] += -g * a1d
    h[3, 2] += -g * a2
    h[1, 2] += -g * a2
    h[2, 3] += -g * a2d
    h[2, 1] += -g * a2d
    return h


def build_hamiltonian(params: SystemParams) -> np.ndarray:
    """Hamiltonian at the (real) mean field amplitudes."""
    a1, a2 = params.a1_mean, params.a2_mean
    return hamiltonian_with_fields(params, a1, a1, a2, a2)


def dissipation_channels(params: SystemParams) -> list[tuple[list[np.ndarray], np.ndarray]]:
    """Jump-operator groups with their rate matrices.

    Each entry is (operators, rate_matrix); within a group the operators
    dissipate jointly: D(rho) = sum_mn G_mn (L_m rho L_n^+ - {L_n^+ L_m, rho}/2).
    """
    rm = build_rate_matrices(params)
    sig = BASIS.sigma
    groups = [
        ([sig(1, 4), sig(1, 2)], rm.gamma_to_1),
        ([sig(3, 4), sig(3, 2)], rm.gamma_to_3),
    ]
    if rm.exchange_rate > 0:
        groups.append(([sig(1, 3)], np.array([[rm.exchange_rate]])))
        groups.append(([sig(3, 1)], np.array([[rm.exchange_rate]])))
    if rm.dephasing_rate > 0:
        # L = sigma_11 - sigma_33 at rate gamma_phi/2 adds exactly gamma_phi
        # to the 1-3 coherence decay.
        groups.append(([sig(1, 1) - sig(3, 3)],
                       np.array([[rm.dephasing_rate / 2.0]])))
    return groups


def _liouvillian_matrix(h: np.ndarray,
                        channels: list[tuple[list[np.ndarray], np.ndarray]]) -> np.ndarray:
    """Superoperator of rho' = -i[H, rho] + D(rho) on row-major vec(rho)."""
    lmat = -1j * (np.kron(h, I4) - np.kron(I4, h.T))
    for ops, gmat in channels:
        for m, lm in enumerate(ops):
            for n, ln in enumerate(ops):
                rate = gmat[m, n]
                if rate == 0:
                    continue
                lnd_lm = ln.conj().T @ lm
                lmat += rate * (np.kron(lm, ln.conj())
                                - 0.5 * np.kron(lnd_lm, I4)
                                - 0.5 * np.kron(I4, lnd_lm.T))
    return lmat


@dataclass(frozen=True)
class Generator:
    """Liouvillian of the model in both pictures.

    matrix acts on row-major vec(rho); adjoint propagates the expectation
    vector <sigma_ij> in the canonical AtomicBasis ordering.
    """

    matrix: np.ndarray
    adjoint: np.ndarray
    hamiltonian: np.ndarray
    channels: list
    params: SystemParams

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return (self.matrix @ rho.reshape(16)).reshape(4, 4)

    def apply_adjoint(self, x: np.ndarray) -> np.ndarray:
        """Heisenberg action on an operator given as a 4x4 matrix."""
        return (self.matrix.conj().T @ x.reshape(16)).reshape(4, 4)


def generator_with_fields(params: SystemParams, a1, a1d, a2, a2d) -> np.ndarray:
    """Liouvillian matrix with the fields frozen at arbitrary c-numbers.

    The master equation is linear in each field amplitude, so this is the
    exact mean-field evolution map used for the field-coupling columns.
    """
    h = hamiltonian_with_fields(params, a1, a1d, a2, a2d)
    return _liouvillian_matrix(h, dissipation_channels(params))


def build_generator(params: SystemParams) -> Generator:
    """Generator at the mean field amplitudes."""
    h = build_hamiltonian(params)
    channels = dissipation_channels(params)
    lmat = _liouvillian_matrix(h, channels)
    # Heisenberg drift in basis order: <sigma_ij> = rho_ji, so the adjoint
    # matrix is the Schroedinger one conjugated by the index-swap permutation.
    adjoint = BASIS.swap @ lmat @ BASIS.swap
    return Generator(matrix=lmat, adjoint=adjoint, hamiltonian=h,
                     channels=channels, params=params)


def dissipative_activity(gen: Generator, rho: np.ndarray) -> float:
    """Total jump rate sum_k r_k <L_k^+ L_k> in the given state.

    Zero (to tolerance) means the state is strictly dark: no channel fires,
    no photon is scattered, no Langevin noise is generated.
    """
    total = 0.0
    for ops, gmat in gen.channels:
        w, v = np.linalg.eigh(gmat)
        for k in range(len(w)):
            if w[k] <= 0:
                continue
            lk = sum(v[m, k] * ops[m] for m in range(len(ops)))
            total += w[k] * np.real(np.trace(lk.conj().T @ lk @ rho))
    return float(total)


@dataclass(frozen=True)
class DarkStateAnalysis:
    """Mixing angles and dark-state amplitudes of the driven system."""

    theta: float
    phi: float
    phi0_amplitudes: np.ndarray   # cos(theta)|1> - sin(theta)|3>
    phi1_amplitudes: np.ndarray   # doublet-mixed dark state
    interference_residuals: tuple[float, float]


def dark_state_analysis(params: SystemParams) -> DarkStateAnalysis:
    """Angles, dark-state amplitudes, and the interference-condition residuals.

    With equal dipole magnitudes, both residuals reduce to delta1 + delta2;
    they vanish exactly at the doublet midpoint delta1 = -omega42/2.
    """
    r1 = params.g * params.a1_mean
    r2 = params.g * params.a2_mean
    if r1 == 0 and r2 == 0:
        raise ValueError("both drive amplitudes vanish: mixing angles undefined")
    theta = np.arctan2(r1, r2)
    rbar = np.sqrt(r1**2 + r2**2)
    phi = np.arctan2(params.omega42 / 2.0, np.sqrt(2.0) * rbar)
    phi0 = np.array([np.cos(theta), 0.0, -np.sin(theta), 0.0])
    phi1 = np.array([
        np.sin(theta) * np.sin(phi),
        np.cos(phi) / np.sqrt(2.0),
        np.cos(theta) * np.sin(phi),
        -np.cos(phi) / np.sqrt(2.0),
    ])
    residual = params.delta2 + params.delta1
    return DarkStateAnalysis(theta=float(theta), phi=float(phi),
                             phi0_amplitudes=phi0, phi1_amplitudes=phi1,
                             interference_residuals=(residual, residual))


def jump_amplitudes_on_state(params: SystemParams, state: np.ndarray) -> list[np.ndarray]:
    """For each final state f in {1, 3}: sqrt(Gamma_f) applied to the state's
    (level-4, level-2) amplitude pair.  Both vectors vanish iff the state is
    dark with respect to the correlated spontaneous decay."""
    rm = build_rate_matrices(params)
    amps = np.array([state[3], state[1]])
    out = []
    for gmat in (rm.gamma_to_1, rm.gamma_to_3):
        root = sqrtm(gmat.astype(complex))
        out.append(root @ amps)
    return out
