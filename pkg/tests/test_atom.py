import numpy as np
import pytest

from doublelambda import BASIS, SystemParams
from doublelambda.atom import (build_generator, build_hamiltonian,
                               build_rate_matrices, dark_state_analysis,
                               dissipative_activity, jump_amplitudes_on_state)
from conftest import random_params


class TestHamiltonian:
    def test_detuned_diagonal(self):
        # two-photon resonance keeps level 3 at zero; levels 2 and 4 sit at
        # -delta2 and -delta1
        p = SystemParams(g=0.0, delta1=-1.0, omega42=2.0)
        h = build_hamiltonian(p)
        assert np.allclose(np.diag(h), [0.0, -1.0, 0.0, 1.0])
        assert np.allclose(h, np.diag(np.diag(h)))

    def test_hermitian(self, rng):
        for _ in range(20):
            h = build_hamiltonian(random_params(rng, with_fields=True))
            assert np.max(np.abs(h - h.conj().T)) < 1e-14

    def test_symmetric_midpoint(self):
        p = SystemParams(delta1=-1.0, omega42=2.0)
        h = build_hamiltonian(p)
        assert h[1, 1] == pytest.approx(-1.0)
        assert h[3, 3] == pytest.approx(1.0)

    def test_coupling_placement(self):
        p = SystemParams(a1_mean=0.7, a2_mean=0.3)
        h = build_hamiltonian(p)
        g = p.g
        assert h[3, 0] == pytest.approx(-g * 0.7)
        assert h[1, 0] == pytest.approx(-g * 0.7)
        assert h[3, 2] == pytest.approx(-g * 0.3)
        assert h[1, 2] == pytest.approx(-g * 0.3)
        assert h[2, 0] == 0 and h[0, 2] == 0  # no direct 1-3 coupling


class TestRateMatrices:
    def test_perfect_alignment_rank_one(self):
        rm = build_rate_matrices(SystemParams(gamma1=1, gamma2=1, p1=1))
        assert np.allclose(rm.gamma_to_1, [[2, 2], [2, 2]])
        assert sorted(np.round(np.linalg.eigvalsh(rm.gamma_to_1), 12)) == [0, 4]

    def test_no_interference(self):
        rm = build_rate_matrices(SystemParams(p1=0.0))
        assert np.allclose(rm.gamma_to_1, np.diag([2, 2]))

    def test_antiparallel(self):
        rm = build_rate_matrices(SystemParams(gamma1=1, gamma2=4, p1=-1))
        assert np.allclose(rm.gamma_to_1, [[2, -4], [-4, 8]])
        assert np.linalg.det(rm.gamma_to_1) == pytest.approx(0.0, abs=1e-12)

    def test_psd_for_valid_p(self, rng):
        for _ in range(50):
            p = random_params(rng)
            rm = build_rate_matrices(p)
            for gmat in (rm.gamma_to_1, rm.gamma_to_3):
                assert np.min(np.linalg.eigvalsh(gmat)) > -1e-12

    @pytest.mark.parametrize("pval", [1.0, -1.0])
    def test_rank_deficient_at_unit_alignment(self, pval):
        rm = build_rate_matrices(SystemParams(gamma1=0.7, gamma2=1.3, p1=pval))
        assert np.min(np.abs(np.linalg.eigvalsh(rm.gamma_to_1))) < 1e-12

    def test_unphysical_alignment_rejected(self):
        with pytest.raises(ValueError):
            SystemParams(p1=1.2)


class TestGenerator:
    def test_trace_preservation(self):
        # L-dagger of the identity vanishes: the trace vector is a left null
        # vector of the adjoint drift
        rng = np.random.default_rng(7)
        for _ in range(200):
            gen = build_generator(random_params(rng, with_fields=True))
            ident = np.eye(4, dtype=complex)
            assert np.linalg.norm(gen.apply_adjoint(ident)) < 1e-12

    def test_hermiticity_preservation(self, rng):
        for _ in range(20):
            gen = build_generator(random_params(rng, with_fields=True))
            x = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            herm = (x + x.conj().T) / 2
            out = gen.apply(herm)
            assert np.max(np.abs(out - out.conj().T)) < 1e-12

    def test_closed_system_spectrum_imaginary(self):
        p = SystemParams(gamma1=0, gamma2=0, gamma3=0, gamma4=0, gamma0=0)
        gen = build_generator(p)
        evals = np.linalg.eigvals(gen.matrix)
        assert np.max(np.abs(np.real(evals))) < 1e-12

    def test_level4_decay_bookkeeping(self, defaults):
        # total decay out of level 4 at the reference rates
        gen = build_generator(defaults)
        mu = BASIS.index(4, 4)
        assert gen.adjoint[mu, mu] == pytest.approx(-4.0)


class TestDarkState:
    def test_symmetric_amplitudes(self):
        d = dark_state_analysis(SystemParams(a1_mean=1, a2_mean=1))
        assert d.theta == pytest.approx(np.pi / 4)

    def test_phi_angle(self):
        # omega42/2 over sqrt(2 * (0.25 + 0.25)) = 1
        p = SystemParams(omega42=2.0, g=0.5, a1_mean=1.0, a2_mean=1.0)
        d = dark_state_analysis(p)
        assert np.tan(d.phi) == pytest.approx(1.0)
        assert d.phi == pytest.approx(np.pi / 4)

    def test_midpoint_interference_residual(self):
        d = dark_state_analysis(SystemParams(delta1=-1.0, omega42=2.0))
        assert d.interference_residuals[0] == pytest.approx(0.0, abs=1e-14)
        assert d.interference_residuals[1] == pytest.approx(0.0, abs=1e-14)

    def test_normalization(self, rng):
        for _ in range(20):
            d = dark_state_analysis(random_params(rng, with_fields=True))
            assert np.linalg.norm(d.phi0_amplitudes) == pytest.approx(1.0)
            assert np.linalg.norm(d.phi1_amplitudes) == pytest.approx(1.0)

    def test_no_drive_rejected(self):
        with pytest.raises(ValueError):
            dark_state_analysis(SystemParams(a1_mean=0.0, a2_mean=0.0))

    def test_doublet_state_is_jump_dark_at_unit_alignment(self):
        # with aligned dipoles, equal rates and amplitudes, the doublet-mixed
        # dark state is annihilated by both collective decay channels
        p = SystemParams(p1=1, p2=1, delta1=-1.0, omega42=2.0)
        d = dark_state_analysis(p)
        for vec in jump_amplitudes_on_state(p, d.phi1_amplitudes):
            assert np.linalg.norm(vec) < 1e-12

    def test_antiparallel_not_dark(self):
        p = SystemParams(p1=-1, p2=-1, delta1=-1.0)
        d = dark_state_analysis(p)
        norms = [np.linalg.norm(v)
                 for v in jump_amplitudes_on_state(p, d.phi1_amplitudes)]
        assert max(norms) > 0.1


def test_dissipative_activity_dark_vs_bright(defaults):
    gen = build_generator(defaults)
    dark = np.zeros((4, 4), dtype=complex)
    dark[0, 0] = 1.0  # level 1 only: no decay, no exchange target population
    # level 1 populated: exchange 1->3 fires
    assert dissipative_activity(gen, dark) > 0
    p0 = SystemParams(gamma0=0.0)
    gen0 = build_generator(p0)
    assert dissipative_activity(gen0, dark) < 1e-15
