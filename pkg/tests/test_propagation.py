import numpy as np
import pytest

from doublelambda import SystemParams
from doublelambda.atom import build_generator
from doublelambda.entanglement import duan_v12
from doublelambda.fluctuations import linearize
from doublelambda.propagation import (PropagationSetup, input_covariance,
                                      make_setup, propagate_covariance)
from doublelambda.steady import solve_steady_state
from conftest import random_params


def pipeline(params, **kw):
    gen = build_generator(params)
    state = solve_steady_state(gen, params)
    lin = linearize(gen, state, params)
    return make_setup(lin, params, **kw)


class TestTransferMatrix:
    def test_empty_medium(self):
        p = SystemParams(n0=0.0)
        setup = pipeline(p)
        assert np.max(np.abs(setup.m)) == 0.0
        assert np.max(np.abs(setup.nfield)) == 0.0

    def test_adjoint_pairing_at_zero_frequency(self, defaults):
        setup = pipeline(defaults)
        assert setup.m[1, 1] == pytest.approx(np.conj(setup.m[0, 0]))
        assert setup.m[3, 3] == pytest.approx(np.conj(setup.m[2, 2]))
        assert setup.m[0, 2] == pytest.approx(np.conj(setup.m[1, 3]))

    def test_no_cross_coupling_between_field_sectors(self):
        # without decay interference and with field 2 off, nothing routes a
        # field-2 fluctuation into the field-1 coherences: the transfer
        # generator block-diagonalizes
        p = SystemParams(p1=0, p2=0, a2_mean=0.0, gamma0=0.05, delta1=0.4)
        setup = pipeline(p)
        assert np.max(np.abs(setup.m[:2, 2:])) < 1e-12
        assert np.max(np.abs(setup.m[2:, :2])) < 1e-12
        assert np.max(np.abs(setup.nfield[:2, 2:])) < 1e-12
        assert np.max(np.abs(setup.nfield[2:, :2])) < 1e-12

    def test_inert_medium_passes_both_fields_through(self):
        # with the coupling off the medium is strictly inert for both field
        # sectors: the transfer generator and noise vanish identically and
        # any input covariance is returned unchanged.  (The shared-dipole
        # parameterization cannot switch off the 3-branch couplings alone, so
        # field 2 always retains a spontaneous-Raman pathway whenever the
        # upper levels are populated; exact pass-through needs the medium
        # fully dark or decoupled.)
        p = SystemParams(g=0.0, gamma0=0.2)
        setup = pipeline(p)
        assert np.max(np.abs(setup.m)) < 1e-14
        assert np.max(np.abs(setup.nfield)) < 1e-14
        cin = input_covariance("thermal", nbar=0.7)
        res = propagate_covariance(setup, cin)
        assert np.max(np.abs(res.covariance.c - cin.c)) < 1e-14


class TestInputCovariance:
    def test_vacuum(self):
        c = input_covariance("vacuum").c
        expected = np.zeros((4, 4))
        expected[0, 1] = expected[2, 3] = 1.0
        assert np.array_equal(c, expected)

    def test_coherent_equals_vacuum(self):
        assert np.array_equal(input_covariance("coherent").c,
                              input_covariance("vacuum").c)

    def test_thermal(self):
        c = input_covariance("thermal", nbar=2.0).c
        assert c[1, 0] == 2.0 and c[3, 2] == 2.0
        assert c[0, 1] == 3.0 and c[2, 3] == 3.0

    def test_negative_occupation_rejected(self):
        with pytest.raises(ValueError):
            input_covariance("thermal", nbar=-0.5)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            input_covariance("squeezed")


class TestPropagation:
    def test_zero_length_identity(self, defaults):
        setup = pipeline(defaults)
        setup = PropagationSetup(chi1=setup.chi1, chi2=setup.chi2, m=setup.m,
                                 m_minus=setup.m_minus, nfield=setup.nfield,
                                 cell_length=0.0, slabs=setup.slabs)
        res = propagate_covariance(setup, input_covariance())
        assert np.array_equal(res.covariance.c, input_covariance().c)

    def test_trivial_generator_identity(self):
        setup = PropagationSetup(chi1=0, chi2=0, m=np.zeros((4, 4)),
                                 m_minus=np.zeros((4, 4)),
                                 nfield=np.zeros((4, 4)), cell_length=0.06)
        cin = input_covariance("thermal", nbar=1.0)
        res = propagate_covariance(setup, cin)
        assert np.array_equal(res.covariance.c, cin.c)

    def test_slab_convergence_at_reference_point(self, defaults):
        setup200 = pipeline(defaults, slabs=200)
        setup400 = pipeline(defaults, slabs=400)
        v200 = duan_v12(propagate_covariance(setup200, input_covariance(),
                                             convergence_check=False).covariance)
        v400 = duan_v12(propagate_covariance(setup400, input_covariance(),
                                             convergence_check=False).covariance)
        assert abs(v200.v12 - v400.v12) < 1e-4

    def test_convergence_metadata(self, defaults):
        res = propagate_covariance(pipeline(defaults), input_covariance())
        assert res.converged
        assert res.doubling_change < 1e-6
        assert res.warnings == ()

    def test_insufficient_slabs_flagged(self, defaults):
        setup = pipeline(defaults, slabs=1)
        # amplify the generator so one slab is visibly under-resolved
        boost = 2e6
        strong = PropagationSetup(chi1=setup.chi1, chi2=setup.chi2,
                                  m=setup.m * boost,
                                  m_minus=setup.m_minus * boost,
                                  nfield=setup.nfield, cell_length=0.06,
                                  slabs=1)
        res = propagate_covariance(strong, input_covariance())
        assert not res.converged
        assert res.warnings

    def test_commutator_preserved_at_defaults(self, defaults):
        res = propagate_covariance(pipeline(defaults), input_covariance())
        c1, c2 = res.covariance.commutator_blocks()
        assert c1 == pytest.approx(1.0, abs=1e-6)
        assert c2 == pytest.approx(1.0, abs=1e-6)

    def test_commutator_preserved_random(self, rng):
        for _ in range(8):
            p = random_params(rng, with_fields=True)
            res = propagate_covariance(pipeline(p), input_covariance())
            c1, c2 = res.covariance.commutator_blocks()
            assert abs(c1 - 1.0) < 1e-6
            assert abs(c2 - 1.0) < 1e-6

    def test_hermitian_pairing_of_output(self, rng):
        for _ in range(5):
            p = random_params(rng, with_fields=True)
            res = propagate_covariance(pipeline(p), input_covariance())
            assert res.covariance.pairing_residual() < 1e-8

    def test_finite_sideband_smoke(self, defaults):
        setup = pipeline(defaults, omega=0.5)
        res = propagate_covariance(setup, input_covariance(omega=0.5))
        assert np.all(np.isfinite(res.covariance.c))
        assert res.covariance.pairing_residual() < 1e-8

    def test_invalid_slab_count(self, defaults):
        with pytest.raises(ValueError):
            pipeline(defaults, slabs=0)
