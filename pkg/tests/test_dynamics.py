"""Tests for the exact evolution paths and the reduced state."""

import numpy as np
import pytest

from oqslab import linalg
from oqslab.dynamics import (
    DensityMatrix,
    rho_full,
    rho_full_index_sum,
    rho_reduced,
    sweep,
    two_level_spectrum,
    uniform_grid,
    validate_grid,
)
from oqslab.linalg import NumericalCheckError
from oqslab.model import InitialState, total_hamiltonian
from oqslab.sampling import random_density, random_state, random_system
from oqslab.spinboson import SpinBosonParams, build_model, uniform_product_start


def product_start(dim_a, dim_e, rng):
    return InitialState.product(random_state(rng, dim_a), random_state(rng, dim_e))


class TestRhoFull:
    def test_time_zero_is_initial_projector(self):
        rng = np.random.default_rng(0)
        sys = random_system(rng, 2, 2)
        init = product_start(2, 2, rng)
        psi = init.amplitude_vector()
        out = rho_full(sys, init, 0.0)
        np.testing.assert_allclose(out.mat, np.outer(psi, psi.conj()), atol=1e-14)

    def test_uncoupled_product_stays_product(self):
        rng = np.random.default_rng(1)
        sys = random_system(rng, 2, 3, coupling=0.0)
        init = product_start(2, 3, rng)
        for t in (0.4, 1.7, 3.0):
            reduced = rho_reduced(sys, init, t)
            assert reduced.purity() == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("dim_a,dim_e,t", [(2, 2, 0.7), (2, 3, 1.3), (3, 2, 2.1)])
    def test_index_sum_matches_matrix_product(self, dim_a, dim_e, t):
        rng = np.random.default_rng(2)
        sys = random_system(rng, dim_a, dim_e)
        init = product_start(dim_a, dim_e, rng)
        a = rho_full(sys, init, t).mat
        b = rho_full_index_sum(sys, init, t).mat
        assert np.max(np.abs(a - b)) <= 1e-12

    def test_index_sum_matches_explicit_loops(self):
        # quadruple loop written straight from the double-sum definition
        rng = np.random.default_rng(3)
        sys = random_system(rng, 2, 2)
        init = product_start(2, 2, rng)
        t = 0.45
        h = total_hamiltonian(sys)
        u = linalg.matexp_hermitian_generator(h, t)
        ub = linalg.matexp_hermitian_generator(h, -t)
        amp = init.amplitude_vector()
        n = amp.size
        expected = np.zeros((n, n), dtype=complex)
        for jn in range(n):
            for kn in range(n):
                acc = 0.0 + 0.0j
                for p in range(n):
                    for q in range(n):
                        acc += amp[p] * amp[q].conjugate() * u[jn, p] * ub[q, kn]
                expected[jn, kn] = acc
        out = rho_full_index_sum(sys, init, t).mat
        assert np.max(np.abs(out - expected)) <= 1e-13

    def test_purity_one_at_all_times(self):
        rng = np.random.default_rng(4)
        sys = random_system(rng, 2, 3)
        init = product_start(2, 3, rng)
        for t in (0.0, 0.9, 2.5):
            assert rho_full(sys, init, t).purity() == pytest.approx(1.0, abs=1e-10)

    def test_env_weighted_kind_rejected(self):
        rng = np.random.default_rng(5)
        sys = random_system(rng, 2, 2)
        init = InitialState.env_weighted(np.array([1.0, 0.0]), np.eye(2) / 2)
        with pytest.raises(ValueError, match="pure"):
            rho_full(sys, init, 0.5)

    def test_amplitude_shape_mismatch_rejected(self):
        rng = np.random.default_rng(5)
        sys = random_system(rng, 2, 2)
        init = product_start(2, 3, rng)
        with pytest.raises(ValueError, match="model dims"):
            rho_full(sys, init, 0.5)


class TestRhoReduced:
    def test_product_start_reduces_to_system_projector(self):
        rng = np.random.default_rng(6)
        sys = random_system(rng, 3, 2)
        c = random_state(rng, 3)
        init = InitialState.basis_env(c, 0, 2)
        out = rho_reduced(sys, init, 0.0)
        np.testing.assert_allclose(out.mat, np.outer(c, c.conj()), atol=1e-14)

    def test_dim_e_one_is_rotated_projector(self):
        # single environment state: the reduced evolution is unitary, so
        # rho_A(t) equals the projector on the rotated system vector
        rng = np.random.default_rng(7)
        sys = random_system(rng, 3, 1)
        c = random_state(rng, 3)
        init = InitialState.basis_env(c, 0, 1)
        t = 1.3
        u_eff = linalg.matexp_hermitian_generator(total_hamiltonian(sys), t)
        v = u_eff @ c
        out = rho_reduced(sys, init, t)
        np.testing.assert_allclose(out.mat, np.outer(v, v.conj()), atol=1e-12)
        assert out.purity() == pytest.approx(1.0, abs=1e-12)

    def test_spin_boson_populations_constant(self):
        # the coupling commutes with every spin population, so the diagonal
        # of the reduced state never moves
        sys = build_model(SpinBosonParams(omega=1.0, beta=1.0, eta=0.5, j=0.5, nmax=4))
        init = uniform_product_start(sys.dim_a, sys.dim_e)
        for state in sweep(sys, init, uniform_grid(5.0, 50)):
            np.testing.assert_allclose(np.diag(state.mat).real, [0.5, 0.5], atol=1e-10)

    def test_trace_one(self):
        rng = np.random.default_rng(8)
        sys = random_system(rng, 2, 3)
        init = product_start(2, 3, rng)
        out = rho_reduced(sys, init, 1.1)
        assert np.trace(out.mat).real == pytest.approx(1.0, abs=1e-12)


class TestDensityMatrixInvariants:
    def test_rejects_non_unit_trace(self):
        with pytest.raises(NumericalCheckError, match="trace"):
            DensityMatrix(np.eye(2), 2)

    def test_rejects_negative_eigenvalue(self):
        with pytest.raises(NumericalCheckError, match="spectrum"):
            DensityMatrix(np.diag([1.5, -0.5]), 2)

    def test_rejects_non_hermitian(self):
        m = np.array([[0.5, 0.3], [0.0, 0.5]])
        with pytest.raises(NumericalCheckError, match="Hermitian"):
            DensityMatrix(m, 2)


class TestTwoLevelSpectrum:
    def test_pure_projector(self):
        out = two_level_spectrum(np.diag([1.0, 0.0]))
        assert out.sigma11 == pytest.approx(0.0, abs=1e-14)
        assert out.sigma22 == pytest.approx(1.0, abs=1e-14)

    def test_maximally_mixed(self):
        out = two_level_spectrum(np.eye(2) / 2)
        assert out.sigma11 == pytest.approx(0.5, abs=1e-14)
        assert out.sigma22 == pytest.approx(0.5, abs=1e-14)
        assert out.delta == pytest.approx(0.0, abs=1e-14)

    def test_matches_eigensolver_on_random_states(self):
        rng = np.random.default_rng(9)
        for _ in range(1000):
            rho = random_density(rng, 2)
            out = two_level_spectrum(rho)
            w = np.linalg.eigvalsh(rho)
            assert abs(out.sigma11 - w[0]) <= 1e-10
            assert abs(out.sigma22 - w[1]) <= 1e-10

    def test_sigma_sum_is_trace(self):
        rng = np.random.default_rng(10)
        rho = random_density(rng, 2)
        out = two_level_spectrum(rho)
        assert out.sigma11 + out.sigma22 == pytest.approx(
            float(np.trace(rho).real), abs=1e-10
        )

    def test_rejects_wrong_shape(self):
        with pytest.raises(ValueError, match="2x2"):
            two_level_spectrum(np.eye(3) / 3)

    def test_rejects_genuinely_negative_discriminant(self):
        # non-Hermitian input can push the discriminant negative
        m = np.array([[0.5, 0.5], [-0.5, 0.5]], dtype=complex)
        with pytest.raises(ValueError, match="discriminant"):
            two_level_spectrum(m)


class TestSweepAndGrid:
    def test_single_point_grid(self):
        rng = np.random.default_rng(11)
        sys = random_system(rng, 2, 2)
        init = product_start(2, 2, rng)
        states = sweep(sys, init, np.array([0.0]))
        assert len(states) == 1
        np.testing.assert_allclose(
            states[0].mat, rho_reduced(sys, init, 0.0).mat, atol=1e-14
        )

    def test_traces_stay_one_on_spin_boson_grid(self):
        sys = build_model(SpinBosonParams(omega=1.0, beta=1.0, eta=0.5, j=0.5, nmax=3))
        init = uniform_product_start(sys.dim_a, sys.dim_e)
        for state in sweep(sys, init, uniform_grid(5.0, 100)):
            assert abs(np.trace(state.mat).real - 1.0) <= 1e-10

    def test_grid_validation(self):
        with pytest.raises(ValueError, match="nonempty"):
            validate_grid(np.array([]))
        with pytest.raises(ValueError, match="start at 0"):
            validate_grid(np.array([0.5, 1.0]))
        with pytest.raises(ValueError, match="increasing"):
            validate_grid(np.array([0.0, 1.0, 1.0]))
        with pytest.raises(ValueError, match="positive"):
            uniform_grid(-1.0)
        with pytest.raises(ValueError, match="at least 2"):
            uniform_grid(1.0, steps=1)
