import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import brentq

from seqbell import bell
from seqbell.errors import ProductStateError
from seqbell.linalg import PAULIS, PSI_0, basis_state, haar_random_state, schmidt_decompose, schmidt_state

THETA_GRID = np.arange(0.0, np.pi, 1e-6)
SIN_GRID, COS_GRID = np.sin(THETA_GRID), np.cos(THETA_GRID)

etas = st.floats(1e-3, np.pi / 2 - 1e-3)
mus = st.floats(0, np.pi / 2)


def grid_max(eta, mu):
    values = SIN_GRID + np.sin(2 * eta) * COS_GRID
    i = int(np.argmax(values))
    return 2 * np.cos(2 * mu) * values[i], THETA_GRID[i]


class TestChshInPlane:
    def test_tsirelson_point(self):
        assert bell.chsh_in_plane(np.pi / 4, 0, np.pi / 4) == pytest.approx(2 * np.sqrt(2), abs=1e-14)

    def test_table_first_step(self):
        assert bell.chsh_in_plane(np.pi / 4, np.pi / 9, np.arctan(1)) == pytest.approx(2.1667, abs=5e-5)

    def test_noninteractive(self):
        assert bell.chsh_in_plane(np.pi / 4, np.pi / 4, 0.3) == pytest.approx(0, abs=1e-15)

    @settings(max_examples=100, deadline=None)
    @given(etas, mus, st.floats(0, np.pi))
    def test_correlator_assembly(self, eta, mu, theta_b):
        direct = bell.chsh_from_correlators(schmidt_state(eta), mu, theta_b)
        assert direct == pytest.approx(bell.chsh_in_plane(eta, mu, theta_b), abs=1e-12)


class TestOptimalBobAngle:
    def test_maximal(self):
        assert bell.optimal_bob_angle(np.pi / 4) == pytest.approx(np.pi / 4, abs=1e-15)

    def test_pi_8_grid_oracle(self):
        _, best = grid_max(np.pi / 8, 0.0)
        assert bell.optimal_bob_angle(np.pi / 8) == pytest.approx(best, abs=1e-6)
        assert bell.optimal_bob_angle(np.pi / 8) == pytest.approx(0.9553, abs=5e-5)

    def test_limit(self):
        assert bell.optimal_bob_angle(1e-12) == pytest.approx(np.pi / 2, abs=1e-9)

    @pytest.mark.parametrize("eta", [0.0, np.pi / 2])
    def test_product_state_error(self, eta):
        with pytest.raises(ProductStateError):
            bell.optimal_bob_angle(eta)


class TestChshOptimal:
    def test_maximal(self):
        assert bell.chsh_optimal(np.pi / 4, 0) == pytest.approx(np.sqrt(8), abs=1e-14)

    def test_table_first_step(self):
        assert bell.chsh_optimal(np.pi / 4, np.pi / 9) == pytest.approx(2.1667, abs=5e-5)

    def test_table_third_step_from_negativity(self):
        eta = np.arcsin(2 * 0.0966) / 2
        assert bell.chsh_optimal(eta, np.pi / 40) == pytest.approx(2.0119, abs=5e-4)

    @settings(max_examples=200)
    @given(etas, mus)
    def test_matches_in_plane_at_optimum(self, eta, mu):
        at_opt = bell.chsh_in_plane(eta, mu, bell.optimal_bob_angle(eta))
        assert bell.chsh_optimal(eta, mu) == pytest.approx(at_opt, abs=1e-12)
        assert bell.chsh_optimal(eta, mu) == pytest.approx(bell.chsh_optimal_literal(eta, mu), abs=1e-12)

    @settings(max_examples=200)
    @given(etas, mus)
    def test_excess(self, eta, mu):
        assert bell.chsh_excess(eta, mu) == pytest.approx(bell.chsh_optimal(eta, mu) - 2, abs=1e-12)

    def test_excess_keeps_relative_precision(self):
        eta = 1e-40
        mu = 0.5 * bell.noise_bound(eta)
        # 2(2 eta^2 - 2 mu^2) to leading order, with mu ~ eta / 2
        assert bell.chsh_excess(eta, mu) == pytest.approx(4 * eta**2 - 4 * mu**2, rel=1e-9)


class TestNoiseBound:
    def test_maximal(self):
        assert bell.noise_bound(np.pi / 4) == pytest.approx(np.pi / 8, abs=1e-15)

    def test_limit(self):
        assert 0 < bell.noise_bound(1e-9) < 1e-8

    def test_pi_8_root_finding_oracle(self):
        root = brentq(lambda mu: bell.chsh_optimal_literal(np.pi / 8, mu) - 2, 0, np.pi / 4, xtol=1e-15)
        assert bell.noise_bound(np.pi / 8) == pytest.approx(root, abs=1e-12)
        assert bell.noise_bound(np.pi / 8) == pytest.approx(0.30774, abs=5e-6)

    @settings(max_examples=200)
    @given(st.floats(1e-3, np.pi / 2 - 1e-3))
    def test_matches_arccos_form(self, eta):
        assert bell.noise_bound(eta) == pytest.approx(bell.noise_bound_literal(eta), abs=1e-12)
        assert bell.noise_bound(eta) > 0

    @pytest.mark.parametrize("eta", [0.0, np.pi / 2, -0.1])
    def test_product_state_error(self, eta):
        with pytest.raises(ProductStateError):
            bell.noise_bound(eta)


def t_matrix_oracle(psi):
    rho = np.outer(psi, psi.conj())
    t = np.empty((3, 3))
    for i, a in enumerate(PAULIS):
        for j, b in enumerate(PAULIS):
            t[i, j] = np.einsum("ij,ji->", rho, np.kron(a, b)).real
    ev = np.linalg.eigvals(t.T @ t).real
    ev.sort()
    return 2 * np.sqrt(ev[-1] + ev[-2])


class TestHorodecki:
    def test_maximal(self):
        assert bell.horodecki_smax(PSI_0) == pytest.approx(2 * np.sqrt(2), abs=1e-14)

    def test_product(self):
        assert bell.horodecki_smax(basis_state("00")) == pytest.approx(2, abs=1e-14)

    def test_table_negativity_state(self):
        eta = np.arcsin(0.6428) / 2
        psi = schmidt_state(eta)
        assert bell.horodecki_smax(psi) == pytest.approx(t_matrix_oracle(psi), abs=1e-12)
        assert bell.horodecki_smax(psi) == pytest.approx(2.3776, abs=5e-5)

    def test_random_states(self, random_states):
        for psi in random_states:
            theta = schmidt_decompose(psi).theta
            assert bell.horodecki_smax(psi) == pytest.approx(t_matrix_oracle(psi), abs=1e-10)
            assert bell.horodecki_smax(psi) == pytest.approx(bell.horodecki_smax_schmidt(theta), abs=1e-10)

    @settings(max_examples=200)
    @given(etas, mus)
    def test_dominates_noisy_value(self, eta, mu):
        # 4(1 + sin^2 2eta) = 6 - 2cos 4eta, so the two coincide at mu = 0
        psi = schmidt_state(eta)
        assert bell.horodecki_smax(psi) >= bell.chsh_optimal(eta, mu) - 1e-12
        assert bell.horodecki_smax(psi) == pytest.approx(bell.chsh_optimal(eta, 0.0), abs=1e-10)

    @settings(max_examples=200)
    @given(st.floats(0, np.pi / 4))
    def test_excess(self, theta):
        assert bell.horodecki_excess(theta) == pytest.approx(bell.horodecki_smax_schmidt(theta) - 2, abs=1e-12)


class TestNegativity:
    def test_maximal(self):
        assert bell.negativity(PSI_0) == pytest.approx(0.5, abs=1e-15)

    def test_product(self):
        assert bell.negativity(basis_state("01")) == pytest.approx(0, abs=1e-15)

    def test_pi_9(self):
        assert bell.negativity(schmidt_state(np.pi / 9)) == pytest.approx(np.sin(2 * np.pi / 9) / 2, abs=1e-14)
        assert bell.negativity(schmidt_state(np.pi / 9)) == pytest.approx(0.3214, abs=5e-5)

    def test_random_states(self, rng):
        for _ in range(200):
            psi = haar_random_state(rng)
            theta = schmidt_decompose(psi).theta
            assert bell.negativity(psi) == pytest.approx(np.sin(2 * theta) / 2, abs=1e-10)


def test_closed_form_matches_grid(rng):
    for _ in range(50):
        eta = rng.uniform(1e-3, np.pi / 2 - 1e-3)
        mu = rng.uniform(0, np.pi / 4)
        best, _ = grid_max(eta, mu)
        assert best == pytest.approx(bell.chsh_optimal(eta, mu), abs=1e-5)
