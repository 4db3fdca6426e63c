import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from ddsqueeze import (
    ControlParams,
    QuadratureError,
    SpinSystem,
    averaged_hamiltonian,
    build_collective_operators,
    build_dr,
    build_oat,
    build_tat,
    conjugated_jx_squared,
    control_hamiltonian,
    control_propagator,
    dd_residual,
    system_hamiltonian,
    winding_residuals,
)
from ddsqueeze import hamiltonians as hmod


def params(n_x=2, n_y=1, chi=1.0, t_c=0.5):
    return ControlParams(chi=chi, n_x=n_x, n_y=n_y, t_c=t_c)


class TestControlParams:
    @pytest.mark.parametrize("nx,ny", [(0, 1), (1, 0), (2, 2), (-3, -3)])
    def test_rejects_bad_windings(self, nx, ny):
        with pytest.raises(ValueError):
            ControlParams(chi=1.0, n_x=nx, n_y=ny, t_c=1.0)

    def test_rejects_nonpositive_period(self):
        with pytest.raises(ValueError):
            ControlParams(chi=1.0, n_x=2, n_y=1, t_c=0.0)

    @pytest.mark.parametrize("t_c", [0.3, 1.0, 0.02455])
    def test_omega_period_product(self, t_c):
        p = params(t_c=t_c)
        assert abs(p.omega * p.t_c - 2 * math.pi) < 1e-15 * 2 * math.pi

    def test_double_resonance_flag(self):
        assert params(2, 1).is_double_resonance
        assert params(4, 2).is_double_resonance
        assert not params(3, 1).is_double_resonance
        assert not params(-2, 1).is_double_resonance


class TestBuilders:
    def test_oat_single_spin_is_quarter_identity(self):
        assert_allclose(build_oat(SpinSystem(1), 1.0), np.eye(2) / 4, atol=1e-15)

    def test_oat_two_spin_spectrum(self):
        eigs = np.linalg.eigvalsh(build_oat(SpinSystem(2), 1.0))
        assert_allclose(sorted(eigs), [0.0, 1.0, 1.0], atol=1e-12)

    def test_oat_zero_strength(self):
        assert np.abs(build_oat(SpinSystem(4), 0.0)).max() == 0.0

    def test_tat_single_spin_vanishes(self):
        assert np.abs(build_tat(SpinSystem(1), 1.0)).max() < 1e-15

    def test_tat_exactly_hermitian(self):
        h = build_tat(SpinSystem(9), 0.7)
        assert np.abs(h - h.conj().T).max() == 0.0

    def test_tat_matches_product_oracle(self):
        jx, jy, _ = build_collective_operators(SpinSystem(4))
        assert_allclose(build_tat(SpinSystem(4), 1.0), jx @ jy + jy @ jx, atol=1e-13)

    def test_dr_is_quarter_oat_plus_quarter_tat(self):
        sys = SpinSystem(6)
        combined = build_oat(sys, 0.25) + build_tat(sys, 0.25)
        assert_allclose(build_dr(sys, 1.0), combined, atol=1e-12)

    def test_dr_single_spin(self):
        assert_allclose(build_dr(SpinSystem(1), 1.0), np.eye(2) / 16, atol=1e-15)

    def test_dr_spectrum_against_independent_eigensolver(self):
        jx, jy, _ = build_collective_operators(SpinSystem(10))
        raw = 0.25 * (jx @ jx + jx @ jy + jy @ jx)
        assert_allclose(
            np.linalg.eigvalsh(build_dr(SpinSystem(10), 1.0)),
            scipy.linalg.eigvalsh(raw),
            atol=1e-12,
        )


class TestControlPropagator:
    def test_identity_at_zero(self):
        u = control_propagator(params(), SpinSystem(6), 0.0)
        assert_allclose(u, np.eye(7), atol=1e-12)

    @settings(max_examples=15)
    @given(t=st.floats(-3, 3))
    def test_unitary(self, t):
        u = control_propagator(params(3, 1), SpinSystem(5), t)
        assert np.abs(u @ u.conj().T - np.eye(6)).max() < 1e-12

    @pytest.mark.parametrize("n", [2, 3, 10])
    def test_full_period_returns_to_identity_up_to_parity(self, n):
        p = params(2, 1)
        u = control_propagator(p, SpinSystem(n), p.t_c)
        phase = (-1) ** (n * (p.n_x + p.n_y))
        assert_allclose(u, phase * np.eye(n + 1), atol=1e-11)
        psi = np.zeros(n + 1, dtype=complex)
        psi[0] = 1.0
        assert abs(abs(psi @ u @ psi) - 1.0) < 1e-11

    def test_half_period_against_expm_oracle(self):
        p = params(2, 1, t_c=1.0)
        sys = SpinSystem(2)
        jx, jy, _ = build_collective_operators(sys)
        expected = scipy.linalg.expm(-1j * math.pi * jy) @ scipy.linalg.expm(-2j * math.pi * jx)
        assert_allclose(control_propagator(p, sys, 0.5), expected, atol=1e-12)

    def test_period_composition(self):
        p = params(3, 2, t_c=0.7)
        sys = SpinSystem(4)
        rng = np.random.default_rng(5)
        for t in rng.uniform(0, 2, size=4):
            lhs = control_propagator(p, sys, t + p.t_c)
            rhs = control_propagator(p, sys, t) @ control_propagator(p, sys, p.t_c)
            assert np.abs(lhs - rhs).max() < 1e-11


class TestControlHamiltonian:
    def test_value_at_zero(self):
        p = params(2, 1)
        sys = SpinSystem(4)
        jx, jy, _ = build_collective_operators(sys)
        w = p.omega
        assert_allclose(control_hamiltonian(p, sys, 0.0), w * jy + 2 * w * jx, atol=1e-12)

    def test_value_at_quarter_phase(self):
        p = params(2, 1)
        sys = SpinSystem(4)
        jx, jy, jz = build_collective_operators(sys)
        w = p.omega
        t = p.t_c / 4  # n_y = 1: the x coefficient crosses zero here
        assert_allclose(control_hamiltonian(p, sys, t), w * jy - 2 * w * jz, atol=1e-12)

    @pytest.mark.parametrize("nx,ny", [(2, 1), (3, 1), (5, 3)])
    def test_generates_the_propagator(self, nx, ny):
        # Central finite difference of U_c against i dU/dt = H_c U.
        p = params(nx, ny, t_c=0.8)
        sys = SpinSystem(4)
        eps = 1e-6 * p.t_c
        for t in (0.11, 0.37, 0.62):
            du = (control_propagator(p, sys, t + eps) - control_propagator(p, sys, t - eps)) / (2 * eps)
            h = control_hamiltonian(p, sys, t)
            residual = 1j * du - h @ control_propagator(p, sys, t)
            assert np.linalg.norm(residual) < 1e-5 * np.linalg.norm(h)

    def test_periodicity(self):
        p = params(2, 1, t_c=0.6)
        sys = SpinSystem(5)
        for t in (0.0, 0.13, 0.44):
            a = system_hamiltonian(p, sys, t)
            b = system_hamiltonian(p, sys, t + p.t_c)
            assert np.abs(a - b).max() < 1e-12


class TestSystemHamiltonian:
    def test_difference_is_twisting(self):
        p = params(3, 1, chi=0.8)
        sys = SpinSystem(5)
        oat = build_oat(sys, p.chi)
        for t in (0.0, 0.21, 0.49):
            delta = system_hamiltonian(p, sys, t) - control_hamiltonian(p, sys, t)
            assert_allclose(delta, oat, atol=1e-12)

    def test_value_at_zero(self):
        p = params(2, 1, chi=1.0)
        sys = SpinSystem(2)
        jx, jy, _ = build_collective_operators(sys)
        w = p.omega
        expected = jx @ jx + w * jy + 2 * w * jx
        assert_allclose(system_hamiltonian(p, sys, 0.0), expected, atol=1e-12)


class TestConjugatedTwisting:
    def test_reduces_to_twisting_at_zero(self):
        p = params(2, 1)
        sys = SpinSystem(5)
        jx, _, _ = build_collective_operators(sys)
        assert_allclose(conjugated_jx_squared(p, sys, 0.0), jx @ jx, atol=1e-13)

    @pytest.mark.parametrize("n", [3, 10])
    @pytest.mark.parametrize("nx,ny", [(2, 1), (3, 1)])
    def test_matches_direct_conjugation(self, n, nx, ny):
        p = params(nx, ny, t_c=0.9)
        sys = SpinSystem(n)
        jx, _, _ = build_collective_operators(sys)
        jx2 = jx @ jx
        rng = np.random.default_rng(42)
        for t in rng.uniform(0, 3 * p.t_c, size=50):
            u = control_propagator(p, sys, t)
            direct = u.conj().T @ jx2 @ u
            assert np.linalg.norm(conjugated_jx_squared(p, sys, t) - direct) < 1e-10

    def test_node_of_y_winding(self):
        p = params(3, 1, t_c=0.7)
        sys = SpinSystem(4)
        jx, _, _ = build_collective_operators(sys)
        t = p.t_c / 2  # omega n_y t = pi: sin vanishes, cos^2 = 1
        assert_allclose(conjugated_jx_squared(p, sys, t), jx @ jx, atol=1e-12)


class TestAveragedHamiltonian:
    def test_off_resonance_quarter_twisting(self):
        p = params(3, 1)
        sys = SpinSystem(10)
        h_bar, form = averaged_hamiltonian(p, sys)
        expected = build_oat(sys, p.chi / 4) + form.constant_shift * np.eye(sys.dim)
        assert np.linalg.norm(h_bar - expected) < 1e-8
        assert form.kind == "oat-quarter"

    def test_double_resonance_form(self):
        p = params(2, 1)
        sys = SpinSystem(10)
        h_bar, form = averaged_hamiltonian(p, sys)
        expected = build_dr(sys, p.chi) + form.constant_shift * np.eye(sys.dim)
        assert np.linalg.norm(h_bar - expected) < 1e-8
        assert form.kind == "dr"

    def test_scaled_double_resonance_same_form(self):
        p = params(4, 2)
        sys = SpinSystem(6)
        h_bar, form = averaged_hamiltonian(p, sys)
        expected = build_dr(sys, p.chi) + form.constant_shift * np.eye(sys.dim)
        assert np.linalg.norm(h_bar - expected) < 1e-8
        assert form.kind == "dr"

    def test_constant_shift_value(self):
        p = params(2, 1, chi=0.6)
        sys = SpinSystem(7)
        _, form = averaged_hamiltonian(p, sys)
        j = sys.j
        assert abs(form.constant_shift - 0.6 / 4 * j * (j + 1)) < 1e-14

    def test_output_hermitian(self):
        h_bar, _ = averaged_hamiltonian(params(3, 2), SpinSystem(5))
        assert np.abs(h_bar - h_bar.conj().T).max() < 1e-12

    def test_quadrature_guard_trips_on_aliased_grid(self, monkeypatch):
        monkeypatch.setattr(hmod, "_period_intervals", lambda nx, ny: 12)
        with pytest.raises(QuadratureError):
            averaged_hamiltonian(params(4, 3), SpinSystem(4))


class TestDecouplingResiduals:
    def test_valid_pair_decouples_for_moderate_n(self):
        for n in (4, 12, 20):
            res = dd_residual(params(2, 1), SpinSystem(n))
            assert max(res) < 1e-8

    def test_another_valid_pair(self):
        res = dd_residual(params(5, 3), SpinSystem(6))
        assert max(res) < 1e-8

    def test_equal_windings_fail(self):
        sys = SpinSystem(4)
        ops = build_collective_operators(sys)
        res = winding_residuals(sys, 1, 1)
        assert any(r > 0.1 * np.linalg.norm(j) for r, j in zip(res, ops))

    def test_decoupling_iff_winding_magnitudes_differ(self):
        # The sharp condition: the period average vanishes exactly when
        # |n_x| != |n_y|; counter-rotating equal magnitudes do not decouple.
        sys = SpinSystem(4)
        for nx in range(-3, 4):
            for ny in range(-3, 4):
                if nx == 0 or ny == 0 or nx == ny:
                    continue
                res = winding_residuals(sys, nx, ny)
                if abs(nx) != abs(ny):
                    assert max(res) < 1e-8, (nx, ny)
                else:
                    assert max(res) > 0.1, (nx, ny)

    def test_rejects_zero_windings(self):
        with pytest.raises(ValueError):
            winding_residuals(SpinSystem(2), 0, 1)

    def test_independent_of_period(self):
        sys = SpinSystem(5)
        a = winding_residuals(sys, 3, 1, t_c=1.0)
        b = winding_residuals(sys, 3, 1, t_c=0.017)
        assert_allclose(a, b, atol=1e-10)
