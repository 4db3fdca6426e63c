import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from ddsqueeze import (
    BoundaryMinimumWarning,
    DegenerateMeanSpinError,
    SpinSystem,
    TrajectoryMoments,
    build_collective_operators,
    build_dr,
    build_oat,
    find_min_squeezing,
    hermitian_exponential_action,
    propagate_static,
    spin_down_state,
    squeezing_arrays,
    squeezing_series,
    xi_r_squared,
    xi_s_squared,
)
from ddsqueeze.dynamics import SpinMoments, moments_from_states
from oracles import brute_force_min_perp_variance


def moments_of(psi, n_spins):
    ops = build_collective_operators(SpinSystem(n_spins))
    mean, second = moments_from_states(ops, psi[:, None])
    return SpinMoments(mean=mean[0], second=second[0])


def rotated_css(n_spins, axis, angle):
    sys = SpinSystem(n_spins)
    ops = build_collective_operators(sys)
    generator = sum(a * op for a, op in zip(axis, ops))
    return hermitian_exponential_action(generator, angle, spin_down_state(sys))


def dr_state(n_spins, t):
    sys = SpinSystem(n_spins)
    return hermitian_exponential_action(build_dr(sys, 1.0), t, spin_down_state(sys))


class TestPointMeasures:
    def test_coherent_state_is_unsqueezed(self):
        m = moments_of(spin_down_state(SpinSystem(12)), 12)
        assert abs(xi_s_squared(m, 12) - 1.0) < 1e-12
        assert abs(xi_r_squared(m, 12) - 1.0) < 1e-12

    @settings(max_examples=20)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_any_rotated_coherent_state_is_unsqueezed(self, seed):
        rng = np.random.default_rng(seed)
        axis = rng.standard_normal(3)
        axis /= np.linalg.norm(axis)
        psi = rotated_css(9, axis, rng.uniform(0, np.pi))
        m = moments_of(psi, 9)
        assert abs(xi_s_squared(m, 9) - 1.0) < 1e-9

    def test_optimally_twisted_value_n10(self):
        m = moments_of(dr_state(10, 0.491), 10)
        assert abs(xi_s_squared(m, 10) - 0.15) < 0.01

    def test_matches_brute_force_angle_scan(self):
        for t in (0.1, 0.3, 0.491, 0.7):
            m = moments_of(dr_state(10, t), 10)
            lam = brute_force_min_perp_variance(m.mean, m.second)
            assert abs(xi_s_squared(m, 10) - 4 * lam / 10) < 1e-9

    @settings(max_examples=20)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_frame_rotation_invariance(self, seed):
        m = moments_of(dr_state(8, 0.35), 8)
        r = Rotation.random(rng=np.random.default_rng(seed)).as_matrix()
        rotated = SpinMoments(mean=r @ m.mean, second=r @ m.second @ r.T)
        assert abs(xi_s_squared(rotated, 8) - xi_s_squared(m, 8)) < 1e-10

    def test_ratio_measure_uses_mean_spin_length(self):
        m = moments_of(dr_state(10, 0.25), 10)
        mlen = np.linalg.norm(m.mean)
        expected = xi_s_squared(m, 10) * (5.0 / mlen) ** 2
        assert abs(xi_r_squared(m, 10) - expected) < 1e-12

    @settings(max_examples=15)
    @given(t=st.floats(0.01, 1.2))
    def test_ratio_never_below_planar(self, t):
        m = moments_of(dr_state(7, t), 7)
        assert xi_r_squared(m, 7) >= xi_s_squared(m, 7) >= 0.0

    def test_degenerate_mean_raises(self):
        m = SpinMoments(mean=np.zeros(3), second=np.diag([2.0, 2.0, 2.0]))
        with pytest.raises(DegenerateMeanSpinError):
            xi_s_squared(m, 4)
        with pytest.raises(DegenerateMeanSpinError):
            xi_r_squared(m, 4)

    def test_threshold_scales_with_total_spin(self):
        tiny = 1e-11  # above 1e-9*J only for small enough J
        m = SpinMoments(mean=np.array([0.0, 0.0, tiny]), second=np.diag([1.0, 1.0, 1.0]))
        with pytest.raises(DegenerateMeanSpinError):
            xi_s_squared(m, 10)


class TestSeries:
    def test_series_samples_carry_all_fields(self):
        sys = SpinSystem(6)
        tm = propagate_static(build_oat(sys, 1.0), spin_down_state(sys), np.linspace(0, 0.6, 31))
        samples = squeezing_series(tm)
        assert len(samples) == 31
        assert samples[0].xi_s_sq == pytest.approx(1.0, abs=1e-12)
        assert samples[0].mean_spin_len == pytest.approx(3.0, abs=1e-12)
        assert all(s.xi_r_sq is None or s.xi_r_sq >= s.xi_s_sq for s in samples)

    def test_vectorized_matches_pointwise(self):
        sys = SpinSystem(8)
        tm = propagate_static(build_dr(sys, 1.0), spin_down_state(sys), np.linspace(0, 0.8, 17))
        xi_s, xi_r, _ = squeezing_arrays(tm.mean, tm.second, 8)
        for i in range(17):
            assert xi_s[i] == pytest.approx(xi_s_squared(tm.moment(i), 8), abs=1e-13)
            assert xi_r[i] == pytest.approx(xi_r_squared(tm.moment(i), 8), abs=1e-13)


class TestMinimumSearch:
    def test_locates_optimum_n10(self):
        sys = SpinSystem(10)
        times = np.arange(0, 1.0 + 1e-12, 1e-3)
        tm = propagate_static(build_dr(sys, 1.0), spin_down_state(sys), times)
        t_min, xi_min = find_min_squeezing(tm)
        assert abs(t_min - 0.491) < 0.005
        assert abs(xi_min - 0.15) < 0.01

    def test_locates_optimum_n100(self):
        sys = SpinSystem(100)
        times = np.arange(0, 0.14 + 1e-12, 2e-4)
        tm = propagate_static(build_dr(sys, 1.0), spin_down_state(sys), times)
        t_min, xi_min = find_min_squeezing(tm)
        assert abs(t_min - 0.0909) < 0.001

    def test_interpolation_refines_between_grid_points(self):
        sys = SpinSystem(10)
        coarse = np.arange(0, 1.0 + 1e-12, 5e-3)
        tm = propagate_static(build_dr(sys, 1.0), spin_down_state(sys), coarse)
        t_min, _ = find_min_squeezing(tm)
        assert abs(t_min - 0.4913) < 2e-3
        assert not np.any(np.isclose(coarse, t_min, atol=1e-12))

    def test_constant_series_warns_boundary(self):
        sys = SpinSystem(5)
        tm = propagate_static(np.zeros((6, 6), dtype=complex), spin_down_state(sys), np.linspace(0, 1, 9))
        with pytest.warns(BoundaryMinimumWarning):
            t_min, xi_min = find_min_squeezing(tm)
        assert xi_min == pytest.approx(1.0, abs=1e-12)

    def test_needs_three_samples(self):
        tm = TrajectoryMoments(
            times=np.array([0.0, 0.1]),
            mean=np.tile([0.0, 0.0, -2.0], (2, 1)),
            second=np.tile(np.eye(3), (2, 1, 1)),
            n_spins=4,
        )
        with pytest.raises(ValueError):
            find_min_squeezing(tm)
