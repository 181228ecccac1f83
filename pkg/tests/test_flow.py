"""
Geodesic flows: Burgers, Camassa-Holm and KdV conservation, shock
detection and agreement with characteristics.
"""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.flow import (GeodesicIntegrator, GeodesicState, characteristics, kinetic_energy, momentum, rhs, shock_time,
                      solve, step)
from src.grid import Field, Grid
from src.metrics import H0, H1, H2, InertiaSpec


class TestRightHandSide:

    def test_zero_is_a_fixed_point(self, grid64):
        for spec in (H0, H1, InertiaSpec.ga(0.5)):
            assert rhs(spec, grid64.zeros(), a=1.0).sup() == 0.0

    def test_burgers_rhs(self, grid64):
        u = Field(grid64, np.sin(grid64.nodes))
        # u_t = -3 u u_x
        expected = -3.0 * np.sin(grid64.nodes) * np.cos(grid64.nodes)
        assert np.allclose(rhs(H0, u).values, expected, atol=1e-12)

    def test_kdv_dispersion_on_a_single_mode(self, grid64):
        u = Field(grid64, 1e-3 * np.sin(grid64.nodes))
        # for tiny u the flow is u_t = -a u_xxx
        linear = 2.0 * 1e-3 * np.cos(grid64.nodes)
        assert np.max(np.abs(rhs(H0, u, a=2.0).values - linear)) < 1e-5

    def test_kinetic_energy(self, sine64):
        assert kinetic_energy(H0, sine64) == pytest.approx(0.01 * np.pi, rel=1e-12)
        assert kinetic_energy(H1, sine64, a=0.5) == pytest.approx(0.02 * np.pi + 0.25, rel=1e-12)


class TestSolve:

    def test_horizon_must_be_whole_steps(self, sine64):
        with pytest.raises(ValueError):
            solve(H0, sine64, T=1.0, dt=0.3)

    def test_store_every(self, sine64):
        traj = solve(H0, sine64, T=0.1, dt=0.01, store_every=2)
        assert len(traj) == 6
        assert traj.dt == pytest.approx(0.02)
        assert traj.final.t == pytest.approx(0.1)

    def test_integrator_tag(self, burgers_trajectory, kdv_trajectory):
        assert burgers_trajectory.integrator == "rk4"
        assert kdv_trajectory.integrator == "if-rk4"

    def test_non_positive_step_is_rejected(self, grid64):
        with pytest.raises(ValueError):
            GeodesicIntegrator(H0, grid64, 0.0, 0.0)

    def test_single_step_matches_integrator(self, sine64):
        state = GeodesicState.initial(sine64)
        one = step(H0, state, 0.01)
        assert one.t == pytest.approx(0.01)
        assert (one.u - solve(H0, sine64, T=0.01, dt=0.01).final.u).sup() == 0.0

    def test_full_horizon(self, burgers_trajectory, kdv_trajectory, camassa_holm_trajectory):
        for traj in (burgers_trajectory, kdv_trajectory, camassa_holm_trajectory):
            assert not traj.truncated
            assert traj.exit_reason == "completed"


class TestConservationProperties:

    def test_momentum_is_transported(self, burgers_trajectory, kdv_trajectory, camassa_holm_trajectory):
        for traj in (burgers_trajectory, kdv_trajectory, camassa_holm_trajectory):
            assert traj.momentum_drift() < 1e-5

    def test_energy_is_conserved(self, burgers_trajectory, kdv_trajectory, camassa_holm_trajectory):
        for traj in (burgers_trajectory, kdv_trajectory, camassa_holm_trajectory):
            assert traj.energy_drift() < 1e-6

    @given(amp=st.floats(min_value=0.01, max_value=0.1), k=st.integers(min_value=1, max_value=2),
           index=st.integers(min_value=0, max_value=3), a=st.sampled_from([0.0, 0.5]))
    @settings(max_examples=10, deadline=None)
    def test_conservation_for_each_metric(self, amp, k, index, a):
        spec = (H0, H1, H2, InertiaSpec.ga(1.0))[index]
        grid = Grid(64)
        traj = solve(spec, Field(grid, amp * np.cos(k * grid.nodes)), a=a, T=0.2, dt=1e-2)
        assert not traj.truncated
        assert traj.momentum_drift() < 1e-5
        assert traj.energy_drift() < 1e-6

    def test_initial_momentum_is_the_inertia(self, sine64):
        m = momentum(H1, GeodesicState.initial(sine64, a=0.0))
        assert (m.x - 2.0 * sine64).sup() < 1e-12


class TestShocks:

    def test_shock_time_estimate(self, grid64):
        assert shock_time(Field(grid64, 0.5 * np.sin(grid64.nodes))) == pytest.approx(2.0 / 3.0, rel=1e-12)
        assert shock_time(grid64.zeros()) == float("inf")

    def test_burgers_breaks_before_the_horizon(self, grid64):
        traj = solve(H0, Field(grid64, np.sin(grid64.nodes)), T=1.0, dt=1e-2)
        assert traj.truncated
        assert traj.exit_reason.startswith("shock at t")
        assert traj.shock.t <= 0.5
        assert traj.final.t < 0.5

    def test_characteristics_refuse_crossed_lines(self, grid64):
        with pytest.raises(ValueError):
            characteristics(Field(grid64, np.sin(grid64.nodes)), 0.4, grid64.nodes)

    def test_burgers_matches_characteristics(self, burgers_trajectory, sine64):
        exact = characteristics(sine64, 0.5, sine64.grid.nodes)
        assert np.max(np.abs(burgers_trajectory.final.u.values - exact)) < 1e-6

    def test_characteristics_at_time_zero(self, sine64):
        x = np.array([0.2, 2.0])
        assert np.allclose(characteristics(sine64, 0.0, x), 0.1 * np.sin(x), atol=1e-13)
