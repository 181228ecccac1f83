"""
Compression-wave paths whose L2 energy, and hence geodesic length,
goes to zero with the mollification width.
"""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.diffeo import Diffeo
from src.grid import Field, Grid
from src.metrics import H1, InertiaSpec
from src.vanish import (BumpDisplacement, PathSample, ResolutionError, StartStopWave, WaveSpec, basic_wave,
                        basic_wave_path, bump_kernel, linear_path, linear_row, mollified_ramp, path_energy,
                        path_length, path_measures, start_stop_wave, support_grid, vanish_row, vanishing_demo)


eps_strategy = st.sampled_from([0.3, 0.2, 0.15, 0.1, 0.05])


@pytest.fixture(scope="module")
def target():
    return BumpDisplacement(0.4, 1.0)


class TestMollifiedRamp:

    @given(eps=st.floats(min_value=0.01, max_value=0.3), spacing=st.floats(min_value=1e-3, max_value=1e-2))
    @settings(max_examples=30, deadline=None)
    def test_kernel_is_a_probability(self, eps, spacing):
        weights = bump_kernel(eps, spacing)
        assert np.sum(weights) == pytest.approx(1.0, abs=1e-12)
        assert np.all(weights >= 0.0)
        assert np.allclose(weights, weights[::-1])

    @given(eps=eps_strategy)
    @settings(max_examples=5, deadline=None)
    def test_ramp_shape(self, eps):
        profile = mollified_ramp(eps)
        assert profile(-eps - 0.05)[()] == pytest.approx(0.0, abs=1e-12)
        assert profile(1.0 + eps + 0.05)[()] == pytest.approx(1.0, abs=1e-12)
        assert profile(0.5)[()] == pytest.approx(0.5, abs=1e-9)
        assert profile.derivative(0.5)[()] == pytest.approx(1.0, abs=1e-9)
        assert np.all(profile.slope >= 0.0)
        assert profile.max_slope <= 1.0 + 1e-12
        assert np.all(np.diff(profile.values) >= -1e-15)

    def test_support(self):
        assert mollified_ramp(0.1).support == pytest.approx((-0.1, 1.1))

    def test_width_range(self):
        with pytest.raises(ValueError):
            mollified_ramp(0.5)
        with pytest.raises(ValueError):
            mollified_ramp(0.0)

    def test_resolution_floor(self):
        with pytest.raises(ResolutionError):
            mollified_ramp(0.1, resolution=100)


class TestPathSample:

    def test_needs_three_samples(self):
        grid = Grid(16)
        with pytest.raises(ResolutionError):
            PathSample([0.0, 1.0], lambda t: Diffeo.identity(grid))

    def test_times_must_be_uniform(self):
        grid = Grid(16)
        with pytest.raises(ValueError):
            PathSample([0.0, 0.1, 0.5], lambda t: Diffeo.identity(grid))

    def test_maps_are_cached(self):
        grid = Grid(16)
        calls = []

        def map_at(t):
            calls.append(t)
            return Diffeo.identity(grid)

        path = PathSample(np.linspace(0.0, 1.0, 5), map_at)
        path[1]
        path[1]
        path[-1]
        assert calls == [0.25, 1.0]
        assert len(path.maps) == 5
        assert path.step == pytest.approx(0.25)

    def test_linear_path_energy(self):
        grid = Grid(128)
        target = Field(grid, 0.5 * np.sin(grid.nodes))
        path = linear_path(target, samples=33)
        # the velocity is 0.5 sin throughout, and the cos-weighted part integrates out
        assert path_energy(path) == pytest.approx(np.pi / 4.0, rel=1e-10)
        assert path_length(path) == pytest.approx(np.sqrt(np.pi) / 2.0, rel=1e-10)

    def test_constant_path_has_zero_energy(self):
        grid = Grid(32)
        path = PathSample(np.linspace(0.0, 1.0, 9), lambda t: Diffeo(Field(grid, 0.2 * np.sin(grid.nodes))))
        energy, length = path_measures(path)
        assert energy == pytest.approx(0.0, abs=1e-20)
        assert length == pytest.approx(0.0, abs=1e-9)

    def test_higher_sobolev_energy_is_refused(self):
        grid = Grid(32)
        path = linear_path(Field(grid, 0.1 * np.sin(grid.nodes)), samples=5)
        with pytest.raises(ValueError):
            path_energy(path, H1)


class TestBasicWaveProperties:

    def test_wave_defaults(self):
        spec = WaveSpec(0.1)
        assert spec.lam == pytest.approx(0.9)
        assert spec.energy_bound() == pytest.approx(0.3 / 0.9)
        assert spec.grid.n == spec.resolution
        assert spec.grid.n % 2 == 0

    def test_box_must_hold_the_wave(self):
        with pytest.raises(ValueError):
            WaveSpec(0.1, box=1.0)

    def test_wave_is_orientation_preserving(self):
        spec = WaveSpec(0.05)
        for t in (0.0, 0.3, 0.7, 1.0):
            assert basic_wave(spec, t).min_jacobian > 0.04

    @given(eps=st.sampled_from([0.2, 0.1, 0.05]))
    @settings(max_examples=3, deadline=None)
    def test_energy_bound(self, eps):
        spec = WaveSpec(eps)
        path = basic_wave_path(spec)
        energy, length = path_measures(path)
        assert 0.0 < energy <= 1.02 * spec.energy_bound()
        assert length ** 2 <= energy * path.duration + 1e-12

    def test_energy_shrinks_with_eps(self):
        energies = [path_energy(basic_wave_path(WaveSpec(eps))) for eps in (0.2, 0.1, 0.05)]
        assert energies[0] > energies[1] > energies[2]

    def test_stretching_metric_energy_grows_as_eps_shrinks(self):
        stretching = InertiaSpec.ga(1.0)
        coarse = path_energy(basic_wave_path(WaveSpec(0.2)), stretching)
        fine = path_energy(basic_wave_path(WaveSpec(0.1)), stretching)
        assert fine > coarse
        assert coarse > path_energy(basic_wave_path(WaveSpec(0.2)))


class TestBumpDisplacement:

    def test_shape(self, target):
        x = np.array([-2.0, -1.0, 0.0, 1.0, 3.0])
        assert np.allclose(target(x), [0.0, 0.0, 0.4, 0.0, 0.0])
        assert target.peak == 0.4
        assert target.support == (-1.0, 1.0)

    def test_derivative_matches_differences(self, target):
        x = np.linspace(-0.9, 0.9, 37)
        h = 1e-6
        numeric = (target(x + h) - target(x - h)) / (2.0 * h)
        assert np.allclose(target.derivative(x), numeric, atol=1e-7)

    def test_steep_bump_is_refused(self):
        with pytest.raises(ValueError):
            BumpDisplacement(0.5, 1.0)
        assert np.min(BumpDisplacement(0.4, 1.0).derivative(np.linspace(-1.0, 1.0, 2001))) > -0.9

    def test_bad_parameters(self):
        with pytest.raises(ValueError):
            BumpDisplacement(-0.1)
        with pytest.raises(ValueError):
            BumpDisplacement(0.5, width=0.0)

    def test_support_grid_covers_the_bump(self, target):
        grid = support_grid(target, 0.1)
        assert grid.origin == pytest.approx(-2.0)
        assert grid.length == pytest.approx(4.0)


class TestStartStopWave:

    def test_starts_at_identity(self, target):
        wave = StartStopWave(0.2, target)
        assert wave.at(wave.t_start).disp.sup() < 1e-10

    def test_stays_orientation_preserving(self, target):
        wave = StartStopWave(0.2, target)
        for t in np.linspace(wave.t_start, wave.t_end, 9):
            assert wave.at(t).min_jacobian > 0.0

    def test_module_level_helper(self, target):
        wave = StartStopWave(0.2, target)
        t = 0.5 * (wave.t_start + wave.t_end)
        assert np.array_equal(start_stop_wave(0.2, target, t).disp.values, wave.at(t).disp.values)

    def test_row(self, target):
        row = vanish_row(target, 0.2)
        assert row["endpoint_error"] < 1e-3
        assert row["length"] ** 2 <= row["energy"] * row["duration"] + 1e-12
        assert row["length_bound"] == pytest.approx(np.sqrt(row["energy"] * row["duration"]))

    def test_zero_target_costs_nothing(self):
        row = vanish_row(BumpDisplacement(0.0), 0.2)
        assert row["energy"] == pytest.approx(0.0, abs=1e-20)
        assert row["endpoint_error"] < 1e-12

    def test_lengths_vanish(self, target):
        rows = vanishing_demo(target, [0.1, 0.2, 0.05])
        assert [row["eps"] for row in rows] == [0.2, 0.1, 0.05]
        bounds = [row["length_bound"] for row in rows]
        assert bounds[0] > bounds[1] > bounds[2]
        assert max(row["endpoint_error"] for row in rows) < 1e-3
        assert linear_row(target, 0.05)["length"] > 0.0

    def test_energy_is_of_order_eps(self, target):
        energies = [row["energy"] for row in vanishing_demo(target, [0.2, 0.1, 0.05])]
        ratios = [finer / coarser for coarser, finer in zip(energies, energies[1:])]
        assert all(0.3 <= ratio <= 0.7 for ratio in ratios), ratios
