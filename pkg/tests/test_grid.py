"""
Spectral grid property tests: derivatives, quadrature, interpolation and
Fourier multipliers on the periodic grid.
"""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.grid import (Field, Grid, GridMismatchError, MultiplierSpec, apply_multiplier, dealias, deriv, interp,
                      quad, trig_field)


coefficient_strategy = st.lists(st.floats(min_value=-1.0, max_value=1.0, allow_nan=False), min_size=1, max_size=5)


class TestGridConstruction:

    @pytest.mark.parametrize("n", [7, 6, 0, -8, 9])
    def test_rejects_bad_sizes(self, n):
        with pytest.raises(ValueError):
            Grid(n)

    def test_rejects_bad_length(self):
        with pytest.raises(ValueError):
            Grid(16, length=0.0)

    def test_nodes_are_uniform(self):
        grid = Grid(32, length=4.0, origin=-2.0)
        assert grid.nodes[0] == -2.0
        assert np.allclose(np.diff(grid.nodes), grid.dx)
        assert grid.dx == pytest.approx(0.125)

    def test_equal_grids_hash_alike(self):
        assert Grid(16) == Grid(16)
        assert hash(Grid(16)) == hash(Grid(16))
        assert Grid(16) != Grid(32)

    def test_field_rejects_wrong_shape_and_nonfinite(self):
        grid = Grid(16)
        with pytest.raises(ValueError):
            Field(grid, np.zeros(15))
        with pytest.raises(ValueError):
            Field(grid, np.full(16, np.nan))

    def test_fields_on_different_grids_do_not_mix(self):
        with pytest.raises(GridMismatchError):
            Grid(16).zeros() + Grid(32).zeros()


class TestSpectralCalculusProperties:

    @given(cos_coeffs=coefficient_strategy, sin_coeffs=coefficient_strategy)
    @settings(max_examples=30, deadline=None)
    def test_derivative_of_trig_polynomial(self, cos_coeffs, sin_coeffs):
        grid = Grid(64)
        f = trig_field(grid, cos_coeffs, sin_coeffs)
        expected = trig_field(grid,
                              [m * s for m, s in enumerate(sin_coeffs, start=1)],
                              [-m * c for m, c in enumerate(cos_coeffs, start=1)])
        assert (deriv(f) - expected).sup() < 1e-11

    @given(mean=st.floats(min_value=-3.0, max_value=3.0, allow_nan=False), cos_coeffs=coefficient_strategy)
    @settings(max_examples=30, deadline=None)
    def test_quadrature_sees_only_the_mean(self, mean, cos_coeffs):
        grid = Grid(32)
        f = trig_field(grid, cos_coeffs, (), mean)
        assert quad(f) == pytest.approx(2.0 * np.pi * mean, abs=1e-12)

    def test_quadrature_of_cos_squared(self):
        grid = Grid(32)
        assert quad(grid.sample(np.cos) ** 2) == pytest.approx(np.pi, abs=1e-13)

    def test_derivative_order_must_be_positive(self):
        with pytest.raises(ValueError):
            deriv(Grid(16).zeros(), 0)

    @given(points=st.lists(st.floats(min_value=-10.0, max_value=10.0, allow_nan=False), min_size=1, max_size=20))
    @settings(max_examples=30, deadline=None)
    def test_interpolation_is_exact_for_resolved_modes(self, points):
        grid = Grid(32)
        f = trig_field(grid, [0.3, 0.0, -0.2], [1.0, 0.5])
        x = np.array(points)
        exact = 0.3 * np.cos(x) - 0.2 * np.cos(3 * x) + np.sin(x) + 0.5 * np.sin(2 * x)
        assert np.max(np.abs(interp(f, x) - exact)) < 1e-12

    def test_interpolation_at_nodes_returns_values(self):
        grid = Grid(16)
        f = trig_field(grid, [1.0], [0.0, 2.0])
        assert np.allclose(interp(f, grid.nodes), f.values, atol=1e-13)


class TestMultipliers:

    def test_sobolev_multiplier(self):
        grid = Grid(32)
        f = grid.sample(lambda x: np.sin(2 * x))
        smoothed = apply_multiplier(f, MultiplierSpec(lambda xi: 1.0 + xi ** 2, "H1"))
        assert (smoothed - 5.0 * f).sup() < 1e-12

    def test_inverse_undoes_multiplier(self):
        grid = Grid(32)
        m = MultiplierSpec(lambda xi: 1.0 + xi ** 4, "H2")
        f = trig_field(grid, [0.1, 0.2, 0.3], [0.4])
        assert (apply_multiplier(apply_multiplier(f, m), m.inverse()) - f).sup() < 1e-12

    def test_inverse_of_vanishing_symbol_fails(self):
        grid = Grid(16)
        laplacian = MultiplierSpec(lambda xi: xi ** 2, "laplacian")
        with pytest.raises(ValueError):
            apply_multiplier(grid.sample(np.sin), laplacian.inverse())

    def test_dealias_removes_high_modes(self):
        grid = Grid(64)
        low = grid.sample(np.sin)
        high = grid.sample(lambda x: np.cos(30 * x))
        assert (dealias(low + high) - low).sup() < 1e-12

    def test_dealias_fraction_is_checked(self):
        with pytest.raises(ValueError):
            dealias(Grid(16).zeros(), 1.5)
