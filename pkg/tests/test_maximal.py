"""Maximal averages, parabolic sharp function, and the sup-ratio bound."""

import numpy as np
import pytest

import paleyscope as ps


def _indicator_field(n=1024, L=20.0):
    grid = ps.SpaceGrid(d=1, n=n, L=L)
    x = grid.x_axis()
    values = ((x >= 0) & (x <= 1)).astype(complex)[None]
    return grid, ps.Field(grid=grid, values=values)


class TestSpaceMaximal:
    def test_indicator_oracle(self):
        # the 205-point window centered at x = 1.9921875 holds the 52
        # unit samples at indices 512..563; wider or narrower windows
        # only lower the average, so the sup is exactly 52/205
        grid, f = _indicator_field()
        out = ps.maximal_space(f)
        idx = int(np.argmin(np.abs(grid.x_axis() - 2.0)))
        assert idx == 614
        assert out.values[0, idx].real == pytest.approx(52.0 / 205.0, abs=1e-15)
        # the continuous-limit value at x = 2 is 1/4
        assert abs(out.values[0, idx].real - 0.25) < 5e-3

    def test_dominates_the_field(self):
        grid, f = _indicator_field(n=128)
        out = ps.maximal_space(f)
        assert np.all(out.values.real >= np.abs(f.values) - 1e-15)

    def test_constant_is_fixed_point(self):
        grid = ps.SpaceGrid(d=1, n=64, L=20.0)
        f = ps.Field(grid=grid, values=np.full((2, 64), 3.0, dtype=complex))
        out = ps.maximal_space(f)
        np.testing.assert_allclose(out.values.real, 3.0, atol=1e-14)

    def test_requires_real_values(self):
        grid = ps.SpaceGrid(d=1, n=64, L=20.0)
        f = ps.Field(grid=grid, values=1j * np.ones((1, 64)))
        with pytest.raises(ValueError):
            ps.maximal_space(f)

    def test_planar_window_matches_direct_average(self):
        rng = np.random.default_rng(12)
        grid = ps.SpaceGrid(d=2, n=16, L=16.0)
        v = np.abs(rng.standard_normal((1, 16, 16)))
        out = ps.maximal_space(
            ps.Field(grid=grid, values=v + 0j), radii_cells=[2])
        # direct wrap-around disc average, radius 2 cells
        offsets = [(a, b) for a in range(-2, 3) for b in range(-2, 3)
                   if a * a + b * b <= 4]
        direct = np.zeros((16, 16))
        for i in range(16):
            for j in range(16):
                acc = [v[0, (i + a) % 16, (j + b) % 16] for a, b in offsets]
                direct[i, j] = np.mean(acc)
        np.testing.assert_allclose(out.values[0].real, direct, atol=1e-12)


class TestTimeMaximal:
    def test_zero_extension_oracle(self):
        # ones on the first 51 of 101 slices; at the last slice the best
        # window holds all 51 against a full normalizer of 201
        grid = ps.SpaceGrid(d=1, n=8, L=20.0)
        vals = np.zeros((101, 1, 8), dtype=complex)
        vals[:51] = 1.0
        f = ps.SpaceTimeField(grid=grid, t0=0.0, dt=0.02, values=vals)
        out = ps.maximal_time(f)
        assert out.values[100, 0, 0].real == pytest.approx(51.0 / 201.0)

    def test_interior_point_sees_everything(self):
        grid = ps.SpaceGrid(d=1, n=8, L=20.0)
        vals = np.ones((11, 1, 8), dtype=complex)
        f = ps.SpaceTimeField(grid=grid, t0=0.0, dt=0.1, values=vals)
        out = ps.maximal_time(f)
        # the radius-0 window alone already gives the constant
        np.testing.assert_allclose(out.values.real, 1.0, atol=1e-14)


class TestSharpFunction:
    def test_constant_has_no_oscillation(self):
        grid = ps.SpaceGrid(d=1, n=32, L=20.0)
        g = ps.SquareField(grid=grid, t0=0.0, dt=0.1,
                           values=np.full((16, 32), 2.0))
        out = ps.sharp_function(g, 0.5)
        np.testing.assert_allclose(out.values, 0.0, atol=1e-13)

    def test_step_oscillates_near_the_jump(self):
        grid = ps.SpaceGrid(d=1, n=64, L=20.0)
        vals = np.zeros((32, 64))
        vals[:, :32] = 1.0
        g = ps.SquareField(grid=grid, t0=0.0, dt=0.05, values=vals)
        out = ps.sharp_function(g, 0.5)
        assert np.max(out.values) > 0.1
        assert np.all(out.values >= 0.0)

    def test_mean_deviation_below_quadratic_oscillation(self):
        rng = np.random.default_rng(13)
        grid = ps.SpaceGrid(d=1, n=32, L=20.0)
        vals = np.abs(rng.standard_normal((16, 32)))
        g = ps.SquareField(grid=grid, t0=0.0, dt=0.05, values=vals)
        l1 = ps.sharp_function(g, 0.5, metric="l1")
        l2 = ps.sharp_function(g, 0.5, metric="l2")
        assert np.all(l1.values <= l2.values + 1e-12)

    def test_cylinder_metadata(self):
        cyl = ps.ParabolicCylinder(s=1.0, y=(0.0,), R=0.25, delta0=0.5)
        lo, hi = cyl.time_interval
        assert (lo, hi) == (0.75, 1.25)
        assert cyl.space_radius == pytest.approx(0.5)


class TestSupRatio:
    def test_zero_field_gives_zero(self, heat):
        grid = ps.SpaceGrid(d=1, n=32, L=20.0)
        f = ps.SpaceTimeField(grid=grid, t0=0.0, dt=0.05,
                              values=np.zeros((16, 1, 32), complex))
        assert ps.verify_sharp_bound(heat, 1.0, f) == 0.0

    def test_finite_on_corpus_entry(self, heat):
        grid = ps.SpaceGrid(d=1, n=64, L=20.0)
        f = ps.corpus_entry(grid, 32, 0)
        val = ps.verify_sharp_bound(heat, 1.0, f)
        assert np.isfinite(val) and val > 0.0

    def test_anisotropy_defaults_to_inverse_order(self, levy):
        grid = ps.SpaceGrid(d=1, n=64, L=20.0)
        f = ps.corpus_entry(grid, 32, 0)
        a = ps.verify_sharp_bound(levy, 0.25, f)
        b = ps.verify_sharp_bound(levy, 0.25, f, delta0=1.0 / levy.order)
        assert a == b


class TestOscillationNormRatio:
    def test_degenerate_input_raises(self):
        grid = ps.SpaceGrid(d=1, n=32, L=20.0)
        g = ps.SquareField(grid=grid, t0=0.0, dt=0.1,
                           values=np.ones((8, 32)))
        with pytest.raises(ps.DegenerateFieldError):
            ps.fefferman_stein_check(g, 4.0, 0.5)

    def test_ratio_is_order_one_for_smooth_data(self, heat):
        grid = ps.SpaceGrid(d=1, n=64, L=20.0)
        f = ps.corpus_entry(grid, 32, 0)
        g = ps.square_function(heat, 1.0, f)
        ratio = ps.fefferman_stein_check(g, 4.0, 0.5)
        assert 0.0 < ratio < 50.0

    def test_p_must_exceed_one(self):
        grid = ps.SpaceGrid(d=1, n=32, L=20.0)
        g = ps.SquareField(grid=grid, t0=0.0, dt=0.1,
                           values=np.linspace(0, 1, 8 * 32).reshape(8, 32))
        with pytest.raises(ValueError):
            ps.fefferman_stein_check(g, 1.0, 0.5)
