"""Square function, space-time norms, the elliptic ratio, and rescaling."""

import numpy as np
import pytest

import paleyscope as ps


@pytest.fixture()
def grid():
    return ps.SpaceGrid(d=1, n=64, L=20.0)


def _single_mode(grid, nt, t_window, mode=4):
    """Pure frequency mode held constant over the whole window."""
    xi0 = 2 * np.pi * mode / grid.L
    vals = np.exp(1j * xi0 * grid.x_axis())[None, None, :] * np.ones(
        (nt, 1, 1))
    return ps.SpaceTimeField(
        grid=grid, t0=0.0, dt=t_window / (nt - 1), values=vals), xi0


class TestSquareFunction:
    def test_first_slice_is_zero(self, grid, heat):
        f = ps.corpus_entry(grid, 16, 0)
        g = ps.square_function(heat, 1.0, f)
        assert np.all(g.values[0] == 0.0)
        assert np.all(g.values >= 0.0)

    def test_single_mode_matches_closed_form(self, grid, heat):
        # |K*f|(t,s) = |xi0| exp(-xi0^2 (t-s)) uniformly in x, so the
        # squared output is the explicit integral (1 - exp(-2 xi0^2 t))/2.
        f, xi0 = _single_mode(grid, 2048, 1.0)
        g = ps.square_function(heat, 1.0, f)
        t = f.times()
        expected = np.sqrt((1.0 - np.exp(-2 * xi0 ** 2 * t)) / 2.0)
        err = np.max(np.abs(g.values - expected[:, None]))
        assert err < 1e-4  # trapezoid bias at this step size

    def test_channels_add_in_quadrature(self, grid, heat):
        f = ps.corpus_entry(grid, 16, 0)
        doubled = ps.SpaceTimeField(
            grid=grid, t0=f.t0, dt=f.dt,
            values=np.concatenate([f.values, f.values], axis=1))
        g1 = ps.square_function(heat, 1.0, f)
        g2 = ps.square_function(heat, 1.0, doubled)
        np.testing.assert_allclose(
            g2.values, np.sqrt(2.0) * g1.values, rtol=1e-12)

    def test_zero_slices_extend_causally(self, grid, heat):
        f = ps.corpus_entry(grid, 16, 0)
        pad = np.zeros((3,) + f.values.shape[1:], dtype=complex)
        fe = ps.SpaceTimeField(
            grid=grid, t0=f.t0 - 3 * f.dt, dt=f.dt,
            values=np.concatenate([pad, f.values], axis=0))
        ge = ps.square_function(heat, 1.0, fe)
        g = ps.square_function(heat, 1.0, f)
        np.testing.assert_allclose(ge.values[3:], g.values, atol=1e-13)

    def test_frequency_domain_input_rejected(self, grid, heat):
        f = ps.corpus_entry(grid, 16, 0)
        with pytest.raises(ValueError):
            ps.square_function(heat, 1.0, ps.to_frequency(f))

    def test_negative_eta_rejected(self, grid, heat):
        f = ps.corpus_entry(grid, 16, 0)
        with pytest.raises(ValueError):
            ps.square_function(heat, -0.5, f)


class TestNorms:
    def test_hand_value_for_ones(self, grid):
        f = ps.SpaceTimeField(
            grid=grid, t0=0.0, dt=0.5, values=np.ones((3, 1, 64), complex))
        # sum dt h |f|^2 = 3 * 0.5 * 20
        assert ps.lp_space_time_norm(f, 2.0) == pytest.approx(np.sqrt(30.0))
        assert ps.lp_space_time_norm(f, 4.0) == pytest.approx(30.0 ** 0.25)

    def test_channels_enter_through_their_length(self, grid):
        f = ps.SpaceTimeField(
            grid=grid, t0=0.0, dt=0.5, values=np.ones((3, 4, 64), complex))
        # ell_2 over 4 unit channels has length 2
        assert ps.lp_space_time_norm(f, 2.0) == pytest.approx(
            2.0 * np.sqrt(30.0))

    def test_report_fields(self, grid, heat):
        f = ps.corpus_entry(grid, 16, 0)
        rep = ps.lp_ratio(heat, 1.0, f, 2.0)
        assert rep.p == 2.0
        assert (rep.d, rep.n, rep.nt) == (1, 64, 16)
        assert rep.ratio == pytest.approx(rep.norm_G / rep.norm_f)

    def test_zero_input_raises(self, grid, heat):
        f = ps.SpaceTimeField(
            grid=grid, t0=0.0, dt=0.1, values=np.zeros((4, 1, 64), complex))
        with pytest.raises(ps.DegenerateFieldError):
            ps.lp_ratio(heat, 1.0, f, 2.0)


class TestEllipticRatio:
    @pytest.mark.parametrize("gamma", [0.5, 1.0, 2.0])
    def test_p2_ratio_squared_is_half(self, grid, gamma):
        rng = np.random.default_rng(9)
        f = ps.Field(grid=grid, values=(rng.standard_normal((1, 64))
                                        + 1j * rng.standard_normal((1, 64))))
        rep = ps.elliptic_square_function(f, gamma, 2.0)
        assert rep.ratio ** 2 == pytest.approx(0.5, abs=1e-9)

    def test_p4_ratio_is_finite_and_positive(self, grid):
        rng = np.random.default_rng(10)
        f = ps.Field(grid=grid, values=rng.standard_normal((1, 64)) + 0j)
        rep = ps.elliptic_square_function(f, 2.0, 4.0)
        assert 0.0 < rep.ratio < 10.0

    def test_constant_input_raises(self, grid):
        f = ps.Field(grid=grid, values=np.ones((1, 64), complex))
        with pytest.raises(ps.DegenerateFieldError):
            ps.elliptic_square_function(f, 2.0, 2.0)


class TestScalingCheck:
    def test_identity_rescale_is_exact(self, grid, heat):
        f = ps.corpus_entry(grid, 16, 0)
        assert ps.scaling_check(heat, f, 1.0) == 0.0

    @pytest.mark.parametrize("gamma", [1.0, 2.0])
    def test_parabolic_covariance(self, grid, gamma):
        sym = ps.FractionalSymbol(gamma=gamma, a=1.0, nu=0.5)
        f = ps.corpus_entry(grid, 16, 0)
        assert ps.scaling_check(sym, f, 2.0) < 1e-13

    def test_time_dependent_symbol_rejected(self, grid):
        sym = ps.FractionalSymbol(
            gamma=2.0, a=([0.0, 0.5], [1.0, 1.5]), nu=0.5)
        f = ps.corpus_entry(grid, 16, 0)
        with pytest.raises(ValueError):
            ps.scaling_check(sym, f, 2.0)
