"""Range-Doppler map, discrete sinc, fractional refinement, multi-target loop.

Off-grid behaviour is checked against an exhaustive zoom search: the 2-D
DFT coefficient magnitude evaluated on a dense 1e5-point grid along one
axis.  The zoom search shares nothing with the iterative refinement path
beyond the residual spectrum itself.
"""

import numpy as np
import pytest

from otfs_sense.config import SystemConfig
from otfs_sense.estimator import (
    Estimate,
    cubic_update,
    dft_interp,
    discrete_sinc,
    estimate_targets,
    model_spectrum,
    peak_pick,
    rd_map,
    rd_map_from,
    refine_axis,
    taylor_c135,
)
from otfs_sense.preproc import PreprocOutput, choose_k

CFG = SystemConfig()  # Mbar 90, Ntilde 10
K = choose_k(CFG.sigma_d2, CFG.eps_eff)


def make_pre(targets, cfg=CFG, k=K, mask=None):
    """Model-matched spectrum for a list of (alpha, l, nu) triples."""
    Xt = sum(model_spectrum(a, l, nu, cfg, k) for a, l, nu in targets)
    if mask is None:
        mask = np.ones(Xt.shape, dtype=bool)
    return PreprocOutput(Xt=Xt * mask, mask=mask, k=k)


def zoom_axis(Xt, axis, anchor, half_width=0.6, points=100_001):
    """Exhaustive fine-grid peak search along one axis at the anchor.

    Evaluates |sum_{n,l} Xt[n,l] conj-basis| on a dense fractional grid by
    direct matrix products; returns the offset of the best grid point.
    """
    nt, mbar = Xt.shape
    l0, n0 = anchor
    if axis == "range":
        grid = l0 + np.linspace(-half_width, half_width, points)
        w_n = np.exp(-2j * np.pi * np.arange(nt) * n0 / nt)
        row = w_n @ Xt  # (mbar,)
        basis = np.exp(2j * np.pi * np.outer(grid, np.arange(mbar)) / mbar)
        vals = np.abs(basis @ row)
        return float(grid[int(np.argmax(vals))] - l0)
    grid = n0 + np.linspace(-half_width, half_width, points)
    w_l = np.exp(2j * np.pi * np.arange(mbar) * l0 / mbar)
    col = Xt @ w_l  # (nt,)
    basis = np.exp(-2j * np.pi * np.outer(grid, np.arange(nt)) / nt)
    vals = np.abs(basis @ col)
    return float(grid[int(np.argmax(vals))] - n0)


def nu_of_bins(n_bins, cfg=CFG):
    return n_bins / (cfg.Ntilde * cfg.Mtilde * cfg.Ts)


class TestDiscreteSinc:
    @pytest.mark.parametrize("x", [4, 64, 350])
    def test_zero_offset(self, x):
        assert discrete_sinc(x, 0.0) == pytest.approx(np.sqrt(x))

    def test_integer_zeros(self):
        for x in (8, 25):
            for k in range(1, x):
                assert abs(discrete_sinc(x, k)) < 1e-9

    def test_against_geometric_series(self):
        # oracle: direct sum of the x-point geometric series
        for x, y in [(64, 0.5), (64, -1.3), (10, 3.21), (350, 0.003)]:
            direct = np.sum(np.exp(2j * np.pi * y * np.arange(x) / x)) / np.sqrt(x)
            assert discrete_sinc(x, y) == pytest.approx(direct, abs=1e-9)

    def test_vectorised(self):
        y = np.array([0.0, 0.5, 1.0])
        vals = discrete_sinc(8, y)
        assert vals.shape == (3,)
        assert vals[0] == pytest.approx(np.sqrt(8))

    def test_periodic_limit(self):
        assert discrete_sinc(6, 12.0) == pytest.approx(np.sqrt(6))


class TestRdMap:
    def test_single_on_grid_peak(self):
        alpha = 0.7 * np.exp(0.3j)
        pre = make_pre([(alpha, 2.0, nu_of_bins(7))])
        map_ = rd_map(pre)
        l0, n0 = peak_pick(map_)
        assert (l0, n0) == (2, 7)
        expected = abs(alpha) * np.sqrt(CFG.Mbar * CFG.Ntilde) / K
        assert abs(map_[2, 7]) == pytest.approx(expected, rel=1e-6)

    def test_all_zero(self):
        pre = PreprocOutput(
            Xt=np.zeros((CFG.Ntilde, CFG.Mbar), dtype=complex),
            mask=np.ones((CFG.Ntilde, CFG.Mbar), dtype=bool),
            k=K,
        )
        assert np.all(rd_map(pre) == 0)

    def test_parseval(self):
        rng = np.random.default_rng(3)
        Xt = rng.standard_normal((10, 90)) + 1j * rng.standard_normal((10, 90))
        map_ = rd_map_from(Xt)
        assert np.isclose(
            np.sum(np.abs(map_) ** 2), np.sum(np.abs(Xt) ** 2), rtol=1e-10
        )

    def test_interp_matches_map_on_integers(self):
        rng = np.random.default_rng(4)
        Xt = rng.standard_normal((10, 90)) + 1j * rng.standard_normal((10, 90))
        map_ = rd_map_from(Xt)
        for l0, n0 in [(0, 0), (5, 3), (89, 9)]:
            assert dft_interp(Xt, l0, n0) == pytest.approx(map_[l0, n0], abs=1e-10)


class TestPeakPick:
    def test_single_entry(self):
        m = np.zeros((8, 6))
        m[5, 3] = 2.0
        assert peak_pick(m) == (5, 3)

    def test_tie_break(self):
        m = np.zeros((8, 6))
        m[2, 2] = 1.0
        m[1, 1] = 1.0
        assert peak_pick(m) == (1, 1)


class TestTaylorCoefficients:
    def test_polynomial_matches_curve(self):
        # quintic polynomial vs exact ratio curve at 0.1
        for x in (350, 64, 10):
            c1, c3, c5 = taylor_c135(x)
            xi = 0.1
            poly = c1 * xi + c3 * xi**3 + c5 * xi**5

            def exact(z, x=x):
                a = abs(discrete_sinc(x, z - 0.25)) ** 2
                b = abs(discrete_sinc(x, z + 0.25)) ** 2
                return (a - b) / (a + b)

            assert abs(poly - exact(xi)) < 1e-5

    def test_curve_is_odd(self):
        for x in (90, 350):
            for xi in (0.05, 0.15, 0.24):
                a_m = abs(discrete_sinc(x, -xi - 0.25)) ** 2
                b_m = abs(discrete_sinc(x, -xi + 0.25)) ** 2
                a_p = abs(discrete_sinc(x, xi - 0.25)) ** 2
                b_p = abs(discrete_sinc(x, xi + 0.25)) ** 2
                f_neg = (a_m - b_m) / (a_m + b_m)
                f_pos = (a_p - b_p) / (a_p + b_p)
                assert abs(f_neg + f_pos) < 1e-12

    @pytest.mark.parametrize("x", [4, 10, 64, 90, 350, 1000])
    def test_slope_positive(self, x):
        c1, _, _ = taylor_c135(x)
        assert c1 > 0


class TestCubicUpdate:
    def test_zero_ratio(self):
        c1, c3, c5 = taylor_c135(350)
        assert cubic_update(0.0, c1, c3, c5) == 0.0

    def test_inverts_forward_curve(self):
        # oracle: bisection on the monotone ratio curve
        x = 350
        c1, c3, c5 = taylor_c135(x)

        def curve(z):
            a = abs(discrete_sinc(x, z - 0.25)) ** 2
            b = abs(discrete_sinc(x, z + 0.25)) ** 2
            return (a - b) / (a + b)

        rho = curve(0.2)
        # bisection oracle recovers 0.2
        lo, hi = 0.0, 0.45
        for _ in range(60):
            mid = (lo + hi) / 2
            if curve(mid) < rho:
                lo = mid
            else:
                hi = mid
        assert abs((lo + hi) / 2 - 0.2) < 1e-12
        assert abs(cubic_update(rho, c1, c3, c5) - 0.2) < 1e-3

    def test_sign_property(self):
        c1, c3, c5 = taylor_c135(90)
        for rho in np.linspace(-0.5, 0.5, 21):
            if rho == 0:
                continue
            assert np.sign(cubic_update(rho, c1, c3, c5)) == np.sign(rho)

    def test_linear_fallback(self):
        assert cubic_update(0.3, 2.0, 0.0, 0.0) == pytest.approx(0.15)


class TestRefineAxis:
    def test_on_grid_returns_zero(self):
        pre = make_pre([(1.0, 5.0, nu_of_bins(3))])
        delta, clamped = refine_axis(pre.Xt, "range", (5, 3), 1)
        assert abs(delta) < 1e-9
        assert not clamped

    @pytest.mark.parametrize("delta_true", [0.3, -0.3, 0.45, -0.45, 0.1])
    def test_fractional_range_vs_zoom(self, delta_true):
        pre = make_pre([(1.0, 40.0 + delta_true, nu_of_bins(3))])
        anchor = peak_pick(rd_map(pre))
        assert anchor == (40, 3)
        delta, _ = refine_axis(pre.Xt, "range", anchor, 5)
        zoom = zoom_axis(pre.Xt, "range", anchor)
        assert abs(delta - zoom) < 1e-3
        assert abs(delta - delta_true) < 1e-2

    @pytest.mark.parametrize("eps_true", [0.3, -0.45, 0.2])
    def test_fractional_doppler_vs_zoom(self, eps_true):
        pre = make_pre([(1.0, 12.0, nu_of_bins(4 + eps_true))])
        anchor = peak_pick(rd_map(pre))
        assert anchor == (12, 4)
        eps_hat, _ = refine_axis(pre.Xt, "doppler", anchor, 5)
        zoom = zoom_axis(pre.Xt, "doppler", anchor)
        assert abs(eps_hat - zoom) < 1e-3
        assert abs(eps_hat - eps_true) < 1e-2

    def test_error_decreases_across_iterations(self):
        # noise-free error after i+1 iterations never exceeds after i
        for delta_true in np.linspace(-0.4, 0.4, 17):
            pre = make_pre([(1.0, 40.0 + delta_true, nu_of_bins(3))])
            errs = []
            for n_iter in (1, 2, 3, 4, 5):
                delta, _ = refine_axis(pre.Xt, "range", (40, 3), n_iter)
                errs.append(abs(delta - delta_true))
            for a, b in zip(errs, errs[1:]):
                assert b <= a + 1e-12

    def test_degenerate_neighbourhood(self):
        Xt = np.zeros((10, 90), dtype=complex)
        with pytest.raises(ValueError):
            refine_axis(Xt, "range", (0, 0), 1)


class TestEstimateTargets:
    def test_single_on_grid_exact(self):
        alpha = 1.4 * np.exp(-0.7j)
        nu = nu_of_bins(3)
        pre = make_pre([(alpha, 6.0, nu)])
        est = estimate_targets(pre, 1, CFG)[0]
        assert abs(est.l_hat - 6.0) < 1e-9
        assert abs(est.nu_hat - nu) / nu < 1e-9
        assert abs(est.alpha_hat - alpha) < 1e-9

    def test_two_targets_exact_cancellation(self):
        nu_a, nu_b = nu_of_bins(3), nu_of_bins(1)
        pre = make_pre([(2.0, 10.0, nu_a), (1.0, 30.0, nu_b)])
        e0 = np.sum(np.abs(pre.Xt) ** 2)
        est = estimate_targets(pre, 2, CFG)
        assert abs(est[0].alpha_hat) > abs(est[1].alpha_hat)  # amplitude order
        resid = pre.Xt.copy()
        for e in est:
            resid -= model_spectrum(e.alpha_hat, e.l_hat, e.nu_hat, CFG, K)
        assert np.sum(np.abs(resid) ** 2) / e0 < 1e-8

    def test_negative_doppler_unwrap(self):
        nu = nu_of_bins(-2.6)
        pre = make_pre([(1.0, 4.0, nu)])
        est = estimate_targets(pre, 1, CFG)[0]
        assert est.nu_hat < 0
        assert abs(est.nu_hat - nu) < 1e-6 * abs(nu)

    def test_fractional_both_axes(self):
        nu = nu_of_bins(2.35)
        pre = make_pre([(0.9, 17.6, nu)])
        est = estimate_targets(pre, 1, CFG)[0]
        assert abs(est.l_hat - 17.6) < 1e-6
        assert abs(est.nu_hat - nu) < 1e-6 * abs(nu)

    def test_mask_respected(self):
        # zeroed bins in the model input; estimator must stay near-exact and
        # the subtraction must not resurrect masked bins
        rng = np.random.default_rng(8)
        mask = rng.uniform(size=(CFG.Ntilde, CFG.Mbar)) > 0.02
        nu = nu_of_bins(3)
        pre = make_pre([(1.0, 6.0, nu)], mask=mask)
        est = estimate_targets(pre, 1, CFG)[0]
        assert abs(est.l_hat - 6.0) < 0.05
        assert abs(est.nu_hat - nu) / nu < 0.05

    def test_p_bounds(self):
        pre = make_pre([(1.0, 6.0, nu_of_bins(3))])
        with pytest.raises(ValueError):
            estimate_targets(pre, 0, CFG)

    def test_physical_units(self):
        nu = nu_of_bins(2)
        pre = make_pre([(1.0, 2.0, nu)])
        est = estimate_targets(pre, 1, CFG)[0]
        assert est.r_hat == pytest.approx(2.0 * CFG.Ts * 299792458.0 / 2.0, rel=1e-9)
        assert est.v_hat == pytest.approx(nu * CFG.wavelength / 2.0, rel=1e-9)


class TestZoomOracleAgreement:
    def test_joint_fractional_agreement(self):
        # final refined coordinates vs the exhaustive zoom on each axis,
        # within 1e-3 bin when the other axis sits at its integer anchor
        cases = [(25.3, 2.35), (40.45, -0.3), (70.0 + 0.499, 4.499)]
        for l_true, n_true in cases:
            pre = make_pre([(1.0, l_true, nu_of_bins(n_true))])
            anchor = peak_pick(rd_map(pre))
            d_ref, _ = refine_axis(pre.Xt, "range", anchor, 5)
            e_ref, _ = refine_axis(pre.Xt, "doppler", anchor, 5)
            d_zoom = zoom_axis(pre.Xt, "range", anchor)
            e_zoom = zoom_axis(pre.Xt, "doppler", anchor)
            assert abs(d_ref - d_zoom) < 1e-3
            assert abs(e_ref - e_zoom) < 1e-3
