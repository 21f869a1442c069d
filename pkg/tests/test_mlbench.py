"""Matched-metric velocity search benchmark."""

import numpy as np
import pytest

from otfs_sense.channel import Target, apply_channel
from otfs_sense.config import SystemConfig
from otfs_sense.frame import dd_transform, draw_symbols, modulate
from otfs_sense.mlbench import MlSearchConfig, ml_metric, ml_velocity_search

CFG = SystemConfig()


def received_dd(d, targets, sigma_w2, seed):
    s = modulate(d)
    x = apply_channel(s, targets, CFG, sigma_w2, seed)
    return dd_transform(x, CFG.M, CFG.N)


class TestMlMetric:
    def test_truth_maximises(self):
        d = draw_symbols(CFG, 1)
        true = Target(1.0, 2, 873.2)
        y = received_dd(d, [true], 0.0, 0)
        m_true = ml_metric(y, 2, 873.2, d, CFG)
        for nu in (0.0, 500.0, 2000.0, 50_000.0):
            assert ml_metric(y, 2, nu, d, CFG) <= m_true + 1e-12

    def test_half_subcarrier_offset_strictly_below(self):
        d = draw_symbols(CFG, 2)
        true = Target(1.0, 2, 873.2)
        y = received_dd(d, [true], 0.0, 0)
        m_true = ml_metric(y, 2, 873.2, d, CFG)
        m_off = ml_metric(y, 2, 873.2 + CFG.delta_f / 2, d, CFG)
        assert m_off < m_true

    def test_zero_observation(self):
        d = draw_symbols(CFG, 3)
        y = np.zeros((CFG.N, CFG.M), dtype=complex)
        assert ml_metric(y, 2, 100.0, d, CFG) == 0.0

    def test_zero_energy_candidate(self):
        d = np.zeros((CFG.N, CFG.M), dtype=complex)
        with pytest.raises(ValueError):
            ml_metric(np.ones((CFG.N, CFG.M)), 2, 100.0, d, CFG)

    def test_global_phase_invariance_of_argmax(self):
        d = draw_symbols(CFG, 4)
        true = Target(np.exp(1.2j), 2, 873.2)
        y = received_dd(d, [true], 0.0, 0)
        grid = np.linspace(0, 2000, 21)
        m1 = [ml_metric(y, 2, nu, d, CFG) for nu in grid]
        m2 = [ml_metric(y * np.exp(0.7j), 2, nu, d, CFG) for nu in grid]
        assert np.argmax(m1) == np.argmax(m2)


class TestVelocitySearch:
    def test_on_grid_truth_converges(self):
        # truth on a coarse grid point descends through every layer
        d = draw_symbols(CFG, 5)
        nu_true = CFG.delta_f / 4  # a layer-0 grid point
        y = received_dd(d, [Target(1.0, 2, nu_true)], 0.0, 0)
        nu_hat = ml_velocity_search(y, 2, nu_true, d, CFG)
        assert abs(nu_hat - nu_true) <= CFG.delta_f / 4**8

    def test_generic_truth_bounded_by_final_layer(self):
        d = draw_symbols(CFG, 6)
        nu_true = 873.2
        y = received_dd(d, [Target(1.0, 2, nu_true)], 0.0, 0)
        nu_hat = ml_velocity_search(y, 2, nu_true, d, CFG)
        # final-layer spacing is delta_f / 4^8
        assert abs(nu_hat - nu_true) <= CFG.delta_f / 4**8

    def test_low_snr_error_bounded_by_first_layer(self):
        # at -10 dB the search may stop immediately, but the returned point
        # is the truth-nearest grid point, so the error never exceeds the
        # layer-0 spacing
        d = draw_symbols(CFG, 7)
        nu_true = 873.2
        errors = []
        for trial in range(20):
            y = received_dd(d, [Target(1.0, 2, nu_true)], 10.0, trial)
            nu_hat = ml_velocity_search(y, 2, nu_true, d, CFG)
            errors.append(abs(nu_hat - nu_true))
        assert max(errors) <= CFG.delta_f / 4

    def test_stop_on_miss_irrelevant_noise_free(self):
        d = draw_symbols(CFG, 8)
        nu_true = 2345.6
        y = received_dd(d, [Target(1.0, 3, nu_true)], 0.0, 0)
        a = ml_velocity_search(y, 3, nu_true, d, CFG, MlSearchConfig(stop_on_miss=True))
        b = ml_velocity_search(y, 3, nu_true, d, CFG, MlSearchConfig(stop_on_miss=False))
        assert a == b

    def test_monotone_localisation(self):
        # noise-free, every accepted layer's winner stays within one
        # layer-span of the truth; proxy: the final estimate of a run with
        # fewer layers is within that layer's span
        d = draw_symbols(CFG, 9)
        nu_true = 1234.5
        y = received_dd(d, [Target(1.0, 2, nu_true)], 0.0, 0)
        for layers in range(2, 9):
            nu_hat = ml_velocity_search(
                y, 2, nu_true, d, CFG, MlSearchConfig(layers=layers)
            )
            assert abs(nu_hat - nu_true) <= CFG.delta_f / 4**layers + 1e-9

    def test_config_validation(self):
        with pytest.raises(ValueError):
            MlSearchConfig(layers=0).validate()
        with pytest.raises(ValueError):
            MlSearchConfig(shrink=1.0).validate()
