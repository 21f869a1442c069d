"""Config file parsing, validation messages, round-trips."""

import pytest

from otfs_sense.config import (
    ConfigError,
    ExperimentSpec,
    SystemConfig,
    TargetSpec,
    dump_config,
    load_config,
    loads_config,
)


class TestDefaults:
    def test_empty_system_section_gives_benchmark_defaults(self, tmp_path):
        p = tmp_path / "c.cfg"
        p.write_text("[system]\n")
        system, targets, experiment = load_config(str(p))
        assert system.fc == 5.89e9
        assert system.B == 1e7
        assert (system.M, system.N) == (25, 40)
        assert system.sigma_d2 == 1.0
        assert system.N_iter == 5

    def test_derived_quantities(self):
        cfg = SystemConfig()
        assert cfg.Ts == 1e-7
        assert cfg.delta_f == 4e5
        assert cfg.delta_f * cfg.T == pytest.approx(1.0)
        assert cfg.Mbar == 90
        assert cfg.Ntilde == 10
        assert cfg.eps_eff == pytest.approx(1 / 90)


class TestValidation:
    def test_mtilde_q_conflict_names_both_keys(self, tmp_path):
        p = tmp_path / "c.cfg"
        p.write_text("[system]\nmtilde = 40\nq = 40\n")
        with pytest.raises(ConfigError) as err:
            load_config(str(p))
        assert "mtilde" in str(err.value) and "q" in str(err.value)

    def test_unknown_key_named(self):
        with pytest.raises(ConfigError) as err:
            loads_config("[system]\nbandwidth = 1e7\n")
        assert "bandwidth" in str(err.value)

    def test_unknown_section(self):
        with pytest.raises(ConfigError):
            loads_config("[radar]\nq = 10\n")

    def test_eps_domain(self):
        with pytest.raises(ConfigError):
            loads_config("[system]\neps = 1.5\n")

    def test_bad_scenario(self):
        with pytest.raises(ConfigError):
            loads_config("[experiment]\nscenario = explode\n")

    def test_fixed_targets_need_per_target_lists(self):
        with pytest.raises(ConfigError):
            loads_config("[system]\np = 2\n[targets]\nmode = fixed\nrange_m = 30\nvelocity_kmh = 80,90\n")


class TestParsing:
    def test_range_syntax(self):
        _, _, exp = loads_config("[experiment]\nsnr_db = -10:2:10\n")
        assert exp.snr_db == tuple(float(v) for v in range(-10, 11, 2))

    def test_comma_lists(self):
        _, _, exp = loads_config("[experiment]\nmtilde_list = 100, 200,500\n")
        assert exp.mtilde_list == (100, 200, 500)

    def test_target_section(self):
        _, tgt, _ = loads_config(
            "[system]\np = 4\nq = 50\nmtilde = 500\nm = 400\nn = 100\n"
            "[targets]\nmode = random\ngain_model = swerling\nnu_max_hz = 4630\n"
        )
        assert tgt.mode == "random"
        assert tgt.gain_model == "swerling"
        assert tgt.nu_max_hz == 4630.0


class TestRoundTrip:
    def test_dump_then_load_identical(self):
        system = SystemConfig(M=400, N=100, B=12e6, fc=5e9, Mtilde=500, Q=50, P=4)
        targets = TargetSpec(
            mode="random", gain_model="swerling", sigma_p2=(1.0, 0.5, 0.5, 1.0),
            nu_max_hz=4630.0,
        )
        experiment = ExperimentSpec(scenario="sweep_mtilde_mse", trials=7, seed=99)
        text = dump_config(system, targets, experiment)
        s2, t2, e2 = loads_config(text)
        assert s2 == system
        assert t2 == targets
        assert e2 == experiment
