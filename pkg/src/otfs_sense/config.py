"""System configuration, target descriptions, and experiment specs.

Config files are flat ``key = value`` text with ``[system]``, ``[targets]``
and ``[experiment]`` sections.  Every key is optional; defaults reproduce the
single-target vehicular benchmark setup (5.89 GHz carrier, 10 MHz bandwidth,
25 x 40 grid).  Unknown keys are rejected by name so typos fail loudly.
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, field, fields, replace

SCENARIOS = (
    "sweep_snr",
    "sweep_velocity",
    "sweep_mtilde_power",
    "sweep_mtilde_mse",
    "sweep_snr_multitarget",
    "analyze",
    "crlb",
    "benchmark_ml",
)

KNOWN_CONSTELLATIONS = ("QPSK", "16QAM", "64QAM")


class ConfigError(ValueError):
    """Invalid configuration value or file; message names the offending key."""


@dataclass(frozen=True)
class SystemConfig:
    """Scalar parameters of the OTFS transceiver and the sensing receiver.

    fc, B in Hz; sigma_d2, sigma_w2 are linear powers; Q is the receiver-side
    virtual-CP length and Mtilde the sub-block length, both in samples.
    eps is the zeroing probability of the symbol-division guard; None selects
    the default of one expected zeroed bin per sub-block (1/Mbar).
    """

    fc: float = 5.89e9
    B: float = 1e7
    M: int = 25
    N: int = 40
    sigma_d2: float = 1.0
    sigma_w2: float = 0.1
    Q: int = 10
    Mtilde: int = 100
    eps: float | None = None
    N_iter: int = 5
    P: int = 1
    constellation: str = "64QAM"

    @property
    def Ts(self) -> float:
        return 1.0 / self.B

    @property
    def delta_f(self) -> float:
        return self.B / self.M

    @property
    def T(self) -> float:
        return self.M * self.Ts

    @property
    def MN(self) -> int:
        return self.M * self.N

    @property
    def Mbar(self) -> int:
        return self.Mtilde - self.Q

    @property
    def Ntilde(self) -> int:
        return self.MN // self.Mtilde

    @property
    def eps_eff(self) -> float:
        return self.eps if self.eps is not None else 1.0 / self.Mbar

    @property
    def wavelength(self) -> float:
        from .channel import C_LIGHT

        return C_LIGHT / self.fc

    def validate(self) -> None:
        if self.fc <= 0:
            raise ConfigError("fc must be positive")
        if self.B <= 0:
            raise ConfigError("b must be positive")
        if self.M < 1 or self.N < 1:
            raise ConfigError("m and n must be at least 1")
        if self.sigma_d2 <= 0:
            raise ConfigError("sigma_d2 must be positive")
        if self.sigma_w2 < 0:
            raise ConfigError("sigma_w2 must be non-negative")
        if self.Q < 0:
            raise ConfigError("q must be non-negative")
        if self.Mtilde <= self.Q:
            raise ConfigError("mtilde must exceed q")
        if self.Mbar < 2:
            raise ConfigError("mtilde - q must be at least 2")
        if self.Mtilde > self.MN:
            raise ConfigError("mtilde must not exceed m*n")
        if self.eps is not None and not (0.0 < self.eps < 1.0):
            raise ConfigError("eps must lie in (0, 1)")
        if self.N_iter < 1:
            raise ConfigError("n_iter must be at least 1")
        if self.P < 0:
            raise ConfigError("p must be non-negative")
        if self.constellation not in KNOWN_CONSTELLATIONS:
            raise ConfigError(
                f"constellation must be one of {KNOWN_CONSTELLATIONS}, "
                f"got {self.constellation!r}"
            )

    def with_overrides(self, **kw) -> "SystemConfig":
        cfg = replace(self, **kw)
        cfg.validate()
        return cfg


@dataclass(frozen=True)
class TargetSpec:
    """How the scatterer population is produced for each Monte Carlo trial.

    mode "fixed": point targets at the listed ranges/velocities.  mode
    "random": uniform integer delays on [0, Q-1], uniform Doppler on
    [-nu_max, nu_max].  gain_model "swerling" redraws complex-Gaussian
    gains every trial; "steady" keeps the magnitude at sqrt(sigma_p2) and
    only refreshes the phase (accuracy benchmarks, where gain fades would
    bury the estimation error under outliers).  geometry "per_trial"
    redraws delays/Dopplers each trial; "per_experiment" draws one
    resolvable population (distinct delay bins) from the experiment seed
    and holds it across trials.
    """

    mode: str = "fixed"
    gain_model: str = "steady"
    geometry: str = "per_trial"
    sigma_p2: tuple[float, ...] = (1.0,)
    nu_max_hz: float = 4.63e3
    range_m: tuple[float, ...] = (30.0,)
    velocity_kmh: tuple[float, ...] = (80.0,)

    def count(self, config: SystemConfig) -> int:
        return config.P

    def validate(self, config: SystemConfig) -> None:
        if self.mode not in ("fixed", "random"):
            raise ConfigError("target mode must be 'fixed' or 'random'")
        if self.gain_model not in ("swerling", "steady"):
            raise ConfigError("gain_model must be 'swerling' or 'steady'")
        if self.geometry not in ("per_trial", "per_experiment"):
            raise ConfigError("geometry must be 'per_trial' or 'per_experiment'")
        if any(s <= 0 for s in self.sigma_p2):
            raise ConfigError("sigma_p2 entries must be positive")
        if len(self.sigma_p2) not in (1, config.P):
            raise ConfigError("sigma_p2 must have one entry or one per target (p)")
        if self.mode == "fixed":
            if len(self.range_m) != config.P or len(self.velocity_kmh) != config.P:
                raise ConfigError(
                    "range_m and velocity_kmh must list one value per target (p)"
                )
        else:
            if self.nu_max_hz <= 0:
                raise ConfigError("nu_max_hz must be positive")
            if config.Q < 1 and config.P > 0:
                raise ConfigError("random targets need q >= 1")
            if self.geometry == "per_experiment" and config.P > config.Q:
                raise ConfigError(
                    "per_experiment geometry needs q >= p for distinct delays"
                )

    def sigma_p2_list(self, config: SystemConfig) -> tuple[float, ...]:
        if len(self.sigma_p2) == config.P:
            return self.sigma_p2
        return self.sigma_p2 * config.P


@dataclass(frozen=True)
class ExperimentSpec:
    """A named scenario plus the sweep values and Monte Carlo bookkeeping."""

    scenario: str = "sweep_snr"
    trials: int = 500
    seed: int = 1234
    snr_db: tuple[float, ...] = (-10, -8, -6, -4, -2, 0, 2, 4, 6, 8, 10)
    mtilde_list: tuple[int, ...] = (100, 200, 500, 900, 1300)
    velocity_kmh_list: tuple[float, ...] = (0, 40, 80, 120, 160, 200, 240, 280, 320, 360)

    def validate(self) -> None:
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario must be one of {SCENARIOS}")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")


_SYSTEM_KEYS = {
    "fc": ("fc", float),
    "b": ("B", float),
    "m": ("M", int),
    "n": ("N", int),
    "sigma_d2": ("sigma_d2", float),
    "sigma_w2": ("sigma_w2", float),
    "q": ("Q", int),
    "mtilde": ("Mtilde", int),
    "eps": ("eps", float),
    "n_iter": ("N_iter", int),
    "p": ("P", int),
    "constellation": ("constellation", str),
}

_TARGET_KEYS = {
    "mode": ("mode", str),
    "gain_model": ("gain_model", str),
    "geometry": ("geometry", str),
    "sigma_p2": ("sigma_p2", "float_list"),
    "nu_max_hz": ("nu_max_hz", float),
    "range_m": ("range_m", "float_list"),
    "velocity_kmh": ("velocity_kmh", "float_list"),
}

_EXPERIMENT_KEYS = {
    "scenario": ("scenario", str),
    "trials": ("trials", int),
    "seed": ("seed", int),
    "snr_db": ("snr_db", "float_list"),
    "mtilde_list": ("mtilde_list", "int_list"),
    "velocity_kmh_list": ("velocity_kmh_list", "float_list"),
}


def _parse_list(raw: str, conv) -> tuple:
    """Parse 'a,b,c' or MATLAB-style 'start:step:stop' (inclusive) lists."""
    raw = raw.strip()
    if ":" in raw:
        parts = [p.strip() for p in raw.split(":")]
        if len(parts) != 3:
            raise ValueError("range syntax is start:step:stop")
        start, step, stop = (float(p) for p in parts)
        if step == 0:
            raise ValueError("range step must be non-zero")
        out = []
        v = start
        # tolerance absorbs accumulated float error at the inclusive endpoint
        while (step > 0 and v <= stop + 1e-9 * abs(step)) or (
            step < 0 and v >= stop - 1e-9 * abs(step)
        ):
            out.append(conv(v))
            v += step
        return tuple(out)
    return tuple(conv(float(p)) if conv is not str else p.strip() for p in raw.split(","))


def _apply_section(section, keymap, kwargs: dict, secname: str) -> None:
    for key, raw in section.items():
        if key not in keymap:
            raise ConfigError(f"unknown key '{key}' in section [{secname}]")
        attr, typ = keymap[key]
        try:
            if typ == "float_list":
                kwargs[attr] = _parse_list(raw, float)
            elif typ == "int_list":
                kwargs[attr] = tuple(int(round(v)) for v in _parse_list(raw, float))
            elif typ is str:
                kwargs[attr] = raw.strip()
            else:
                kwargs[attr] = typ(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for '{key}' in [{secname}]: {raw!r}") from exc


def load_config(path: str) -> tuple[SystemConfig, TargetSpec, ExperimentSpec]:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config file {path}: {exc}") from exc
    return parse_config(parser)


def loads_config(text: str) -> tuple[SystemConfig, TargetSpec, ExperimentSpec]:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_file(io.StringIO(text))
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config text: {exc}") from exc
    return parse_config(parser)


def parse_config(parser) -> tuple[SystemConfig, TargetSpec, ExperimentSpec]:
    sys_kw: dict = {}
    tgt_kw: dict = {}
    exp_kw: dict = {}
    for secname in parser.sections():
        if secname == "system":
            _apply_section(parser[secname], _SYSTEM_KEYS, sys_kw, secname)
        elif secname == "targets":
            _apply_section(parser[secname], _TARGET_KEYS, tgt_kw, secname)
        elif secname == "experiment":
            _apply_section(parser[secname], _EXPERIMENT_KEYS, exp_kw, secname)
        else:
            raise ConfigError(f"unknown section [{secname}]")
    system = SystemConfig(**sys_kw)
    system.validate()
    targets = TargetSpec(**tgt_kw)
    targets.validate(system)
    experiment = ExperimentSpec(**exp_kw)
    experiment.validate()
    return system, targets, experiment


def _fmt(value) -> str:
    if isinstance(value, tuple):
        return ",".join(_fmt(v) for v in value)
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def dump_config(
    system: SystemConfig, targets: TargetSpec, experiment: ExperimentSpec
) -> str:
    """Serialise to the same text format load_config reads (round-trips)."""
    lines = ["[system]"]
    for key, (attr, _) in _SYSTEM_KEYS.items():
        value = getattr(system, attr)
        if value is None:
            continue
        lines.append(f"{key} = {_fmt(value)}")
    lines.append("")
    lines.append("[targets]")
    for key, (attr, _) in _TARGET_KEYS.items():
        lines.append(f"{key} = {_fmt(getattr(targets, attr))}")
    lines.append("")
    lines.append("[experiment]")
    for key, (attr, _) in _EXPERIMENT_KEYS.items():
        lines.append(f"{key} = {_fmt(getattr(experiment, attr))}")
    lines.append("")
    return "\n".join(lines)
