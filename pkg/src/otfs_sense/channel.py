"""Multi-target sensing channel: circular delays, Doppler shifts, AWGN.

The monostatic receiver is synchronised with the transmitter, so after CP
removal each point target contributes a complex-scaled, block-circularly
delayed and Doppler-modulated copy of the transmit block.  Delays are whole
samples; sub-sample ranges are rounded at synthesis time (the estimator
still resolves fractional delays from the phase structure).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SystemConfig
from .frame import as_rng

C_LIGHT = 299792458.0


@dataclass(frozen=True)
class Target:
    """One scatterer: complex gain, integer sample delay, Doppler in Hz."""

    alpha: complex
    delay: int
    doppler_hz: float
    sigma_p2: float = 1.0


def draw_targets(config: SystemConfig, sigma_p2, nu_max_hz: float, seed) -> list[Target]:
    """Draw a fluctuating population: CN(0, sigma_p2) gains, uniform integer
    delays on [0, Q-1], uniform Doppler on [-nu_max, nu_max].
    """
    if nu_max_hz <= 0:
        raise ValueError("nu_max_hz must be positive")
    sigma_p2 = np.broadcast_to(np.asarray(sigma_p2, dtype=float), (config.P,))
    if config.P > 0 and config.Q < 1:
        raise ValueError("cannot draw delays with Q = 0")
    rng = as_rng(seed)
    out = []
    for p in range(config.P):
        g = np.sqrt(sigma_p2[p] / 2.0) * (
            rng.standard_normal() + 1j * rng.standard_normal()
        )
        delay = int(rng.integers(0, config.Q))
        nu = float(rng.uniform(-nu_max_hz, nu_max_hz))
        out.append(Target(alpha=complex(g), delay=delay, doppler_hz=nu, sigma_p2=float(sigma_p2[p])))
    return out


def apply_channel(
    s: np.ndarray, targets, config: SystemConfig, sigma_w2: float, seed
) -> np.ndarray:
    """Superpose the target echoes of block s and add CN(0, sigma_w2) noise.

    Sample i receives sum_p alpha_p * s[(i - l_p) mod MN] * exp(j2pi nu_p
    (i - l_p) Ts) + w[i]; the circular shift models the single-CP frame
    after CP removal.
    """
    s = np.asarray(s, dtype=complex)
    n = s.size
    i = np.arange(n)
    x = np.zeros(n, dtype=complex)
    for t in targets:
        if not 0 <= t.delay < n:
            raise ValueError(f"target delay {t.delay} outside [0, {n})")
        phase = np.exp(2j * np.pi * t.doppler_hz * (i - t.delay) * config.Ts)
        x += t.alpha * np.roll(s, t.delay) * phase
    if sigma_w2 > 0:
        rng = as_rng(seed)
        x += np.sqrt(sigma_w2 / 2.0) * (
            rng.standard_normal(n) + 1j * rng.standard_normal(n)
        )
    return x


def to_range(delay_samples: float, config: SystemConfig) -> float:
    """Two-way sample delay -> one-way range in metres."""
    return delay_samples * config.Ts * C_LIGHT / 2.0


def to_velocity(doppler_hz: float, config: SystemConfig) -> float:
    """Two-way Doppler shift -> radial velocity in m/s."""
    return doppler_hz * config.wavelength / 2.0


def range_to_delay(range_m: float, config: SystemConfig) -> float:
    """One-way range -> two-way delay in (fractional) samples."""
    return 2.0 * range_m / (C_LIGHT * config.Ts)


def velocity_to_doppler(velocity_mps: float, config: SystemConfig) -> float:
    return 2.0 * velocity_mps / config.wavelength
