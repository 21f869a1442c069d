"""Closed-form power budget, SINR-optimal sub-block length, and the velocity
estimation bound.

All expressions refer to the symbol-free sub-block spectra after the
masked division.  Four components add up there: the coherent target tones,
the Doppler-induced inter-carrier leakage, the fold leakage from the
receiver-made cyclic prefix, and divided noise.  The three non-coherent
components share the variance constant b(eps) of a truncated complex-
Gaussian ratio.  The coherent power grows, and the leakage shrinks, with
the essential sub-block length Mbar in opposite directions, which yields a
cube-root optimum for the sub-block length.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .config import SystemConfig
from .preproc import choose_k


def b_of_eps(eps: float) -> float:
    """Variance constant of a complex-Gaussian ratio truncated so the tail
    probability is eps: b = 2 (ln(2(1-eps)/sqrt(eps(2-eps))) - 1).

    Warns when the approximation turns non-positive (large eps), where the
    truncated-ratio model stops being meaningful.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    b = 2.0 * (math.log(2.0 * (1.0 - eps) / math.sqrt(eps * (2.0 - eps))) - 1.0)
    if b <= 0.0:
        warnings.warn(
            f"b(eps) = {b:.4f} <= 0 at eps = {eps}: truncated-ratio variance "
            "approximation is not meaningful here",
            RuntimeWarning,
            stacklevel=2,
        )
    return b


def curvature_a(sigma_p2, nu_hz, Ts: float) -> float:
    """Doppler curvature constant a = (pi^2 Ts^2 / 3) sum_p sigma_p^2 nu_p^2."""
    sigma_p2 = np.asarray(sigma_p2, dtype=float)
    nu = np.asarray(nu_hz, dtype=float)
    return float((math.pi**2 * Ts**2 / 3.0) * np.sum(sigma_p2 * nu**2))


def curvature_a_uniform(sigma_p2, nu_max_hz: float, Ts: float) -> float:
    """Expected curvature constant when Doppler is uniform on [-nu_max, nu_max]:
    E[nu^2] = nu_max^2 / 3 per target."""
    sigma_p2 = np.asarray(sigma_p2, dtype=float)
    return float(
        (math.pi**2 * Ts**2 / 3.0) * np.sum(sigma_p2) * nu_max_hz**2 / 3.0
    )


@dataclass
class PowerBudget:
    """Component powers of the symbol-free spectra and the estimation SINR."""

    sigma_S2: float
    sigma_I2: float
    sigma_Z2: float
    sigma_W2: float
    gamma: float
    a: float
    sigma_P2: float
    valid: bool = True  # False when the signal-power expansion went negative


def power_budget(
    config: SystemConfig,
    sigma_p2,
    nu_hz=None,
    nu_max_hz: float | None = None,
    i_min: int | None = None,
    i_max: int | None = None,
    eps: float | None = None,
) -> PowerBudget:
    """Closed-form powers of the four spectrum components and their SINR.

    The curvature constant a uses the actual per-target Doppler values when
    nu_hz is given, otherwise the uniform-draw expectation from nu_max_hz.
    i_min/i_max are the smallest/largest sample delays (defaults 0 and Q,
    which turns the fold-leakage expression into its upper bound).
    """
    sigma_p2 = np.asarray(sigma_p2, dtype=float)
    P = sigma_p2.size
    if eps is None:
        eps = config.eps_eff
    k = choose_k(config.sigma_d2, eps)
    mbar = config.Mbar
    if P == 0:
        sW2 = b_of_eps(eps) * config.sigma_w2 / (k**2 * config.sigma_d2)
        return PowerBudget(0.0, 0.0, 0.0, sW2, 0.0, 0.0, 0.0, True)
    if nu_hz is not None:
        a = curvature_a(sigma_p2, nu_hz, config.Ts)
    elif nu_max_hz is not None:
        a = curvature_a_uniform(sigma_p2, nu_max_hz, config.Ts)
    else:
        raise ValueError("need nu_hz or nu_max_hz")
    sigma_P2 = float(np.sum(sigma_p2))
    if i_min is None:
        i_min = 0
    if i_max is None:
        i_max = config.Q
    b = b_of_eps(eps)

    sS2 = (sigma_P2 + a - a * mbar**2) / k**2
    valid = sS2 >= 0.0
    if not valid:
        sS2 = 0.0
    sI2 = b * (a * mbar**2 - a) / k**2
    p_idx = np.arange(P)
    head = i_max * float(np.sum((p_idx + 1) * sigma_p2))
    tail = (config.Q - i_min) * float(np.sum((P - p_idx) * sigma_p2))
    sZ2 = b * (head + tail) / (k**2 * P * mbar)
    sW2 = b * config.sigma_w2 / (k**2 * config.sigma_d2)
    denom = sI2 + sZ2 + sW2
    gamma = mbar * config.Ntilde * sS2 / denom if denom > 0 else math.inf
    return PowerBudget(sS2, sI2, sZ2, sW2, gamma, a, sigma_P2, valid)


def sinr_numerator(mbar, Q: int, MN: int, a: float, sigma_P2: float, eps: float, sigma_d2: float = 1.0):
    """Accumulated coherent power f(Mbar) with the continuous sub-block count
    MN / (Mbar + Q); concave in Mbar.  eps (hence k) is held fixed."""
    mbar = np.asarray(mbar, dtype=float)
    k = choose_k(sigma_d2, eps)
    ntilde = MN / (mbar + Q)
    return mbar * ntilde * (sigma_P2 + a - a * mbar**2) / k**2


def sinr_denominator(
    mbar,
    Q: int,
    a: float,
    sigma_P2: float,
    P: int,
    sigma_w2: float,
    sigma_d2: float,
    eps: float,
):
    """Leakage-plus-noise power g(Mbar); convex in Mbar.  eps held fixed."""
    mbar = np.asarray(mbar, dtype=float)
    k = choose_k(sigma_d2, eps)
    b = b_of_eps(eps)
    return (
        b
        / k**2
        * (
            a * (mbar**2 - 1.0)
            + Q * (P + 1) * sigma_P2 / (P * mbar)
            + sigma_w2 / sigma_d2
        )
    )


@dataclass
class SubBlockOptimum:
    mbar_f: float
    mbar_g: float
    mtilde_opt: int
    ntilde_opt: int


def opt_Mbar(
    Q: int, a: float, sigma_P2: float, P: int, MN: int, min_mbar: int = 2
) -> SubBlockOptimum:
    """Cube-root optima of the SINR numerator and denominator, and the
    resulting sub-block length.

    mbar_f maximises the coherent power, mbar_g minimises leakage-plus-
    noise; the recommended length is Mtilde = cbrt(Q sigma_P^2 / (2a)) + Q
    rounded to the nearest integer (at least Q + min_mbar), with the
    sub-block count rounded from MN / Mtilde.  Static populations (a = 0)
    have no interior optimum: the whole block is returned.
    """
    if Q < 1:
        raise ValueError("Q must be at least 1")
    if a == 0.0:
        return SubBlockOptimum(math.inf, math.inf, MN, 1)
    mbar_f = ((Q * a + Q * sigma_P2) / (2.0 * a)) ** (1.0 / 3.0)
    mbar_g = (Q * (P + 1) * sigma_P2 / (2.0 * a * P)) ** (1.0 / 3.0)
    mtilde = (Q * sigma_P2 / (2.0 * a)) ** (1.0 / 3.0) + Q
    mtilde_opt = max(int(round(mtilde)), Q + min_mbar)
    mtilde_opt = min(mtilde_opt, MN)
    ntilde_opt = max(int(round(MN / mtilde_opt)), 1)
    return SubBlockOptimum(mbar_f, mbar_g, mtilde_opt, ntilde_opt)


def crlb_velocity(config: SystemConfig, gamma0: float, pi_power: int = 4) -> float:
    """Velocity-estimation variance bound in (m/s)^2 at time-domain SNR
    gamma0 (linear).

    pi_power selects the exponent of pi in the denominator: 4 follows the
    headline expression, 2 the underlying single-tone derivation (the two
    differ by a factor pi^2; see the analysis notes).  Scales as 1/gamma0.
    """
    if gamma0 <= 0:
        raise ValueError("gamma0 must be positive")
    lam = config.wavelength
    b = b_of_eps(config.eps_eff)
    aperture = config.Mtilde * config.Ntilde * config.Ts
    gain = config.Ntilde * config.Mbar * gamma0 / b
    return (lam**2 / 4.0) / aperture**2 * 6.0 / (4.0 * math.pi**pi_power * gain)


def sinr_curve(
    config: SystemConfig,
    sigma_p2,
    nu_hz=None,
    nu_max_hz: float | None = None,
    mtilde_grid=None,
    eps: float | None = None,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Estimation SINR over a grid of sub-block lengths.

    Returns (mtilde values, gamma in dB, argmax mtilde).  eps defaults to
    the config value and is held fixed across the sweep so the numerator
    and denominator keep their concave/convex shapes.
    """
    if eps is None:
        eps = config.eps_eff
    sigma_p2 = np.asarray(sigma_p2, dtype=float)
    if nu_hz is not None:
        a = curvature_a(sigma_p2, nu_hz, config.Ts)
    elif nu_max_hz is not None:
        a = curvature_a_uniform(sigma_p2, nu_max_hz, config.Ts)
    else:
        raise ValueError("need nu_hz or nu_max_hz")
    sigma_P2 = float(np.sum(sigma_p2))
    P = sigma_p2.size
    if mtilde_grid is None:
        mtilde_grid = np.arange(config.Q + 10, config.MN // 2, 50)
    mtilde_grid = np.asarray(mtilde_grid, dtype=int)
    mbar = mtilde_grid - config.Q
    f = sinr_numerator(mbar, config.Q, config.MN, a, sigma_P2, eps, config.sigma_d2)
    g = sinr_denominator(
        mbar, config.Q, a, sigma_P2, P, config.sigma_w2, config.sigma_d2, eps
    )
    gamma = f / g
    gamma_db = 10.0 * np.log10(np.maximum(gamma, 1e-300))
    return mtilde_grid, gamma_db, int(mtilde_grid[np.argmax(gamma)])
