"""Off-grid range/velocity estimation on the symbol-free sub-block spectra.

The symbol-free spectrum of target p is a 2-D complex tone: a delay-
dependent frequency along the DFT-bin axis l and a Doppler-dependent one
along the sub-block axis n.  A unitary 2-D DFT (inverse along l, forward
along n) concentrates each tone into a discrete-sinc peak.  Integer bins
come from the peak location; the fractional remainders are estimated per
axis by an iterative two-point interpolation scheme: sample the spectrum a
quarter bin either side of the current estimate, form the normalised power
difference, and invert the known odd response curve of that ratio through
a cubic whose coefficients come from the curve's Taylor expansion.

Targets are taken strongest first; after each estimate the reconstructed
tone is subtracted from the spectrum (respecting the zero-guard mask) and
the search repeats on the residual.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channel import to_range, to_velocity
from .config import SystemConfig
from .preproc import PreprocOutput


def discrete_sinc(x: int, y) -> complex | np.ndarray:
    """Response of an x-point unitary DFT to a tone y bins off grid.

    S_x(y) = sin(pi y) / (sqrt(x) sin(pi y / x)) * exp(j pi y (x-1) / x),
    with the limit sqrt(x) at y = 0 (mod x).
    """
    if x < 1:
        raise ValueError("x must be at least 1")
    y_arr = np.asarray(y, dtype=float)
    r = y_arr - x * np.round(y_arr / x)
    near_zero = np.abs(r) < 1e-12
    safe = np.where(near_zero, 0.25, y_arr)  # dummy away from the pole
    val = (
        np.sin(np.pi * safe)
        / np.sin(np.pi * safe / x)
        / np.sqrt(x)
        * np.exp(1j * np.pi * safe * (x - 1) / x)
    )
    out = np.where(near_zero, complex(math.sqrt(x)), val)
    if np.isscalar(y) or y_arr.ndim == 0:
        return complex(out)
    return out


def rd_map(pre: PreprocOutput) -> np.ndarray:
    """Unitary 2-D DFT of the symbol-free spectra -> range-Doppler map.

    Output is indexed [l_bin, n_bin] with shape (Mbar, Ntilde); a single
    on-grid target of gain alpha peaks at magnitude |alpha| sqrt(Mbar
    Ntilde) / k.
    """
    return rd_map_from(pre.Xt)


def rd_map_from(Xt: np.ndarray) -> np.ndarray:
    nt, mbar = Xt.shape
    tmp = np.fft.ifft(Xt, axis=1) * np.sqrt(mbar)  # inverse along l (unitary)
    out = np.fft.fft(tmp, axis=0) / np.sqrt(nt)  # forward along n (unitary)
    return out.T


def peak_pick(map_: np.ndarray) -> tuple[int, int]:
    """Argmax of squared magnitude; ties go to the smallest l then n bin."""
    flat = int(np.argmax(np.abs(map_) ** 2))
    l_bin, n_bin = divmod(flat, map_.shape[1])
    return l_bin, n_bin


def dft_interp(Xt: np.ndarray, l_frac: float, n_frac: float) -> complex:
    """2-D DFT coefficient of Xt at fractional bin (l_frac, n_frac).

    Direct inner product against the residual spectrum, cost O(Mbar*Ntilde);
    this is interpolation by re-evaluation, not map-grid interpolation.
    """
    nt, mbar = Xt.shape
    w_n = np.exp(-2j * np.pi * np.arange(nt) * n_frac / nt) / np.sqrt(nt)
    w_l = np.exp(2j * np.pi * np.arange(mbar) * l_frac / mbar) / np.sqrt(mbar)
    return complex(w_n @ Xt @ w_l)


def _ratio_curve(x: int, xi: float) -> float:
    a = abs(discrete_sinc(x, xi - 0.25)) ** 2
    b = abs(discrete_sinc(x, xi + 0.25)) ** 2
    return (a - b) / (a + b)


@lru_cache(maxsize=64)
def taylor_c135(x: int) -> tuple[float, float, float]:
    """First, third and fifth Taylor coefficients of the quarter-bin power
    ratio curve at 0, for an x-point DFT.

    The curve is odd, so three samples at h, 2h, 3h determine the cubic and
    quintic terms; a second solve at h/2 Richardson-extrapolates the
    O(h^6) truncation away.  The curve itself is evaluated exactly through
    discrete_sinc.
    """
    if x < 2:
        raise ValueError("x must be at least 2")
    h = 1e-2
    A = np.array([[1, 1, 1], [2, 8, 32], [3, 27, 243]], dtype=float)

    def solve(hh: float) -> np.ndarray:
        y = np.array([_ratio_curve(x, k * hh) for k in (1, 2, 3)])
        u = np.linalg.solve(A, y)
        return np.array([u[0] / hh, u[1] / hh**3, u[2] / hh**5])

    c = (64.0 * solve(h / 2) - solve(h)) / 63.0
    return float(c[0]), float(c[1]), float(c[2])


def cubic_update(rho: float, c1: float, c3: float, c5: float) -> float:
    """Invert the ratio curve: solve the cubic equivalent of
    (c1 xi + a3 xi^3) / (1 + b2 xi^2) = rho and return the real part of the
    minimum-magnitude root.

    a3 and b2 come from the (3,2) rational fit matching the odd Taylor
    series through fifth order.  Degenerate a3 falls back to the linear
    inversion rho / c1.
    """
    if rho == 0.0:
        return 0.0  # zero is a root of the cubic and trivially minimal
    if c3 == 0.0:
        return rho / c1
    a1 = c1
    a3 = c3 - c1 * c5 / c3
    if a3 == 0.0:
        return rho / c1
    b2 = -c5 / c3
    k2 = -rho * b2 / a3
    k1 = a1 / a3
    k0 = -rho / a3
    R = (9 * k1 * k2 - 27 * k0 - 2 * k2**3) / 54.0
    Qc = (3 * k1 - k2**2) / 9.0
    disc = Qc**3 + R**2
    sq = cmath.sqrt(disc)
    S = (R + sq) ** (1.0 / 3.0)
    if abs(S) < 1e-300:
        return rho / c1
    T = -Qc / S  # enforces S*T = -Qc exactly
    B = (S + T) / 2.0
    D = cmath.sqrt(3) * (S - T) * 1j / 2.0
    roots = (-k2 / 3.0 + 2.0 * B, -k2 / 3.0 - B + D, -k2 / 3.0 - B - D)
    return min(roots, key=abs).real


def refine_axis(
    Xt: np.ndarray,
    axis: str,
    anchor: tuple[int, int],
    n_iter: int,
) -> tuple[float, bool]:
    """Fractional offset of the peak along one axis of the residual spectrum.

    axis "range" refines the l coordinate (size Mbar), axis "doppler" the n
    coordinate (size Ntilde).  Starts from a quarter-bin step whose sign
    comes from comparing the two neighbouring map bins against the peak,
    then iterates: interpolate at +-0.25 around the current estimate, form
    the normalised power-difference ratio, and correct by the cubic-root
    inversion of the ratio curve.  The result is clamped to [-0.5, 0.5];
    the flag reports whether clamping occurred.
    """
    nt, mbar = Xt.shape
    l0, n0 = anchor
    if axis == "range":
        size = mbar
        at = lambda off: dft_interp(Xt, l0 + off, n0)
    elif axis == "doppler":
        size = nt
        at = lambda off: dft_interp(Xt, l0, n0 + off)
    else:
        raise ValueError("axis must be 'range' or 'doppler'")

    # neighbour sign test seeds the first quarter-bin step; a neutral test
    # (exactly on-grid: both neighbours are sinc zeros up to roundoff)
    # starts from 0
    center = at(0.0)
    discr = ((at(-1.0) - at(1.0)) * center.conjugate()).real
    if abs(discr) <= 1e-9 * abs(center) ** 2:
        delta = 0.0
    else:
        delta = 0.25 * float(np.sign(discr))

    c1, c3, c5 = taylor_c135(size)
    for _ in range(n_iter):
        x_plus = at(delta + 0.25)
        x_minus = at(delta - 0.25)
        denom = abs(x_plus) ** 2 + abs(x_minus) ** 2
        if denom == 0.0:
            raise ValueError("degenerate all-zero neighbourhood")
        rho = (abs(x_plus) ** 2 - abs(x_minus) ** 2) / denom
        delta += cubic_update(rho, c1, c3, c5)

    clamped = False
    if delta > 0.5:
        delta, clamped = 0.5, True
    elif delta < -0.5:
        delta, clamped = -0.5, True
    return float(delta), clamped


def model_spectrum(
    alpha: complex, l_val: float, nu_hz: float, config: SystemConfig, k: float
) -> np.ndarray:
    """Symbol-free spectrum a single target of gain alpha would produce:
    (alpha/k) exp(-j2pi l l_val/Mbar) exp(j2pi nu n Mtilde Ts)."""
    nt, mbar = config.Ntilde, config.Mbar
    tone_l = np.exp(-2j * np.pi * np.arange(mbar) * l_val / mbar)
    tone_n = np.exp(2j * np.pi * nu_hz * np.arange(nt) * config.Mtilde * config.Ts)
    return (alpha / k) * np.outer(tone_n, tone_l)


@dataclass
class Estimate:
    """One recovered target; delays in fractional samples, Doppler signed."""

    l_hat: float
    nu_hat: float
    alpha_hat: complex
    r_hat: float
    v_hat: float
    clamped: bool = False


def estimate_targets(pre: PreprocOutput, P: int, config: SystemConfig) -> list[Estimate]:
    """Estimate-and-subtract loop over the P strongest spectral peaks.

    Each pass maps the residual to the range-Doppler plane, picks the
    strongest peak, refines both axes, converts bins to physical units
    (Doppler bins above Ntilde/2 unwrap to negative frequencies), estimates
    the complex gain from the peak value, and removes the reconstructed
    tone from the residual before the next pass.
    """
    if P < 1:
        raise ValueError("P must be at least 1")
    nt, mbar = pre.Xt.shape
    if P > nt * mbar:
        raise ValueError("more targets requested than resolvable bins")
    resid = pre.Xt.copy()
    mask = pre.mask
    nu_scale = config.Ntilde * config.Mtilde * config.Ts
    out: list[Estimate] = []
    for _ in range(P):
        map_ = rd_map_from(resid)
        l0, n0 = peak_pick(map_)
        delta, cl_l = refine_axis(resid, "range", (l0, n0), config.N_iter)
        epsi, cl_n = refine_axis(resid, "doppler", (l0, n0), config.N_iter)
        l_hat = (l0 + delta) % mbar
        n_hat = n0 + epsi
        n_signed = n_hat - nt if n_hat >= nt / 2 else n_hat
        nu_hat = n_signed / nu_scale
        peak = map_[l0, n0]
        alpha_hat = (
            pre.k * peak / (discrete_sinc(mbar, -delta) * discrete_sinc(nt, epsi))
        )
        out.append(
            Estimate(
                l_hat=float(l_hat),
                nu_hat=float(nu_hat),
                alpha_hat=complex(alpha_hat),
                r_hat=to_range(float(l_hat), config),
                v_hat=to_velocity(float(nu_hat), config),
                clamped=cl_l or cl_n,
            )
        )
        resid = resid - model_spectrum(alpha_hat, l0 + delta, nu_hat, config, pre.k) * mask
    return out
