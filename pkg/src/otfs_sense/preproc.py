"""Receiver-side echo pre-processing.

The received block is cut into Ntilde sub-blocks of Mtilde samples.  The
last Q samples of each sub-block (the non-essential tail) are folded onto
its first Q samples, which restores a circular-shift structure for every
echo whose delay is below Q: a cyclic prefix created at the receiver, with
no cooperation from the transmitter.  The price is a bounded amount of
inter- and intra-block leakage on the first Q samples of each sub-block.

After a per-row unitary DFT, communication symbols are removed by pointwise
division.  The divisor is scaled by k so that the probability of a
near-zero divisor bin is a chosen eps, and those bins are zeroed outright
instead of amplifying noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import SystemConfig


@dataclass
class PreprocOutput:
    """Per-sub-block symbol-free spectrum with the zero-guard mask.

    Xt[n, l] is zero wherever mask[n, l] is False.  k is the divisor scale.
    """

    Xt: np.ndarray
    mask: np.ndarray
    k: float


def segment(x: np.ndarray, config: SystemConfig) -> np.ndarray:
    """Cut the received stream into Ntilde rows of Mtilde samples.

    The trailing MN - Mtilde*Ntilde samples are discarded.
    """
    x = np.asarray(x)
    if x.size != config.MN:
        raise ValueError(f"expected {config.MN} samples, got {x.size}")
    if config.Mtilde > x.size:
        raise ValueError("sub-block length exceeds the block")
    nt = config.Ntilde
    return x[: nt * config.Mtilde].reshape(nt, config.Mtilde).copy()


def add_vcp(blocks: np.ndarray, Q: int) -> np.ndarray:
    """Fold each row's last Q samples onto its first Q samples.

    Input rows have Mtilde samples; output rows keep the essential
    Mbar = Mtilde - Q samples.
    """
    blocks = np.asarray(blocks)
    mtilde = blocks.shape[1]
    mbar = mtilde - Q
    if mbar < 2:
        raise ValueError("essential part must keep at least 2 samples")
    out = blocks[:, :mbar].copy()
    if Q > 0:
        out[:, :Q] += blocks[:, mbar:]
    return out


def reference_blocks(s: np.ndarray, config: SystemConfig) -> np.ndarray:
    """Essential part of each transmitted sub-block (no fold is applied)."""
    s = np.asarray(s)
    if s.size != config.MN:
        raise ValueError(f"expected {config.MN} samples, got {s.size}")
    nt = config.Ntilde
    rows = s[: nt * config.Mtilde].reshape(nt, config.Mtilde)
    return rows[:, : config.Mbar].copy()


def choose_k(sigma_d2: float, eps: float) -> float:
    """Divisor scale making P{|k S| <= 1} = eps for S ~ CN(0, sigma_d2)."""
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    return 1.0 / (math.sqrt(sigma_d2) * math.sqrt(math.log(1.0 / (1.0 - eps))))


def remove_symbols(folded: np.ndarray, reference: np.ndarray, k: float) -> PreprocOutput:
    """Per-row unitary DFT of both matrices, then guarded pointwise division.

    Bins where the scaled divisor magnitude is at most 1 are zeroed; the
    rest hold X_n[l] / (k * S_n[l]) and are always finite.
    """
    folded = np.asarray(folded, dtype=complex)
    reference = np.asarray(reference, dtype=complex)
    if folded.shape != reference.shape:
        raise ValueError("folded and reference shapes differ")
    mbar = folded.shape[1]
    if np.any(~reference.any(axis=1)):
        raise ValueError("reference row is identically zero")
    Xn = np.fft.fft(folded, axis=1) / np.sqrt(mbar)
    Sn = np.fft.fft(reference, axis=1) / np.sqrt(mbar)
    divisor = k * Sn
    mask = np.abs(divisor) > 1.0
    Xt = np.zeros_like(Xn)
    np.divide(Xn, divisor, out=Xt, where=mask)
    return PreprocOutput(Xt=Xt, mask=mask, k=k)


def preprocess(
    x: np.ndarray, s: np.ndarray, config: SystemConfig, k: float | None = None
) -> PreprocOutput:
    """Segment, fold, and symbol-divide a received block against transmit s."""
    if k is None:
        k = choose_k(config.sigma_d2, config.eps_eff)
    folded = add_vcp(segment(x, config), config.Q)
    reference = reference_blocks(s, config)
    return remove_symbols(folded, reference, k)


def vcp_interference(s: np.ndarray, targets, config: SystemConfig) -> tuple[np.ndarray, np.ndarray]:
    """Leakage terms created by the fold, evaluated from the transmit block.

    For each target with delay l: the head samples m < l of a folded
    sub-block keep the previous sub-block's tail (inter-block term), and the
    fold adds the current sub-block's own tail onto samples l <= m < Q
    (intra-block term).  Doppler is applied per sub-block epoch; the first
    sub-block wraps around the block end, matching the circular channel.
    Returns (za, zb), each of shape (Ntilde, Mbar) and zero outside [0, Q).
    """
    s = np.asarray(s, dtype=complex)
    nt, mbar, mt, Q = config.Ntilde, config.Mbar, config.Mtilde, config.Q
    Ts = config.Ts
    za = np.zeros((nt, mbar), dtype=complex)
    zb = np.zeros((nt, mbar), dtype=complex)
    n_idx = np.arange(nt)
    for t in targets:
        l = t.delay
        alpha_t = t.alpha * np.exp(-2j * np.pi * t.doppler_hz * l * Ts)
        if l > 0:
            m = np.arange(l)
            src = (n_idx[:, None] * mt + m[None, :] - l) % config.MN
            rot = np.exp(2j * np.pi * t.doppler_hz * (n_idx - 1) * mt * Ts)
            za[:, :l] += alpha_t * s[src] * rot[:, None]
        if l < Q:
            m = np.arange(l, Q)
            src = (n_idx[:, None] * mt + m[None, :] + mbar - l) % config.MN
            rot = np.exp(2j * np.pi * t.doppler_hz * n_idx * mt * Ts)
            zb[:, l:Q] += alpha_t * s[src] * rot[:, None]
    return za, zb
