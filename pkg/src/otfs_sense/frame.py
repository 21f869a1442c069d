"""OTFS transmit-side signal generation and the domain transforms.

Data symbols live on an N x M delay-Doppler grid d[k, l] (k Doppler rows,
l delay columns).  The grid maps to the M x N time-frequency plane S[m, n]
through the inverse symplectic transform, and on to the length-MN time
waveform through per-symbol multicarrier modulation with rectangular pulses
at critical sampling.  All transforms are unitary, so energy bookkeeping is
exact and the time-frequency samples of random data are white with the same
per-symbol power as the constellation.
"""

from __future__ import annotations

import numpy as np

from .config import SystemConfig

# unit-average-power square constellations
_QAM_LEVELS = {"QPSK": (1,), "16QAM": (1, 3), "64QAM": (1, 3, 5, 7)}


def constellation_points(name: str) -> np.ndarray:
    """Return the complex alphabet scaled to unit average power."""
    try:
        levels = _QAM_LEVELS[name]
    except KeyError:
        raise ValueError(f"unknown constellation {name!r}") from None
    amp = np.array(sorted(set(levels) | {-l for l in levels}), dtype=float)
    pts = (amp[:, None] + 1j * amp[None, :]).ravel()
    return pts / np.sqrt(np.mean(np.abs(pts) ** 2))


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def draw_symbols(config: SystemConfig, seed) -> np.ndarray:
    """I.i.d. uniform draws from the alphabet, scaled to power sigma_d2.

    Returns the (N, M) delay-Doppler grid; deterministic under a fixed seed.
    """
    rng = as_rng(seed)
    points = constellation_points(config.constellation) * np.sqrt(config.sigma_d2)
    idx = rng.integers(0, len(points), size=(config.N, config.M))
    return points[idx]


def isfft(d: np.ndarray) -> np.ndarray:
    """Delay-Doppler (N, M) -> time-frequency (M, N), unitary.

    Inverse DFT along the Doppler axis followed by a forward DFT along the
    delay axis, both 1/sqrt-scaled.
    """
    d = np.asarray(d)
    if d.ndim != 2:
        raise ValueError("expected a 2-D delay-Doppler grid")
    n_doppler = d.shape[0]
    tmp = np.fft.ifft(d, axis=0) * np.sqrt(n_doppler)  # (N, M), rows now time slots
    S = np.fft.fft(tmp, axis=1) / np.sqrt(d.shape[1])  # (N, M) indexed [n, m]
    return S.T


def sfft(S: np.ndarray) -> np.ndarray:
    """Time-frequency (M, N) -> delay-Doppler (N, M); exact inverse of isfft."""
    S = np.asarray(S)
    if S.ndim != 2:
        raise ValueError("expected a 2-D time-frequency grid")
    tmp = S.T  # (N, M) indexed [n, m]
    tmp = np.fft.ifft(tmp, axis=1) * np.sqrt(S.shape[0])
    return np.fft.fft(tmp, axis=0) / np.sqrt(S.shape[1])


def heisenberg(S: np.ndarray) -> np.ndarray:
    """Time-frequency grid (M, N) -> critically sampled waveform (M*N,).

    Each symbol is the length-M unitary inverse DFT of its sub-carrier
    column; symbols are concatenated in time order.
    """
    S = np.asarray(S)
    M = S.shape[0]
    blocks = np.fft.ifft(S, axis=0) * np.sqrt(M)  # (M, N) indexed [m', n]
    return blocks.T.ravel()


def wigner(x: np.ndarray, M: int, N: int) -> np.ndarray:
    """Waveform (M*N,) -> time-frequency grid (M, N); inverse of heisenberg."""
    blocks = np.asarray(x).reshape(N, M)
    S = np.fft.fft(blocks, axis=1) / np.sqrt(M)  # [n, m]
    return S.T


def modulate(d: np.ndarray) -> np.ndarray:
    """Delay-Doppler grid -> time-domain block (no CP)."""
    return heisenberg(isfft(d))


def dd_transform(x: np.ndarray, M: int, N: int) -> np.ndarray:
    """Time-domain block -> delay-Doppler grid (N, M); inverse of modulate."""
    return sfft(wigner(x, M, N))


def add_cp(s: np.ndarray, L_cp: int) -> np.ndarray:
    """Prefix the block with its last L_cp samples (circular extension)."""
    s = np.asarray(s)
    if not 0 <= L_cp <= s.size:
        raise ValueError(f"cp length {L_cp} outside [0, {s.size}]")
    if L_cp == 0:
        return s.copy()
    return np.concatenate([s[-L_cp:], s])


def remove_cp(s_cp: np.ndarray, L_cp: int) -> np.ndarray:
    s_cp = np.asarray(s_cp)
    if not 0 <= L_cp <= s_cp.size:
        raise ValueError(f"cp length {L_cp} outside [0, {s_cp.size}]")
    return s_cp[L_cp:].copy()
