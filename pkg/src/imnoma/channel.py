"""Frequency-selective Rayleigh block fading and AWGN.

The simulator uses the per-subcarrier model ``y = h * x + w``; the time-domain
path (convolution over a CP-extended block) is kept to check that the two agree.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def crandn(rng: np.random.Generator, shape, var: float = 1.0) -> np.ndarray:
    """Circularly symmetric complex Gaussian samples with variance ``var``."""
    scale = np.sqrt(var / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


@dataclass(frozen=True)
class ChannelRealization:
    taps: np.ndarray
    freq: np.ndarray
    sigma2: float

    @property
    def v(self) -> int:
        return self.taps.shape[-1]


@dataclass(frozen=True)
class NoiseModel:
    N0: float

    def __post_init__(self):
        if not self.N0 > 0:
            raise ValueError(f"noise variance must be positive, got {self.N0}")

    @classmethod
    def from_snr_db(cls, snr_db: float) -> "NoiseModel":
        return cls(1.0 / db_to_linear(snr_db))

    @property
    def snr_db(self) -> float:
        return 10.0 * np.log10(1.0 / self.N0)


def frequency_response(taps, N: int) -> np.ndarray:
    """N-point (unnormalised) DFT of zero-padded taps along the last axis."""
    return np.fft.fft(taps, n=N, axis=-1)


def draw_channel(v: int, sigma2: float, N: int, rng: np.random.Generator, size=()) -> ChannelRealization:
    """Draw v i.i.d. CN(0, sigma2/v) taps; ``size`` prepends batch dimensions."""
    if v < 1:
        raise ValueError(f"need at least one tap, got v={v}")
    if v > N:
        raise ValueError(f"tap count v={v} exceeds FFT size N={N}")
    if not sigma2 > 0:
        raise ValueError(f"channel variance must be positive, got {sigma2}")
    shape = tuple(np.atleast_1d(size)) + (v,) if size != () else (v,)
    taps = crandn(rng, shape, sigma2 / v)
    return ChannelRealization(taps=taps, freq=frequency_response(taps, N), sigma2=sigma2)


def propagate_time(x_cp, ch: ChannelRealization, N0: float, rng: np.random.Generator | None = None) -> np.ndarray:
    """Linear convolution with the taps (first N+C samples kept) plus AWGN."""
    x_cp = np.asarray(x_cp)
    L = x_cp.shape[-1]
    N = ch.freq.shape[-1]
    C = L - N
    if C < ch.v - 1:
        raise ValueError(f"CP of {C} samples is shorter than channel memory v-1={ch.v - 1}")
    y = np.convolve(x_cp, ch.taps)[:L]
    if N0 > 0:
        y = y + crandn(rng, L, N0)
    return y


def observe_freq(x_sc, ch_freq, N0: float, rng: np.random.Generator | None = None) -> np.ndarray:
    """Per-subcarrier observation ``h * x + w`` with ``w ~ CN(0, N0)``."""
    x_sc = np.asarray(x_sc)
    ch_freq = getattr(ch_freq, "freq", ch_freq)
    if np.shape(ch_freq)[-1] != x_sc.shape[-1]:
        raise ValueError("channel and signal lengths differ")
    y = ch_freq * x_sc
    if N0 > 0:
        y = y + crandn(rng, y.shape, N0)
    return y
