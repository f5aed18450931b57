"""Transmitter chain: subblock concatenation, superposition coding, interleaving, IFFT and CP."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codec import SubblockSpec, bits_to_int, realization_table


@dataclass(frozen=True)
class UserBlock:
    z: np.ndarray
    g: int
    spec: SubblockSpec

    @property
    def N(self) -> int:
        return self.g * self.spec.n


@dataclass(frozen=True)
class SuperposedBlock:
    x_sc: np.ndarray
    alpha: float
    P_BS: float = 1.0

    @property
    def P_NU(self) -> float:
        return self.alpha * self.P_BS

    @property
    def P_FU(self) -> float:
        return (1.0 - self.alpha) * self.P_BS


def subblock_count(N: int, spec: SubblockSpec) -> int:
    if N % spec.n:
        raise ValueError(f"N={N} is not divisible by subblock size n={spec.n}")
    return N // spec.n


def assemble_block(bits, spec: SubblockSpec, g: int) -> UserBlock:
    """Split ``g * p`` bits into g groups; group j becomes subblock j."""
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    if bits.size != g * spec.p:
        raise ValueError(f"expected {g * spec.p} bits for {g} subblocks of {spec}, got {bits.size}")
    labels = np.array([bits_to_int(chunk) for chunk in bits.reshape(g, spec.p)], dtype=np.int64)
    z = realization_table(spec)[labels].ravel()
    return UserBlock(z=z, g=g, spec=spec)


def power_split(alpha: float, P_BS: float = 1.0) -> tuple[float, float]:
    """Return ``(P_NU, P_FU)``."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"power allocation factor must lie in [0, 1], got {alpha}")
    return alpha * P_BS, (1.0 - alpha) * P_BS


def superpose(z_nu, z_fu, alpha: float, P_BS: float = 1.0) -> SuperposedBlock:
    z_nu = np.asarray(z_nu)
    z_fu = np.asarray(z_fu)
    if z_nu.shape != z_fu.shape:
        raise ValueError(f"block shapes differ: {z_nu.shape} vs {z_fu.shape}")
    P_NU, P_FU = power_split(alpha, P_BS)
    return SuperposedBlock(np.sqrt(P_NU) * z_nu + np.sqrt(P_FU) * z_fu, alpha, P_BS)


def interleaver_permutation(n: int, g: int) -> np.ndarray:
    """Output position j carries input position ``perm[j]``.

    The g subblocks (each n long) are the columns of an n x g matrix, which is
    read out row by row; entries of one subblock end up g subcarriers apart.
    """
    if n < 1 or g < 1:
        raise ValueError("n and g must be positive")
    return np.arange(n * g).reshape(g, n).T.ravel()


def _check_layout(x, n, g):
    x = np.asarray(x)
    if x.shape[-1] != n * g:
        raise ValueError(f"length {x.shape[-1]} does not equal n*g = {n}*{g}")
    return x


def interleave(x, n: int, g: int) -> np.ndarray:
    """Block interleaver along the last axis."""
    x = _check_layout(x, n, g)
    return x[..., interleaver_permutation(n, g)]


def deinterleave(x, n: int, g: int) -> np.ndarray:
    x = _check_layout(x, n, g)
    out = np.empty_like(x)
    out[..., interleaver_permutation(n, g)] = x
    return out


def to_time_domain(x_sc) -> np.ndarray:
    """Unitary IFFT along the last axis."""
    return np.fft.ifft(x_sc, axis=-1, norm="ortho")


def to_freq_domain(x_ti) -> np.ndarray:
    return np.fft.fft(x_ti, axis=-1, norm="ortho")


def add_cp(x_ti, C: int) -> np.ndarray:
    x_ti = np.asarray(x_ti)
    N = x_ti.shape[-1]
    if not 0 <= C < N:
        raise ValueError(f"CP length must satisfy 0 <= C < N={N}, got {C}")
    return np.concatenate([x_ti[..., N - C:], x_ti], axis=-1)


def remove_cp(x_cp, C: int) -> np.ndarray:
    return np.asarray(x_cp)[..., C:]


def spectral_efficiency(spec: SubblockSpec, N: int, C: int) -> float:
    """Bits per OFDM block over the CP-extended block length, in bit/s/Hz."""
    return subblock_count(N, spec) * spec.p / (N + C)
