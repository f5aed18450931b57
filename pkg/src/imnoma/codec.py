"""OFDM-IM subblock mapper: index selection, Gray constellations, realization tables.

Bit strings are numpy arrays of 0/1 (``uint8``), most significant bit first.
The integer value of a p-bit string is its position in the realization table,
so ``enumerate_realizations(spec)[j]`` is the subblock sent for bits ``j``.

Index selection uses the combinatorial number system: the p1 index bits are
read as an integer ``d`` and written uniquely as

    d = C(c_k, k) + C(c_{k-1}, k-1) + ... + C(c_1, 1),   c_k > ... > c_1 >= 0

The active set is ``{c_1 + 1, ..., c_k + 1}`` (1-based subcarrier indices).
Only ranks ``0 .. 2**p1 - 1`` are used; the remaining ``C(n, k) - 2**p1``
subsets are unreachable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

DEFAULT_ENUMERATION_CAP = 20


class UnreachableIndexSet(ValueError):
    """Active-index set outside the image of :func:`select_indices`."""


def _is_power_of_two(x: int) -> bool:
    return x >= 1 and (x & (x - 1)) == 0


def bits_to_int(bits) -> int:
    value = 0
    for b in np.asarray(bits, dtype=np.uint8).ravel():
        value = (value << 1) | int(b)
    return value


def int_to_bits(value: int, width: int) -> np.ndarray:
    if width == 0:
        return np.zeros(0, dtype=np.uint8)
    return np.array([(value >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.uint8)


def bit_budget(n: int, k: int, M: int) -> tuple[int, int, int]:
    """Return ``(p1, p2, p)``: index bits, symbol bits and total bits per subblock."""
    if n < 1 or k < 1 or k > n:
        raise ValueError(f"need 1 <= k <= n, got n={n}, k={k}")
    if not _is_power_of_two(M) or M < 2:
        raise ValueError(f"constellation size must be a power of two >= 2, got {M}")
    # floor(log2(C)) without floating point
    p1 = math.comb(n, k).bit_length() - 1
    p2 = k * (M.bit_length() - 1)
    return p1, p2, p1 + p2


@dataclass(frozen=True)
class SubblockSpec:
    n: int
    k: int
    M: int
    p1: int = field(init=False)
    p2: int = field(init=False)
    p: int = field(init=False)

    def __post_init__(self):
        p1, p2, p = bit_budget(self.n, self.k, self.M)
        object.__setattr__(self, "p1", p1)
        object.__setattr__(self, "p2", p2)
        object.__setattr__(self, "p", p)

    @property
    def G(self) -> int:
        return 1 << self.p

    @property
    def bits_per_symbol(self) -> int:
        return self.M.bit_length() - 1

    def __str__(self):
        return f"({self.n},{self.k},M={self.M})"


# --- index selection -------------------------------------------------------

def _check_length(bits, expected: int, what: str) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    if bits.size != expected:
        raise ValueError(f"{what}: expected {expected} bits, got {bits.size}")
    if np.any(bits > 1):
        raise ValueError(f"{what}: bits must be 0 or 1")
    return bits


def unrank_combination(d: int, n: int, k: int) -> tuple[int, ...]:
    """0-based k-subset of range(n) with combinadic rank ``d`` (ascending)."""
    if not 0 <= d < math.comb(n, k):
        raise ValueError(f"rank {d} out of range for C({n},{k})")
    out = []
    c = n - 1
    for i in range(k, 0, -1):
        while math.comb(c, i) > d:
            c -= 1
        out.append(c)
        d -= math.comb(c, i)
        c -= 1
    return tuple(sorted(out))


def rank_combination(subset) -> int:
    """Inverse of :func:`unrank_combination` for a 0-based subset."""
    return sum(math.comb(c, i + 1) for i, c in enumerate(sorted(subset)))


def select_indices(bits, n: int, k: int) -> tuple[int, ...]:
    """Map p1 index bits to a sorted 1-based active set."""
    p1 = math.comb(n, k).bit_length() - 1
    bits = _check_length(bits, p1, "select_indices")
    return tuple(c + 1 for c in unrank_combination(bits_to_int(bits), n, k))


def deselect_indices(indices, n: int, k: int) -> np.ndarray:
    idx = sorted(int(i) for i in indices)
    if len(idx) != k or len(set(idx)) != k or idx[0] < 1 or idx[-1] > n:
        raise ValueError(f"not a {k}-subset of 1..{n}: {indices}")
    p1 = math.comb(n, k).bit_length() - 1
    d = rank_combination([i - 1 for i in idx])
    if d >= (1 << p1):
        raise UnreachableIndexSet(f"index set {tuple(idx)} is not used by ({n},{k}) mapping")
    return int_to_bits(d, p1)


# --- constellations ----------------------------------------------------------

def _gray(i):
    return i ^ (i >> 1)


@lru_cache(maxsize=None)
def _constellation_points(M: int) -> np.ndarray:
    m = M.bit_length() - 1
    if M == 2:
        pts = np.array([1.0, -1.0], dtype=complex)
    elif M == 4:
        # bit b0 -> sign of I, bit b1 -> sign of Q
        pts = np.array([(1 - 2 * (i >> 1)) + 1j * (1 - 2 * (i & 1)) for i in range(4)]) / np.sqrt(2)
    elif m % 2 == 0:
        # square Gray QAM: first m/2 bits pick the I level, the rest the Q level
        h = m // 2
        L = 1 << h
        levels = np.empty(L)
        for pos in range(L):
            levels[_gray(pos)] = 2 * pos - L + 1
        i_lvl = levels[np.arange(M) >> h]
        q_lvl = levels[np.arange(M) & (L - 1)]
        pts = (i_lvl - 1j * q_lvl).astype(complex)
        pts /= np.sqrt(np.mean(np.abs(pts) ** 2))
    else:
        pts = np.empty(M, dtype=complex)
        for pos in range(M):
            pts[_gray(pos)] = np.exp(2j * np.pi * pos / M)
    pts.setflags(write=False)
    return pts


@dataclass(frozen=True)
class Constellation:
    """Unit-average-power Gray-labelled constellation; ``points[label]``."""

    M: int
    points: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not _is_power_of_two(self.M) or self.M < 2:
            raise ValueError(f"constellation size must be a power of two >= 2, got {self.M}")
        object.__setattr__(self, "points", _constellation_points(self.M))

    def demap(self, symbols) -> np.ndarray:
        """Nearest-point labels for an array of symbols."""
        s = np.asarray(symbols)
        return np.argmin(np.abs(s[..., None] - self.points) ** 2, axis=-1)


def modulate(bits, M: int, k: int | None = None) -> np.ndarray:
    """Map groups of log2(M) bits to constellation points."""
    m = M.bit_length() - 1
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    if k is not None:
        bits = _check_length(bits, k * m, "modulate")
    elif bits.size % m:
        raise ValueError(f"modulate: {bits.size} bits is not a multiple of {m}")
    labels = bits.reshape(-1, m) @ (1 << np.arange(m - 1, -1, -1))
    return Constellation(M).points[labels]


def demodulate(symbols, M: int) -> np.ndarray:
    m = M.bit_length() - 1
    labels = Constellation(M).demap(np.asarray(symbols).ravel())
    return ((labels[:, None] >> np.arange(m - 1, -1, -1)) & 1).astype(np.uint8).ravel()


# --- subblocks ---------------------------------------------------------------

@dataclass(frozen=True)
class Realization:
    bits: np.ndarray = field(compare=False)
    indices: tuple[int, ...]
    vector: np.ndarray = field(compare=False)

    @property
    def label(self) -> int:
        return bits_to_int(self.bits)


def build_subblock(bits, spec: SubblockSpec) -> Realization:
    """Index bits first, then symbol bits placed on active indices in ascending order."""
    bits = _check_length(bits, spec.p, "build_subblock")
    indices = select_indices(bits[: spec.p1], spec.n, spec.k)
    x = np.zeros(spec.n, dtype=complex)
    x[np.array(indices) - 1] = modulate(bits[spec.p1:], spec.M, spec.k)
    bits.setflags(write=False)
    x.setflags(write=False)
    return Realization(bits=bits, indices=indices, vector=x)


def demap_subblock(vector, spec: SubblockSpec) -> np.ndarray:
    """Inverse of :func:`build_subblock` for a noiseless realization vector."""
    x = np.asarray(vector)
    active = np.flatnonzero(np.abs(x) > 1e-12)
    index_bits = deselect_indices(active + 1, spec.n, spec.k)
    return np.concatenate([index_bits, demodulate(x[active], spec.M)])


def enumerate_realizations(spec: SubblockSpec, cap: int = DEFAULT_ENUMERATION_CAP) -> list[Realization]:
    if spec.p > cap:
        raise ValueError(f"{spec} carries {spec.p} bits per subblock; enumeration cap is {cap}")
    return [build_subblock(int_to_bits(j, spec.p), spec) for j in range(spec.G)]


@lru_cache(maxsize=64)
def realization_table(spec: SubblockSpec, cap: int = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    """Realization vectors stacked as a read-only ``(G, n)`` array, row j = bits j."""
    table = np.stack([r.vector for r in enumerate_realizations(spec, cap)])
    table.setflags(write=False)
    return table
