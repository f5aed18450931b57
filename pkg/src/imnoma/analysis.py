"""Union-bound error analysis over the realization tables.

The pairwise error probability between two subblocks ``b`` and ``b_hat`` under
i.i.d. Rayleigh fading is the Craig-form integral

    (1/pi) * int_0^{pi/2} prod_i sin^2(t) / (sin^2(t) + c_i) dt,
    c_i = power * sigma2 * lambda_i / (4 * N0),

where ``lambda_i = |b_i - b_hat_i|^2`` are the nonzero eigenvalues of the
(diagonal) difference matrix. ``upep`` evaluates it in closed form by partial
fractions (repeated eigenvalues handled exactly); ``upep_numeric`` integrates it
directly and serves as the cross-check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from scipy import integrate

from .codec import SubblockSpec, int_to_bits, realization_table

MAX_TABLE_SIZE = 1 << 10
_EIG_DECIMALS = 9


def bit_error_count(b1, b2) -> int:
    b1 = np.asarray(b1, dtype=np.uint8).ravel()
    b2 = np.asarray(b2, dtype=np.uint8).ravel()
    if b1.shape != b2.shape:
        raise ValueError(f"bit strings differ in length: {b1.size} vs {b2.size}")
    return int(np.count_nonzero(b1 != b2))


@dataclass(frozen=True)
class PairwiseEvent:
    b: np.ndarray
    b_hat: np.ndarray
    errors: int

    @classmethod
    def from_labels(cls, spec: SubblockSpec, sent: int, detected: int) -> "PairwiseEvent":
        table = realization_table(spec)
        e = bit_error_count(int_to_bits(sent, spec.p), int_to_bits(detected, spec.p))
        return cls(table[sent], table[detected], e)

    def q_matrix(self) -> np.ndarray:
        D = np.diag(self.b - self.b_hat)
        return D.conj().T @ D

    @property
    def eigenvalues(self) -> np.ndarray:
        """Nonzero eigenvalues read off the diagonal of Q."""
        lam = np.abs(self.b - self.b_hat) ** 2
        return lam[lam > 1e-12]

    def eigenvalues_generic(self) -> np.ndarray:
        lam = np.linalg.eigvalsh(self.q_matrix())
        return np.sort(lam[lam > 1e-12])

    @property
    def rank(self) -> int:
        return int(self.eigenvalues.size)


# --- UPEP -----------------------------------------------------------------------

def _craig_j(r: int, c):
    """(1/pi) * int_0^{pi/2} (sin^2 t + c)^{-r} dt via derivatives of 1/(2 sqrt(c(1+c)))."""
    m = r - 1

    def falling(i):
        out = mpmath.mpf(1)
        for t in range(i):
            out *= -mpmath.mpf(1) / 2 - t
        return out

    deriv = mpmath.mpf(0)
    for i in range(m + 1):
        deriv += math.comb(m, i) * falling(i) * c ** (-mpmath.mpf(1) / 2 - i) \
            * falling(m - i) * (1 + c) ** (-mpmath.mpf(1) / 2 - (m - i))
    return (-1) ** m / mpmath.factorial(m) * deriv / 2


def _series_inverse_power(a, m: int, order: int):
    """Taylor coefficients of (a + t)^(-m) up to t^order."""
    return [(-1) ** k * math.comb(m + k - 1, k) * a ** (-m - k) for k in range(order + 1)]


def _series_mul(x, y, order):
    return [sum(x[i] * y[k - i] for i in range(k + 1)) for k in range(order + 1)]


def craig_product_closed_form(c_values, dps: int = 50) -> float:
    """(1/pi) int_0^{pi/2} prod sin^2/(sin^2 + c_i) in closed form.

    Partial fractions in s = sin^2 t are carried out in extended precision since
    the terms cancel heavily at high SNR.
    """
    c_values = [float(c) for c in c_values if c > 0]
    if not c_values:
        return 0.5
    with mpmath.workdps(dps):
        distinct: dict[float, int] = {}
        for c in sorted(c_values):
            for key in distinct:
                if abs(c - key) <= 1e-12 * max(1.0, key):
                    distinct[key] += 1
                    break
            else:
                distinct[c] = 1
        L = len(c_values)
        poles = [(mpmath.mpf(c), m) for c, m in distinct.items()]
        total = mpmath.mpf(1) / 2
        for j, (cj, mj) in enumerate(poles):
            order = mj - 1
            s0 = -cj
            series = [math.comb(L, k) * s0 ** (L - k) for k in range(order + 1)]
            for l, (cl, ml) in enumerate(poles):
                if l != j:
                    series = _series_mul(series, _series_inverse_power(cl - cj, ml, order), order)
            for r in range(1, mj + 1):
                total += series[mj - r] * _craig_j(r, cj)
        return float(total)


def craig_product_numeric(c_values) -> float:
    c = np.asarray([x for x in c_values if x > 0], dtype=float)

    def integrand(t):
        s = np.sin(t) ** 2
        return np.prod(s / (s + c))

    val, _ = integrate.quad(integrand, 0.0, np.pi / 2, epsabs=1e-14, epsrel=1e-12, limit=200)
    return val / np.pi


def _effective_snrs(eigenvalues, sigma2, N0, power):
    if not N0 > 0:
        raise ValueError(f"noise variance must be positive, got {N0}")
    lam = np.asarray(eigenvalues, dtype=float)
    return power * sigma2 * lam[lam > 1e-12] / (4.0 * N0)


def upep(event, sigma2: float, N0: float, power: float = 1.0) -> float:
    """Pairwise error probability averaged over Rayleigh fading (closed form).

    ``event`` is a :class:`PairwiseEvent` or an array of its eigenvalues.
    """
    lam = event.eigenvalues if isinstance(event, PairwiseEvent) else event
    return craig_product_closed_form(_effective_snrs(lam, sigma2, N0, power))


def upep_numeric(event, sigma2: float, N0: float, power: float = 1.0) -> float:
    lam = event.eigenvalues if isinstance(event, PairwiseEvent) else event
    return craig_product_numeric(_effective_snrs(lam, sigma2, N0, power))


# --- table sums -------------------------------------------------------------

@dataclass(frozen=True)
class _PairSummary:
    signatures: np.ndarray   # (S, n) sorted eigenvalue profiles, zeros = absent
    pair_count: np.ndarray   # ordered pairs per signature
    bit_errors: np.ndarray   # summed Hamming distance per signature


@lru_cache(maxsize=32)
def _pair_summary(spec: SubblockSpec) -> _PairSummary:
    """Group all ordered pairs (B, B_hat != B) by their eigenvalue profile."""
    table = realization_table(spec)
    G = table.shape[0]
    if G > MAX_TABLE_SIZE:
        raise ValueError(f"{spec} has {G} realizations; union bound is capped at {MAX_TABLE_SIZE}")
    lam = np.abs(table[:, None, :] - table[None, :, :]) ** 2
    lam = np.round(np.sort(lam, axis=-1), _EIG_DECIMALS).reshape(G * G, -1)
    labels = np.arange(G)
    errors = np.bitwise_count(labels[:, None] ^ labels[None, :]).ravel()
    off_diag = ~np.eye(G, dtype=bool).ravel()
    sig, inverse = np.unique(lam[off_diag], axis=0, return_inverse=True)
    inverse = inverse.ravel()
    counts = np.bincount(inverse, minlength=len(sig))
    bits = np.bincount(inverse, weights=errors[off_diag], minlength=len(sig))
    return _PairSummary(sig, counts, bits)


def _upep_per_signature(spec, sigma2, N0, power):
    summary = _pair_summary(spec)
    probs = np.array([upep(s, sigma2, N0, power) for s in summary.signatures])
    return summary, probs


def _literal(theory_mode: str) -> bool:
    if theory_mode not in ("folded", "literal"):
        raise ValueError(f"unknown theory mode {theory_mode!r}")
    return theory_mode == "literal"


def sep_fu(spec_fu: SubblockSpec, sigma2_fu: float, N0: float, P_FU: float,
           theory_mode: str = "folded") -> float:
    """Union bound on the far user's subblock error probability, clipped to [0, 1].

    In ``folded`` mode ``P_FU`` scales the effective SNR of every pairwise event;
    in ``literal`` mode the pairwise terms omit it and the sum is multiplied by
    ``sqrt(P_FU)`` instead.
    """
    literal = _literal(theory_mode)
    summary, probs = _upep_per_signature(spec_fu, sigma2_fu, N0, 1.0 if literal else P_FU)
    total = float(np.dot(summary.pair_count, probs)) / spec_fu.G
    if literal:
        total *= np.sqrt(P_FU)
    return float(np.clip(total, 0.0, 1.0))


def union_bound_ber(spec: SubblockSpec, sigma2: float, N0: float, power: float,
                    theory_mode: str = "folded") -> float:
    """Bit-weighted union bound (1/(p G)) sum_B sum_{B_hat} UPEP * e(B, B_hat)."""
    literal = _literal(theory_mode)
    summary, probs = _upep_per_signature(spec, sigma2, N0, 1.0 if literal else power)
    total = float(np.dot(summary.bit_errors, probs)) / (spec.p * spec.G)
    if literal:
        total *= np.sqrt(power)
    return float(np.clip(total, 0.0, 1.0))


def abep_fu_bound(spec_fu: SubblockSpec, sigma2_fu: float, N0: float, P_FU: float,
                  theory_mode: str = "folded") -> float:
    """Far-user BER ignoring near-user interference; a lower bound on the simulated BER."""
    if spec_fu.G == 1:
        return 0.0
    return union_bound_ber(spec_fu, sigma2_fu, N0, P_FU, theory_mode)


def abep_nu(spec_nu: SubblockSpec, spec_fu: SubblockSpec, sigma2_nu: float, N0: float,
            P_NU: float, P_FU: float, theory_mode: str = "folded",
            ps_fu: float | None = None) -> float:
    """Near-user BER approximation with SIC failures counted as coin flips.

    The far-user symbol error probability is evaluated over the NU's own channel
    (SIC runs at the NU) unless ``ps_fu`` is supplied.
    """
    if ps_fu is None:
        ps_fu = sep_fu(spec_fu, sigma2_nu, N0, P_FU, theory_mode)
    if not 0.0 <= ps_fu <= 1.0:
        raise ValueError(f"symbol error probability must lie in [0, 1], got {ps_fu}")
    own = union_bound_ber(spec_nu, sigma2_nu, N0, P_NU, theory_mode)
    return float(np.clip(0.5 * ps_fu + (1.0 - ps_fu) * own, 0.0, 1.0))
