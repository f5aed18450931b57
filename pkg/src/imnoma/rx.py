"""Receivers: far-user direct ML detection and near-user SIC followed by ML detection.

All detectors work on deinterleaved observations and search the full realization
table of the user being decoded. Batched inputs carry subblocks along the
leading axes, subcarriers within a subblock along the last axis.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codec import SubblockSpec, int_to_bits, realization_table


@dataclass(frozen=True)
class DetectionResult:
    labels: np.ndarray  # chosen table row per subblock
    metrics: np.ndarray
    spec: SubblockSpec

    @property
    def bits(self) -> np.ndarray:
        return recover_bits(self, self.spec)

    def z_hat(self) -> np.ndarray:
        """Reconstructed N-length block (last axis)."""
        table = realization_table(self.spec)
        x = table[self.labels]
        return x.reshape(x.shape[:-2] + (-1,))


def ml_metrics(y_sub, h_sub, power: float, table) -> np.ndarray:
    """``||y - sqrt(power) * h * b||^2`` for every row ``b`` of ``table``.

    ``y_sub`` and ``h_sub`` have shape (..., n); the result has shape (..., G).
    """
    y_sub = np.asarray(y_sub)
    h_sub = np.asarray(h_sub)
    table = np.asarray(table)
    amp = np.sqrt(power)
    cross = (np.conj(y_sub) * h_sub) @ table.T
    energy = (np.abs(h_sub) ** 2) @ (np.abs(table) ** 2).T
    base = np.sum(np.abs(y_sub) ** 2, axis=-1, keepdims=True)
    return base - 2.0 * amp * cross.real + power * energy


def detect_subblock_ml(y_sub, h_sub, power: float, table) -> tuple:
    """ML search over a realization table; ties go to the lowest row.

    Works on a single subblock or a batch. Returns ``(index, metric)``.
    """
    d = ml_metrics(y_sub, h_sub, power, table)
    idx = np.argmin(d, axis=-1)
    metric = np.maximum(np.take_along_axis(d, idx[..., None], axis=-1)[..., 0], 0.0)
    if idx.ndim == 0:
        return int(idx), float(metric)
    return idx, metric


def _split(v, n):
    v = np.asarray(v)
    if v.shape[-1] % n:
        raise ValueError(f"length {v.shape[-1]} is not a multiple of subblock size {n}")
    return v.reshape(v.shape[:-1] + (v.shape[-1] // n, n))


def detect_user(y, h, power: float, spec: SubblockSpec) -> DetectionResult:
    """Per-subblock ML detection of one user's block (shared by all three rules)."""
    table = realization_table(spec)
    labels, metrics = detect_subblock_ml(_split(y, spec.n), _split(h, spec.n), power, table)
    return DetectionResult(np.asarray(labels), np.asarray(metrics), spec)


def detect_fu(y_fu, h_fu, P_FU: float, spec_fu: SubblockSpec) -> DetectionResult:
    """Far user: decode directly, treating near-user signal as absent."""
    return detect_user(y_fu, h_fu, P_FU, spec_fu)


def sic_cancel(y_nu, h_nu, P_FU: float, fu_detection: DetectionResult) -> np.ndarray:
    """Remove the reconstructed far-user contribution ``sqrt(P_FU) * h_nu * z_hat``."""
    return np.asarray(y_nu) - np.sqrt(P_FU) * np.asarray(h_nu) * fu_detection.z_hat()


def detect_nu(r_nu, h_nu, P_NU: float, spec_nu: SubblockSpec) -> DetectionResult:
    return detect_user(r_nu, h_nu, P_NU, spec_nu)


def sic_receive(y_nu, h_nu, P_NU: float, P_FU: float, spec_nu: SubblockSpec,
                spec_fu: SubblockSpec) -> tuple[DetectionResult, DetectionResult]:
    """Near-user receiver: decode FU from the NU's own observation, cancel, decode NU."""
    fu_at_nu = detect_user(y_nu, h_nu, P_FU, spec_fu)
    r_nu = sic_cancel(y_nu, h_nu, P_FU, fu_at_nu)
    return fu_at_nu, detect_nu(r_nu, h_nu, P_NU, spec_nu)


def recover_bits(result: DetectionResult, spec: SubblockSpec) -> np.ndarray:
    labels = np.asarray(result.labels)
    if spec.p == 0:
        return np.zeros(labels.shape[:-1] + (0,), dtype=np.uint8)
    shifts = np.arange(spec.p - 1, -1, -1)
    bits = ((labels[..., None] >> shifts) & 1).astype(np.uint8)
    return bits.reshape(labels.shape[:-1] + (-1,))


def label_bits(label: int, spec: SubblockSpec) -> np.ndarray:
    return int_to_bits(int(label), spec.p)
