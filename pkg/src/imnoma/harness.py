"""Monte Carlo BER engine, SNR sweeps, power-allocation search and the OFDM-NOMA baseline.

Each BER point is simulated in fixed-size chunks of OFDM blocks. Chunk ``i`` of
the point at SNR ``s`` draws from its own stream seeded by ``(seed, s, i)``, so
results do not depend on how many workers run the chunks. The stream does not
depend on alpha: every point of an alpha grid sees the same bits, channels and
noise, which keeps the grid comparison free of independent sampling noise.
"""
from __future__ import annotations

import csv
import logging
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import analysis
from .channel import crandn, frequency_response
from .codec import SubblockSpec, realization_table
from .config import ExperimentConfig
from .rx import detect_subblock_ml
from .tx import deinterleave, interleave

log = logging.getLogger(__name__)

CSV_HEADER = ("config_id", "user", "snr_db", "alpha", "bits", "errors", "ber", "theory", "seconds")


class InfeasibleRateMatch(ValueError):
    pass


@dataclass(frozen=True)
class ChunkCounts:
    blocks: int
    errors_nu: int
    errors_fu: int


@dataclass(frozen=True)
class PointResult:
    snr_db: float
    alpha: float
    blocks: int
    bits_nu: int
    bits_fu: int
    errors_nu: int
    errors_fu: int
    stopped_by: str  # "min_errors" or "max_blocks"
    seconds: float

    @property
    def ber_nu(self) -> float:
        return self.errors_nu / self.bits_nu

    @property
    def ber_fu(self) -> float:
        return self.errors_fu / self.bits_fu


@dataclass(frozen=True)
class BerRecord:
    config_id: str
    user: str
    snr_db: float
    alpha: float
    bits: int
    errors: int
    ber: float
    theory: float | None = None
    seconds: float = 0.0
    stopped_by: str = ""

    def row(self) -> list[str]:
        def g(x):
            return "" if x is None else f"{x:.6g}"
        return [self.config_id, self.user, g(self.snr_db), g(self.alpha), str(self.bits),
                str(self.errors), g(self.ber), g(self.theory), g(self.seconds)]


# --- one chunk ------------------------------------------------------------------

def chunk_rng(seed: int, snr_db: float, chunk: int) -> np.random.Generator:
    point_key = zlib.crc32(f"{float(snr_db):.6f}".encode())
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, point_key, chunk])))


def simulate_chunk(cfg: ExperimentConfig, snr_db: float, alpha: float, chunk: int, blocks: int) -> ChunkCounts:
    """Run ``blocks`` OFDM blocks through the full two-user link."""
    rng = chunk_rng(cfg.seed, snr_db, chunk)
    s = cfg.system
    N = s.N
    near, far = cfg.near, cfg.far
    g_nu, g_fu = N // near.n, N // far.n
    n_il = cfg.interleaver_n
    g_il = N // n_il
    P_NU, P_FU = cfg.effective_powers(alpha)
    N0 = 10.0 ** (-snr_db / 10.0)
    t_nu, t_fu = realization_table(near), realization_table(far)

    lab_nu = rng.integers(0, near.G, size=(blocks, g_nu))
    lab_fu = rng.integers(0, far.G, size=(blocks, g_fu))
    x_sc = np.sqrt(P_NU) * t_nu[lab_nu].reshape(blocks, N) + np.sqrt(P_FU) * t_fu[lab_fu].reshape(blocks, N)
    x_tx = interleave(x_sc, n_il, g_il)

    h_nu = frequency_response(crandn(rng, (blocks, s.v), s.sigma2_nu / s.v), N)
    h_fu = frequency_response(crandn(rng, (blocks, s.v), s.sigma2_fu / s.v), N)
    y_nu = h_nu * x_tx + crandn(rng, (blocks, N), N0)
    y_fu = h_fu * x_tx + crandn(rng, (blocks, N), N0)

    y_nu, h_nu, y_fu, h_fu = (deinterleave(a, n_il, g_il) for a in (y_nu, h_nu, y_fu, h_fu))

    def sub(a, n):
        return a.reshape(blocks, N // n, n)

    # far user: direct ML, NU signal treated as absent
    fu_hat, _ = detect_subblock_ml(sub(y_fu, far.n), sub(h_fu, far.n), P_FU, t_fu)
    # near user: decode FU on its own channel, cancel, decode itself
    fu_sic, _ = detect_subblock_ml(sub(y_nu, far.n), sub(h_nu, far.n), P_FU, t_fu)
    r_nu = y_nu - np.sqrt(P_FU) * h_nu * t_fu[fu_sic].reshape(blocks, N)
    nu_hat, _ = detect_subblock_ml(sub(r_nu, near.n), sub(h_nu, near.n), P_NU, t_nu)

    return ChunkCounts(
        blocks=blocks,
        errors_nu=int(np.bitwise_count(nu_hat ^ lab_nu).sum()),
        errors_fu=int(np.bitwise_count(fu_hat ^ lab_fu).sum()),
    )


def _chunk_job(args):
    return simulate_chunk(*args)


# --- BER point -----------------------------------------------------------------

def run_ber_point(cfg: ExperimentConfig, snr_db: float, alpha: float | None = None,
                  executor=None) -> PointResult:
    """Simulate one (SNR, alpha) point until both users reach ``min_errors`` or the block cap."""
    alpha = cfg.alpha if alpha is None else float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    st = cfg.stopping
    n_chunks = -(-st.max_blocks // st.chunk_blocks)
    sizes = [min(st.chunk_blocks, st.max_blocks - i * st.chunk_blocks) for i in range(n_chunks)]
    wave = cfg.workers if executor is not None else 1
    t0 = time.perf_counter()
    blocks = e_nu = e_fu = 0
    stopped_by = "max_blocks"
    i = 0
    while i < n_chunks:
        jobs = [(cfg, snr_db, alpha, j, sizes[j]) for j in range(i, min(i + wave, n_chunks))]
        results = executor.map(_chunk_job, jobs) if executor is not None else map(_chunk_job, jobs)
        done = False
        # fixed-order reduction; chunks past the stopping point are discarded
        for res in results:
            if done:
                continue
            blocks += res.blocks
            e_nu += res.errors_nu
            e_fu += res.errors_fu
            if st.min_errors and e_nu >= st.min_errors and e_fu >= st.min_errors:
                stopped_by = "min_errors"
                done = True
        i += len(jobs)
        if done:
            break
    g_nu, g_fu = cfg.system.N // cfg.near.n, cfg.system.N // cfg.far.n
    return PointResult(
        snr_db=float(snr_db), alpha=alpha, blocks=blocks,
        bits_nu=blocks * g_nu * cfg.near.p, bits_fu=blocks * g_fu * cfg.far.p,
        errors_nu=e_nu, errors_fu=e_fu, stopped_by=stopped_by,
        seconds=time.perf_counter() - t0,
    )


class _Pool:
    """Process pool when more than one worker is requested, otherwise nothing."""

    def __init__(self, workers: int):
        self.executor = ProcessPoolExecutor(workers) if workers > 1 else None

    def __enter__(self):
        return self.executor

    def __exit__(self, *exc):
        if self.executor is not None:
            self.executor.shutdown()


# --- theory -----------------------------------------------------------------------

def theory_point(cfg: ExperimentConfig, snr_db: float, alpha: float) -> tuple[float, float]:
    """``(NU approximation, FU lower bound)`` from the union-bound analysis."""
    N0 = 10.0 ** (-snr_db / 10.0)
    P_NU, P_FU = cfg.effective_powers(alpha)
    s = cfg.system
    if alpha == 0.0:
        nu = 0.5
    else:
        nu = analysis.abep_nu(cfg.near, cfg.far, s.sigma2_nu, N0, P_NU, P_FU, cfg.theory_mode)
    fu = 0.5 if alpha == 1.0 else analysis.abep_fu_bound(cfg.far, s.sigma2_fu, N0, P_FU, cfg.theory_mode)
    return nu, fu


def theory_records(cfg: ExperimentConfig, alpha: float | None = None) -> list[BerRecord]:
    alpha = cfg.alpha if alpha is None else alpha
    out = []
    for snr in cfg.snr_grid:
        t0 = time.perf_counter()
        nu, fu = theory_point(cfg, snr, alpha)
        dt = time.perf_counter() - t0
        out.append(BerRecord(cfg.config_id, "NU", snr, alpha, 0, 0, float("nan"), nu, dt))
        out.append(BerRecord(cfg.config_id, "FU", snr, alpha, 0, 0, float("nan"), fu, dt))
    return out


# --- experiments ----------------------------------------------------------------

def point_records(cfg: ExperimentConfig, res: PointResult, theory: tuple[float, float] | None = None,
                  config_id: str | None = None) -> list[BerRecord]:
    cid = config_id or cfg.config_id
    th_nu, th_fu = theory if theory is not None else (None, None)
    return [
        BerRecord(cid, "NU", res.snr_db, res.alpha, res.bits_nu, res.errors_nu, res.ber_nu, th_nu,
                  res.seconds, res.stopped_by),
        BerRecord(cid, "FU", res.snr_db, res.alpha, res.bits_fu, res.errors_fu, res.ber_fu, th_fu,
                  res.seconds, res.stopped_by),
    ]


def sweep_snr(cfg: ExperimentConfig, alpha: float | None = None, with_theory: bool = True) -> list[BerRecord]:
    alpha = cfg.alpha if alpha is None else alpha
    records = []
    with _Pool(cfg.workers) as ex:
        for snr in cfg.snr_grid:
            res = run_ber_point(cfg, snr, alpha, executor=ex)
            th = theory_point(cfg, snr, alpha) if with_theory else None
            log.info("%s snr=%g alpha=%g ber_nu=%.3e ber_fu=%.3e (%d blocks, %s)", cfg.config_id, snr,
                     alpha, res.ber_nu, res.ber_fu, res.blocks, res.stopped_by)
            records.extend(point_records(cfg, res, th))
    return records


def average_ber(p_fu: int, ber_fu: float, p_nu: int, ber_nu: float) -> float:
    """Bit-budget weighted mean of the two users' BERs."""
    return (p_fu * ber_fu + p_nu * ber_nu) / (p_fu + p_nu)


@dataclass(frozen=True)
class AlphaSearch:
    alpha_star: float
    alphas: tuple[float, ...]
    ber_nu: tuple[float, ...]
    ber_fu: tuple[float, ...]
    avg_ber: tuple[float, ...]
    points: tuple[PointResult, ...]

    def table(self) -> str:
        lines = [f"{'alpha':>6}  {'BER_NU':>11}  {'BER_FU':>11}  {'Avg_BER':>11}"]
        for a, n, f, m in zip(self.alphas, self.ber_nu, self.ber_fu, self.avg_ber):
            mark = "  *" if a == self.alpha_star else ""
            lines.append(f"{a:6.2f}  {n:11.4e}  {f:11.4e}  {m:11.4e}{mark}")
        return "\n".join(lines)


def optimize_alpha(cfg: ExperimentConfig, snr_db: float = 30.0, grid=None) -> AlphaSearch:
    """Grid search for the power allocation factor minimising the average BER (ties -> smaller alpha)."""
    alphas = tuple(float(a) for a in (cfg.alphas() if grid is None else grid))
    if not alphas:
        raise ValueError("alpha grid is empty")
    points = []
    with _Pool(cfg.workers) as ex:
        for a in alphas:
            points.append(run_ber_point(cfg, snr_db, a, executor=ex))
    avg = tuple(average_ber(cfg.far.p, p.ber_fu, cfg.near.p, p.ber_nu) for p in points)
    best = min(range(len(alphas)), key=lambda i: (avg[i], alphas[i]))
    return AlphaSearch(alphas[best], alphas, tuple(p.ber_nu for p in points),
                       tuple(p.ber_fu for p in points), avg, tuple(points))


def alpha_search_records(cfg: ExperimentConfig, search: AlphaSearch) -> list[BerRecord]:
    out = []
    for p, m in zip(search.points, search.avg_ber):
        out.extend(point_records(cfg, p))
        out.append(BerRecord(cfg.config_id, "AVG", p.snr_db, p.alpha, p.bits_nu + p.bits_fu,
                             p.errors_nu + p.errors_fu, m, None, p.seconds, p.stopped_by))
    return out


# --- classical OFDM-NOMA ---------------------------------------------------------

def rate_matched_baseline(spec: SubblockSpec, M: int | None = None) -> SubblockSpec:
    """All-active subblock of the same size carrying the same number of bits."""
    if M is not None:
        out = SubblockSpec(spec.n, spec.n, M)
        if out.p != spec.p:
            raise InfeasibleRateMatch(f"baseline M={M} carries {out.p} bits per subblock, {spec} carries {spec.p}")
        return out
    if spec.p % spec.n:
        raise InfeasibleRateMatch(
            f"{spec} carries {spec.p} bits per {spec.n} subcarriers; no constellation matches it with all subcarriers active")
    return SubblockSpec(spec.n, spec.n, 1 << (spec.p // spec.n))


def baseline_config(cfg: ExperimentConfig) -> ExperimentConfig:
    near = rate_matched_baseline(cfg.near, cfg.baseline_near_M)
    far = rate_matched_baseline(cfg.far, cfg.baseline_far_M)
    alpha = cfg.alpha if cfg.baseline_alpha is None else cfg.baseline_alpha
    return replace(cfg, near=near, far=far, alpha=alpha, config_id=f"{cfg.config_id}-ofdm-noma")


def run_baseline_ofdm_noma(cfg: ExperimentConfig, with_theory: bool = False) -> list[BerRecord]:
    """SNR sweep of classical OFDM-NOMA at the same spectral efficiency as ``cfg``."""
    return sweep_snr(baseline_config(cfg), with_theory=with_theory)


# --- persistence ------------------------------------------------------------------

def write_csv(records, path, append: bool = False) -> None:
    path = Path(path)
    fresh = not append or not path.exists() or path.stat().st_size == 0
    with path.open("w" if fresh else "a", newline="") as fh:
        w = csv.writer(fh)
        if fresh:
            w.writerow(CSV_HEADER)
        for r in records:
            w.writerow(r.row())


def read_csv(path) -> list[BerRecord]:
    out = []
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(BerRecord(
                config_id=row["config_id"], user=row["user"], snr_db=float(row["snr_db"]),
                alpha=float(row["alpha"]), bits=int(row["bits"]), errors=int(row["errors"]),
                ber=float(row["ber"]), theory=float(row["theory"]) if row["theory"] else None,
                seconds=float(row["seconds"]),
            ))
    return out
