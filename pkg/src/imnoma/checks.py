"""Self-checks behind ``imnoma validate``: codec roundtrips, channel-path
equivalence, SIC cancellation, alpha boundaries, interleaver inverse and
worker-count determinism."""
from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from .channel import draw_channel, observe_freq, propagate_time
from .codec import SubblockSpec, demap_subblock, enumerate_realizations, int_to_bits
from .config import ExperimentConfig, Stopping
from .harness import run_ber_point
from .rx import DetectionResult, detect_fu, detect_nu, sic_cancel, sic_receive
from .tx import (add_cp, assemble_block, deinterleave, interleave, remove_cp, superpose,
                 to_freq_domain, to_time_domain)

REFERENCE_SPECS = (SubblockSpec(4, 1, 4), SubblockSpec(4, 2, 4), SubblockSpec(4, 3, 4),
               SubblockSpec(4, 4, 4), SubblockSpec(4, 4, 2))


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str = ""


def codec_roundtrip(specs=REFERENCE_SPECS) -> CheckResult:
    for spec in specs:
        table = enumerate_realizations(spec)
        for j, r in enumerate(table):
            if not np.array_equal(demap_subblock(r.vector, spec), int_to_bits(j, spec.p)):
                return CheckResult("codec roundtrip", False, f"{spec} label {j}")
            if np.count_nonzero(r.vector) != spec.k:
                return CheckResult("codec roundtrip", False, f"{spec} label {j} sparsity")
    return CheckResult("codec roundtrip", True, f"{len(specs)} specs exhaustive")


def channel_equivalence(N=128, C=16, v=10, trials=20, seed=0) -> CheckResult:
    """Time-domain path vs per-subcarrier model at zero noise."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        x = rng.standard_normal(N) + 1j * rng.standard_normal(N)
        ch = draw_channel(v, 1.0, N, rng)
        y_time = to_freq_domain(remove_cp(propagate_time(add_cp(to_time_domain(x), C), ch, 0.0), C))
        worst = max(worst, float(np.max(np.abs(y_time - observe_freq(x, ch, 0.0)))))
    return CheckResult("time/frequency channel equivalence", worst < 1e-9, f"max deviation {worst:.2e}")


def sic_identity(seed=1) -> CheckResult:
    """Cancelling the true far-user block at zero noise leaves exactly the near-user term."""
    rng = np.random.default_rng(seed)
    near, far = SubblockSpec(4, 3, 4), SubblockSpec(4, 1, 4)
    N, g = 128, 32
    z_nu = assemble_block(rng.integers(0, 2, g * near.p), near, g).z
    fu_labels = rng.integers(0, far.G, g)
    genie = DetectionResult(fu_labels, np.zeros(g), far)
    sb = superpose(z_nu, genie.z_hat(), 0.3)
    h = draw_channel(10, 1.0, N, rng).freq
    r = sic_cancel(observe_freq(sb.x_sc, h, 0.0), h, sb.P_FU, genie)
    dev = float(np.max(np.abs(r - np.sqrt(sb.P_NU) * h * z_nu)))
    nu = detect_nu(r, h, sb.P_NU, near)
    ok = dev < 1e-12 and np.array_equal(nu.z_hat(), z_nu)
    return CheckResult("perfect-SIC cancellation", bool(ok), f"residual {dev:.2e}")


def alpha_boundaries(seed=2) -> CheckResult:
    """alpha=0: FU alone, detected error-free; alpha=1: NU alone, SIC removes nothing."""
    rng = np.random.default_rng(seed)
    spec = SubblockSpec(4, 2, 4)
    N, g = 128, 32
    bits_nu = rng.integers(0, 2, g * spec.p)
    bits_fu = rng.integers(0, 2, g * spec.p)
    z_nu = assemble_block(bits_nu, spec, g).z
    z_fu = assemble_block(bits_fu, spec, g).z
    h = draw_channel(10, 1.0, N, rng).freq
    x0 = superpose(z_nu, z_fu, 0.0)
    fu = detect_fu(observe_freq(x0.x_sc, h, 0.0), h, x0.P_FU, spec)
    ok0 = np.array_equal(x0.x_sc, z_fu) and np.array_equal(fu.bits.ravel(), bits_fu)
    x1 = superpose(z_nu, z_fu, 1.0)
    y1 = observe_freq(x1.x_sc, h, 0.0)
    fu1, nu1 = sic_receive(y1, h, x1.P_NU, x1.P_FU, spec, spec)
    ok1 = (np.array_equal(x1.x_sc, z_nu) and np.array_equal(sic_cancel(y1, h, x1.P_FU, fu1), y1)
           and np.array_equal(nu1.bits.ravel(), bits_nu))
    return CheckResult("alpha boundaries {0, 1}", bool(ok0 and ok1), f"alpha=0 {ok0}, alpha=1 {ok1}")


def interleaver_inverse() -> CheckResult:
    rng = np.random.default_rng(3)
    for n, g in ((4, 32), (4, 2), (8, 8), (2, 64), (4, 1)):
        x = rng.standard_normal(n * g)
        if not np.array_equal(deinterleave(interleave(x, n, g), n, g), x):
            return CheckResult("interleaver inverse", False, f"n={n}, g={g}")
    return CheckResult("interleaver inverse", True, "5 layouts")


def worker_determinism() -> CheckResult:
    """Same seed with one and with two workers gives identical counts."""
    from concurrent.futures import ProcessPoolExecutor
    cfg = ExperimentConfig(near=SubblockSpec(4, 3, 4), far=SubblockSpec(4, 1, 4), alpha=0.3, seed=7)
    details = []
    same = True
    for stop in (Stopping(max_blocks=100, min_errors=0, chunk_blocks=20),
                 Stopping(max_blocks=400, min_errors=60, chunk_blocks=10)):
        a = run_ber_point(replace(cfg, stopping=stop), 20.0)
        with ProcessPoolExecutor(2) as ex:
            b = run_ber_point(replace(cfg, stopping=stop, workers=2), 20.0, executor=ex)
        same &= (a.blocks, a.errors_nu, a.errors_fu) == (b.blocks, b.errors_nu, b.errors_fu)
        details.append(f"{a.blocks} blocks, {a.errors_nu}+{a.errors_fu} errors")
    return CheckResult("determinism across worker counts", same, "; ".join(details))


ALL_CHECKS = (codec_roundtrip, channel_equivalence, sic_identity, alpha_boundaries,
              interleaver_inverse, worker_determinism)


def run_all() -> list[CheckResult]:
    out = []
    for check in ALL_CHECKS:
        t0 = time.perf_counter()
        res = check()
        out.append(replace(res, detail=f"{res.detail} ({time.perf_counter() - t0:.2f} s)"))
    return out
