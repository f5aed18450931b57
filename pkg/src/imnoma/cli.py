"""Command-line entry point.

    imnoma run            one (SNR, alpha) point
    imnoma sweep          SNR sweep with theory columns
    imnoma optimize-alpha alpha grid search at a fixed SNR
    imnoma theory         union-bound curves only, no simulation
    imnoma baseline       rate-matched classical OFDM-NOMA sweep
    imnoma validate       built-in invariant checks

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""
from __future__ import annotations

import argparse
import logging
import sys

from . import checks, harness
from .config import ConfigError, ExperimentConfig, load_config

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="imnoma", description="OFDM-IM NOMA link simulator and BER analysis")
    sub = p.add_subparsers(dest="verb", required=True)
    for verb in ("run", "sweep", "optimize-alpha", "theory", "baseline", "validate"):
        sp = sub.add_parser(verb)
        sp.add_argument("--config", help="INI config file (built-in defaults when omitted)")
        sp.add_argument("--out", help="CSV output path")
        sp.add_argument("--append", action="store_true", help="append rows to an existing CSV")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--workers", type=int)
        sp.add_argument("--snr", type=float, nargs="+", help="SNR in dB (list for sweeps)")
        sp.add_argument("--alpha", type=float)
        sp.add_argument("--trials", type=int, help="maximum OFDM blocks per point")
        sp.add_argument("-v", "--verbose", action="store_true")
    return p


def _load(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    snr_grid = tuple(args.snr) if args.snr and args.verb not in ("run", "optimize-alpha") else None
    return cfg.with_overrides(seed=args.seed, workers=args.workers, alpha=args.alpha,
                              max_blocks=args.trials, snr_grid=snr_grid)


def _emit(records, args):
    if args.out:
        harness.write_csv(records, args.out, append=args.append)
        print(f"wrote {len(records)} records to {args.out}")
    else:
        w = sys.stdout
        w.write(",".join(harness.CSV_HEADER) + "\n")
        for r in records:
            w.write(",".join(r.row()) + "\n")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = _load(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.verb == "validate":
            results = checks.run_all()
            for r in results:
                print(f"[{'PASS' if r.ok else 'FAIL'}] {r.name}: {r.detail}")
            return EXIT_OK if all(r.ok for r in results) else EXIT_RUNTIME
        if args.verb == "run":
            snr = args.snr[0] if args.snr else cfg.snr_grid[-1]
            res = harness.run_ber_point(cfg, snr)
            _emit(harness.point_records(cfg, res, harness.theory_point(cfg, snr, cfg.alpha)), args)
        elif args.verb == "sweep":
            _emit(harness.sweep_snr(cfg), args)
        elif args.verb == "theory":
            _emit(harness.theory_records(cfg), args)
        elif args.verb == "baseline":
            _emit(harness.run_baseline_ofdm_noma(cfg), args)
        elif args.verb == "optimize-alpha":
            snr = args.snr[0] if args.snr else 30.0
            search = harness.optimize_alpha(cfg, snr_db=snr)
            print(f"{cfg.config_id}: FU{cfg.far} NU{cfg.near} at {snr:g} dB")
            print(search.table())
            print(f"alpha* = {search.alpha_star:.2f}")
            if args.out:
                harness.write_csv(harness.alpha_search_records(cfg, search), args.out, append=args.append)
    except harness.InfeasibleRateMatch as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
