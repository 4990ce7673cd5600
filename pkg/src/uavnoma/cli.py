"""Command-line entry point: ``uavnoma {sweep,pdf,validate,oracle}``."""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np
import yaml

from . import engine, results
from .config import ConfigError
from .experiment import load_experiment

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_UNREADABLE = 3
EXIT_INVALID = 4
EXIT_ENGINE = 5
EXIT_OUTPUT = 6

POLICIES = {"require-all": "require-all", "fallback": "fallback", "paper-literal": "paper-literal"}

log = logging.getLogger("uavnoma")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True,
                        help="experiment YAML file, or the name of a shipped one (fig2 ... fig6, defaults)")
    common.add_argument("--seed", type=int, help="override master_seed (unsigned 64-bit)")
    common.add_argument("--trials", type=int, help="override trials per grid point")
    common.add_argument("--policy", choices=sorted(POLICIES), help="user-count conditioning policy")
    common.add_argument("-v", "--verbose", action="store_true")

    run = argparse.ArgumentParser(add_help=False)
    run.add_argument("--out", required=True, help="output CSV path")
    run.add_argument("--workers", type=int, default=1, help="worker processes (results do not depend on it)")
    run.add_argument("--exact-gain", action="store_true",
                     help="use the explicit steering-vector inner product instead of the Fejer kernel")

    p = argparse.ArgumentParser(prog="uavnoma", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    sw = sub.add_parser("sweep", parents=[common, run], help="sum-rate grid to CSV")
    sw.add_argument("--unconditional", action="store_true",
                    help="count rejected trials as zero sum rate instead of conditioning on acceptance")
    pdf = sub.add_parser("pdf", parents=[common, run], help="histograms of selected-user statistics")
    pdf.add_argument("--bins", type=int, help="override the histogram bin count")
    sub.add_parser("validate", parents=[common], help="check a config and exit")
    orc = sub.add_parser("oracle", parents=[common],
                         help="frozen-geometry Monte Carlo versus closed-form outage check")
    orc.add_argument("--out", help="optional report CSV path")
    orc.add_argument("--geometries", type=int, default=20)
    return p


def _configs(args):
    exp = load_experiment(args.config)
    configs = exp.configs(master_seed=args.seed, trials=args.trials,
                          **{"plan.k_policy": POLICIES.get(args.policy) if args.policy else None})
    return exp, configs


def _sweep(args, exp, configs) -> int:
    estimates = engine.sweep(configs, workers=args.workers, exact_gain=args.exact_gain,
                             unconditional=args.unconditional)
    rows = [results.ResultRow.from_estimate(c, e) for c, e in zip(configs, estimates)]
    results.write_results(rows, args.out)
    log.info("wrote %d rows to %s", len(rows), args.out)
    return EXIT_OK


def _pdf(args, exp, configs) -> int:
    bins = args.bins or exp.pdf_bins
    raw = engine.simulate(configs, workers=args.workers, exact_gain=args.exact_gain)
    rows = []
    for i, (c, res) in enumerate(zip(configs, raw)):
        try:
            engine.summarize(c, res)
        except engine.ConditioningError as exc:
            raise engine.SweepError(i, exc) from exc
        lo_hi = engine.statistic_range(c, exp.pdf_statistic)
        pdfs = [engine.pdf_from_samples(s, rank, bins, lo_hi)
                for rank, s in zip(c.plan.ordered_user_indices,
                                   engine.selected_statistic(c, res, exp.pdf_statistic)) if s.size]
        rows.extend(results.pdf_rows(i, c, exp.pdf_statistic.value, pdfs))
    results.write_pdfs(rows, args.out)
    return EXIT_OK


def _oracle(args, exp, configs) -> int:
    config = configs[0]
    report = []
    for g in range(args.geometries):
        rng = engine.block_stream(config.master_seed, g, 0)
        positions = engine.frozen_geometry(config, rng)
        report.extend(engine.oracle_check(config, positions, config.trials, rng, g))
    if args.out:
        results.write_oracle(report, args.out)
    failed = [r for r in report if not r.passed]
    for r in report:
        log.info("geometry %d rank %d: analytic %.6f empirical %.6f (sigma %.2e)",
                 r.geometry_index, r.rank, r.analytic, r.empirical, r.sigma)
    print(f"oracle: {len(report) - len(failed)}/{len(report)} within 3 sigma")
    if failed:
        for r in failed:
            print(f"  geometry {r.geometry_index} rank {r.rank}: analytic {r.analytic!r} "
                  f"empirical {r.empirical!r} sigma {r.sigma!r}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    return EXIT_OK


def run_cli(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        exp, configs = _configs(args)
    except (OSError, yaml.YAMLError) as exc:
        print(f"error: cannot read config {args.config}: {exc}", file=sys.stderr)
        return EXIT_UNREADABLE
    except (ConfigError, TypeError) as exc:
        print(f"error: invalid config {args.config}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.command == "validate":
        print(f"ok: {len(configs)} grid point(s)")
        return EXIT_OK
    handler = {"sweep": _sweep, "pdf": _pdf, "oracle": _oracle}[args.command]
    try:
        return handler(args, exp, configs)
    except results.ResultsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OUTPUT
    except (engine.SweepError, engine.ConditioningError, ValueError) as exc:
        print(f"error: simulation failed: {exc}", file=sys.stderr)
        return EXIT_ENGINE


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
