"""Command line entry point: ``curious-trader {simulate,turing,distance}``.

Exit codes: 0 success (``turing``: Indistinguishable), 1 Distinguishable,
2 configuration or parse error, 3 numerical/runtime error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections import Counter
from pathlib import Path

import numpy as np

from . import reports
from .agent import buy_and_hold, sweep
from .config import load_config
from .divergence import bc_discrete
from .errors import ConfigError, ParseError, TooFewSamples, TraderError
from .evaluation import Verdict, turing_test
from .jl_projection import compare_summaries
from .market import generate_gbm, ingest_csv
from .numerics import fit_gaussian_summary

log = logging.getLogger("curious_trader")

EXIT_OK, EXIT_DISTINGUISHABLE, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def run_simulate(config_path, seed: int | None = None, out: str | None = None) -> int:
    try:
        cfg = load_config(config_path)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, str(exc))
    market_seed = cfg.seed if seed is None else seed
    out_dir = Path(out or cfg.output)
    try:
        if cfg.market.gbm is not None:
            series = generate_gbm(cfg.gbm_params(), market_seed)
        else:
            series = ingest_csv(cfg.market.csv)
        reference = reports.read_trackrecord(cfg.reference) if cfg.reference else None
    except (ParseError, OSError) as exc:
        return _fail(EXIT_CONFIG, str(exc))

    params = [a.to_params() for a in cfg.agents]
    risk_free = cfg.evaluation.risk_free
    try:
        ranked = sweep(params, series, risk_free)
        best = ranked[0].run
        w = best.params.window
        if reference is None:
            reference = buy_and_hold(series, w)
        report = turing_test(best.record, reference, bands=cfg.evaluation.bands(),
                             risk_free_per_tick=risk_free)
    except (TraderError, ArithmeticError) as exc:
        return _fail(EXIT_NUMERIC, str(exc))

    out_dir.mkdir(parents=True, exist_ok=True)
    ticks = series.index[w:].tolist()
    reports.write_trackrecord(best.record, out_dir / "trackrecord.csv", ticks)
    reports.write_answers(best.answers, out_dir / "answers.jsonl")
    reports.write_turing_report(report, out_dir / "turing_report.json")
    reports.write_sweep(ranked, out_dir / "sweep_ranking.csv", risk_free)
    log.info("best agent #%d score %.6g; turing verdict %s", ranked[0].index, ranked[0].score,
             report.verdict.value)
    return EXIT_OK


def run_turing(record_a, record_b, threshold: float = 0.05, out: str = ".") -> int:
    try:
        a = reports.read_trackrecord(record_a)
        b = reports.read_trackrecord(record_b)
    except ParseError as exc:
        return _fail(EXIT_CONFIG, str(exc))
    if not threshold > 0:
        return _fail(EXIT_CONFIG, "threshold must be positive")
    try:
        report = turing_test(a, b, threshold)
    except TraderError as exc:
        return _fail(EXIT_NUMERIC, str(exc))
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    reports.write_turing_report(report, out_dir / "turing_report.json")
    print(f"verdict: {report.verdict.value}")
    print(f"distance: {report.pnl_distance.distance!r}")
    return EXIT_OK if report.verdict is Verdict.INDISTINGUISHABLE else EXIT_DISTINGUISHABLE


def _histogram_divergence(a: np.ndarray, b: np.ndarray):
    if a.shape[1] != b.shape[1]:
        raise ParseError("histogram mode needs datasets of equal width")
    ca = Counter(map(tuple, a.tolist()))
    cb = Counter(map(tuple, b.tolist()))
    cats = sorted(set(ca) | set(cb))
    pa = np.array([ca[c] for c in cats], dtype=float) / len(a)
    pb = np.array([cb[c] for c in cats], dtype=float) / len(b)
    # renormalize to absorb division roundoff before the strict simplex check
    return bc_discrete(pa / pa.sum(), pb / pb.sum())


def run_distance(dataset_a, dataset_b, epsilon: float = 0.5, seed: int = 0,
                 histogram: bool = False) -> int:
    try:
        a = reports.read_dataset(dataset_a)
        b = reports.read_dataset(dataset_b)
        if histogram:
            div = _histogram_divergence(a, b)
            k = attempts = 0
        else:
            sa, sb = fit_gaussian_summary(a), fit_gaussian_summary(b)
    except (ParseError, TooFewSamples) as exc:
        return _fail(EXIT_CONFIG, str(exc))
    if not histogram:
        if not 0 < epsilon < 1:
            return _fail(EXIT_CONFIG, "epsilon must lie in (0, 1)")
        try:
            div, pmap = compare_summaries(sa, sb, epsilon, seed)
        except TraderError as exc:
            return _fail(EXIT_NUMERIC, str(exc))
        k, attempts = pmap.k, pmap.attempts
    print(f"coefficient: {div.coefficient!r}")
    print(f"distance: {div.distance!r}")
    print(f"k: {k}")
    print(f"attempts: {attempts}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="curious-trader", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run the agent sweep and write reports")
    sim.add_argument("--config", required=True)
    sim.add_argument("--seed", type=int, help="override the market seed")
    sim.add_argument("--out", help="override the output directory")

    tur = sub.add_parser("turing", help="indistinguishability test between two track records")
    tur.add_argument("record_a")
    tur.add_argument("record_b")
    tur.add_argument("--threshold", type=float, default=0.05)
    tur.add_argument("--out", default=".")

    dist = sub.add_parser("distance", help="Bhattacharyya distance between two datasets")
    dist.add_argument("dataset_a")
    dist.add_argument("dataset_b")
    dist.add_argument("--epsilon", type=float, default=0.5)
    dist.add_argument("--seed", type=int, default=0)
    dist.add_argument("--histogram", action="store_true",
                      help="compare empirical distributions of distinct rows")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "simulate":
        return run_simulate(args.config, args.seed, args.out)
    if args.command == "turing":
        return run_turing(args.record_a, args.record_b, args.threshold, args.out)
    return run_distance(args.dataset_a, args.dataset_b, args.epsilon, args.seed, args.histogram)


if __name__ == "__main__":
    sys.exit(main())
