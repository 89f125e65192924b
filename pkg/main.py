# main.py
"""
CLI entry point for the QDP lab.

Usage:
    python main.py capacity --q 2 --noise preset:bernoulli:0.1
    python main.py pgm-sweep --q 2 --n 14 --noise preset:bernoulli:0.1 --trials 100 --svg sweep.svg
    python main.py sample-dual --q 2 --n 12 --rate 0.5 --trials 50 --samples 1000
    python main.py rank-lab --q 2 --noise preset:rank:2:2:1
    python main.py verify --suite pgm
"""

import argparse
import json
import logging
import sys
from typing import Optional, Sequence

import galois

from experiments import (
    build_noise,
    noise_entropy_rate,
    run_capacity,
    run_pgm_sweep,
    run_rank_lab,
    run_sample_dual,
)
from noise import parse_noise_spec
from plots import plot_sweep, plot_weights
from schemas import ExperimentConfig, FieldDescriptor, rows_to_csv
from utils import setup_logging
from verification import run_verification

logger = logging.getLogger(__name__)

SUBCOMMANDS = ("capacity", "pgm-sweep", "sample-dual", "rank-lab", "verify")


def build_parser() -> argparse.ArgumentParser:
    """Argument parser shared by every subcommand."""
    parser = argparse.ArgumentParser(
        prog="qdp-lab",
        description="Exact simulation and verification lab for the Quantum Decoding Problem.",
    )
    parser.add_argument("subcommand", choices=SUBCOMMANDS, help="What to run")
    parser.add_argument(
        "--q",
        type=int,
        default=2,
        help="Field order q = p^s, or the characteristic p when --s is given (default: 2)",
    )
    parser.add_argument("--s", type=int, default=None, help="Extension degree; --q is then the prime p")
    parser.add_argument("--n", type=int, default=None, help="Code length")
    dimension = parser.add_mutually_exclusive_group()
    dimension.add_argument("--k", type=int, default=None, help="Generator rows")
    dimension.add_argument("--rate", type=float, default=None, help="Rate R, k = floor(R n)")
    parser.add_argument(
        "--noise",
        default="preset:bernoulli:0.1",
        help="Noise spec as JSON or preset:<noiseless|uniform|bernoulli:p|gibbs-hamming:lambda|rank:a:b:t>",
    )
    parser.add_argument("--eps", type=float, default=0.1, help="Typicality slack (default: 0.1)")
    parser.add_argument("--trials", type=int, default=100, help="Random codes per k, or seeds (default: 100)")
    parser.add_argument("--samples", type=int, default=1000, help="Samples per seed (default: 1000)")
    parser.add_argument("--seed", type=int, default=0, help="Master seed (default: 0)")
    parser.add_argument("--out", default=None, help="Output file (default: stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv", help="Row output format")
    parser.add_argument("--svg", default=None, help="Also write an SVG plot to this path")
    parser.add_argument("--workers", type=int, default=1, help="Concurrent trial workers (default: 1)")
    parser.add_argument("--suite", default=None, help="Comma-separated verification suites")
    parser.add_argument("--debug", action="store_true", help="Enable debug logging")
    return parser


def field_descriptor(q: int, s: Optional[int]) -> FieldDescriptor:
    """
    Resolve the --q/--s pair to {p, s}.

    Args:
        q: Field order, or the characteristic when s is given.
        s: Extension degree.

    Returns:
        FieldDescriptor.
    """
    if s is not None:
        if not galois.is_prime(q):
            raise ValueError(f"--q must be prime when --s is given, got {q}")
        return FieldDescriptor(p=q, s=s)
    if q < 2 or not galois.is_prime_power(q):
        raise ValueError(f"--q must be a prime power, got {q}")
    primes, exponents = galois.factors(q)
    return FieldDescriptor(p=int(primes[0]), s=int(exponents[0]))


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    """Validate parsed arguments into an ExperimentConfig."""
    return ExperimentConfig(
        subcommand=args.subcommand,
        field=field_descriptor(args.q, args.s),
        n=args.n,
        k=args.k,
        rate=args.rate,
        noise=parse_noise_spec(args.noise),
        eps=args.eps,
        trials=args.trials,
        samples=args.samples,
        seed=args.seed,
        out=args.out,
        format=args.format,
        svg=args.svg,
        workers=args.workers,
        suite=args.suite,
    )


def _render_rows(rows: list, kind: str, fmt: str) -> str:
    if fmt == "json":
        return json.dumps([r.model_dump() for r in rows], indent=2) + "\n"
    return rows_to_csv(rows, kind)


def dispatch(cfg: ExperimentConfig) -> tuple[str, int]:
    """
    Run one subcommand.

    Args:
        cfg: Validated configuration.

    Returns:
        Tuple of (output text, exit status).
    """
    if cfg.subcommand == "capacity":
        return json.dumps(run_capacity(cfg).model_dump(), indent=2) + "\n", 0

    if cfg.subcommand == "rank-lab":
        return json.dumps(run_rank_lab(cfg).model_dump(), indent=2) + "\n", 0

    if cfg.subcommand == "pgm-sweep":
        rows = run_pgm_sweep(cfg)
        if cfg.svg:
            f = build_noise(cfg, cfg.n)
            capacity = noise_entropy_rate(f) if f.kind in ("product", "rank") else None
            plot_sweep(rows, cfg.svg, capacity)
        return _render_rows(rows, "sweep", cfg.format), 0

    if cfg.subcommand == "sample-dual":
        rows = run_sample_dual(cfg)
        if cfg.svg:
            plot_weights(rows, cfg.svg)
        return _render_rows(rows, "samples", cfg.format), 0

    suites = [name.strip() for name in cfg.suite.split(",")] if cfg.suite else None
    report = run_verification(suites)
    logger.info("Verification: %d checks, %d failed", len(report.checks), report.total_failures)
    return json.dumps(report.to_json(), indent=2) + "\n", 0 if report.passed else 1


def write_output(text: str, out: Optional[str]) -> None:
    """Write to the output file, or stdout when none is given."""
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    logger.info("Wrote %s", out)


def main(argv: Optional[Sequence[str]] = None) -> None:
    """Parse arguments, run the subcommand, and output results."""
    args = build_parser().parse_args(argv)

    setup_logging(level=logging.DEBUG if args.debug else logging.INFO)

    logger.info("Command: %s", args.subcommand)

    try:
        cfg = config_from_args(args)
        text, status = dispatch(cfg)
        write_output(text, cfg.out)

    except Exception as e:
        logger.error("Command failed: %s", e)
        print(json.dumps({"error": str(e)}), file=sys.stderr)
        sys.exit(1)

    if status:
        sys.exit(status)


if __name__ == "__main__":
    main()
