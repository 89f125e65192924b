# experiments.py
"""
Experiment orchestration for the QDP lab.

Fans independent trials out over a bounded pool of worker threads and
merges the results by trial index, so output never depends on scheduling.
"""

import asyncio
import logging
from typing import Any, Callable, Optional, Sequence

import numpy as np
import pandas as pd

import config
from analysis import (
    hirschman_check,
    holevo_capacity,
    rank_entropy_per_symbol,
    rank_gv_distance,
    rank_params_of,
    rank_shell_masses,
    shannon_capacity,
)
from codes import random_code
from fq_core import FieldSpec, make_field
from noise import (
    describe_noise,
    gaussian_binomial,
    make_rank_params,
    noise_from_spec,
    noise_weight_function,
    rank_noise,
)
from pgm import pgm_success
from sampler import SeedOutcome, min_weight_trial
from schemas import CapacityReport, ExperimentConfig, RankLabReport, RankNoiseSpec, SampleRow, SweepRow
from spectral import AmplitudeFn, dft
from utils import CapExceededError, check_cap, derive_seed

logger = logging.getLogger(__name__)


async def run_trial(
    fn: Callable[..., Any],
    args: tuple,
    semaphore: asyncio.Semaphore,
    trial_index: int,
) -> Any:
    """
    Run one pure trial function in a worker thread.

    Args:
        fn: Trial function.
        args: Positional arguments for fn.
        semaphore: Concurrency control semaphore.
        trial_index: Index of this trial for logging.

    Returns:
        Whatever fn returns.
    """
    async with semaphore:
        logger.debug("Starting trial %d", trial_index)
        return await asyncio.to_thread(fn, *args)


async def fan_out_async(fn: Callable[..., Any], arg_list: Sequence[tuple], workers: int) -> list[Any]:
    """
    Run fn over every argument tuple with at most `workers` in flight.

    Args:
        fn: Trial function.
        arg_list: One argument tuple per trial.
        workers: Concurrency limit.

    Returns:
        Results in the order of arg_list.
    """
    semaphore = asyncio.Semaphore(workers)
    tasks = [run_trial(fn, args, semaphore, i) for i, args in enumerate(arg_list)]
    return await asyncio.gather(*tasks)


def fan_out(fn: Callable[..., Any], arg_list: Sequence[tuple], workers: int = config.WORKERS) -> list[Any]:
    """Synchronous wrapper around fan_out_async."""
    return asyncio.run(fan_out_async(fn, arg_list, workers))


def build_noise(cfg: ExperimentConfig, n: int) -> AmplitudeFn:
    """Noise amplitude of a config on F_q^n."""
    field = make_field(cfg.field.p, cfg.field.s)
    return noise_from_spec(field, n, cfg.noise)


def noise_entropy_rate(f: AmplitudeFn) -> float:
    """Holevo capacity of a product noise, or (1 + t/a)(1 - t/b) for rank noise."""
    if f.kind == "product":
        return holevo_capacity(f.field, f.g)
    if f.kind == "rank":
        return rank_entropy_per_symbol(rank_params_of(f))[0]
    raise ValueError("entropy rate needs a product or rank amplitude")


# PGM sweep


def pgm_trial(f: AmplitudeFn, k: int, seed: int) -> float:
    """P_PGM of one random code drawn with the given seed."""
    code = random_code(f.field, f.n, k, seed)
    return pgm_success(code, f).success


def run_pgm_sweep(cfg: ExperimentConfig) -> list[SweepRow]:
    """
    Mean and population std of P_PGM over `trials` random codes per k.

    Sweeps k = 1..n-1, or only the configured k.

    Args:
        cfg: Validated configuration.

    Returns:
        SweepRows sorted by k.
    """
    n = cfg.n
    f = build_noise(cfg, n)
    f.power_spectrum  # shared by the worker threads
    ks = [cfg.resolved_k()] if cfg.k is not None or cfg.rate is not None else list(range(1, n))
    arg_list = [(f, k, derive_seed(cfg.seed, k, trial)) for k in ks for trial in range(cfg.trials)]
    logger.info("PGM sweep: q=%d n=%d, %d values of k, %d trials each", f.field.q, n, len(ks), cfg.trials)

    values = fan_out(pgm_trial, arg_list, cfg.workers)
    frame = pd.DataFrame({"k": [args[1] for args in arg_list], "P_PGM": values})
    stats = frame.groupby("k", sort=True)["P_PGM"].agg(mean="mean", std=lambda s: s.std(ddof=0))

    kind, param = describe_noise(cfg.noise)
    rows = []
    for k, row in stats.iterrows():
        logger.info("Sweep k=%d: mean P_PGM=%.6f", k, row["mean"])
        rows.append(
            SweepRow(
                q=f.field.q,
                n=n,
                k=int(k),
                noise_kind=kind,
                noise_param=param,
                seed=cfg.seed,
                trials=cfg.trials,
                P_PGM_mean=float(row["mean"]),
                P_PGM_std=float(row["std"]),
            )
        )
    return rows


# Dual sampling


def run_sample_dual(cfg: ExperimentConfig) -> list[SampleRow]:
    """
    Minimum-weight dual sampling, one row per seed index 0..trials-1.

    Args:
        cfg: Validated configuration.

    Returns:
        SampleRows sorted by seed index.
    """
    n, k = cfg.n, cfg.resolved_k()
    f = build_noise(cfg, n)
    f.power_spectrum
    weight = noise_weight_function(f.field, cfg.noise)
    arg_list = [
        (f.field, n, k, f, weight, cfg.seed, index, cfg.samples, config.WEIGHT_MARGIN, cfg.eps)
        for index in range(cfg.trials)
    ]
    logger.info("Dual sampling: q=%d n=%d k=%d, %d seeds x %d samples", f.field.q, n, k, cfg.trials, cfg.samples)
    outcomes: list[SeedOutcome] = fan_out(min_weight_trial, arg_list, cfg.workers)

    label = f"{describe_noise(cfg.noise)[0]}({describe_noise(cfg.noise)[1]})"
    flagged = sum(o.status != "ok" for o in outcomes)
    if flagged:
        logger.warning("%d of %d seeds had no dual mass", flagged, len(outcomes))
    return [
        SampleRow(
            seed=o.seed,
            n=o.n,
            k=o.k,
            noise=label,
            d_min=o.d_min,
            expected_weight=o.expected_weight,
            frac_within_margin=o.frac_within_margin,
            success_floor=o.success_floor,
            p_zero_branch=o.p_zero_branch,
            exact_within_margin=o.exact_within_margin,
            typical_mass=o.typical_mass,
            status=o.status,
        )
        for o in outcomes
    ]


# Reports


def run_capacity(cfg: ExperimentConfig) -> CapacityReport:
    """
    Holevo and Shannon capacities with the Hirschman sum, or rank entropies.

    Args:
        cfg: Validated configuration.

    Returns:
        CapacityReport.
    """
    field = make_field(cfg.field.p, cfg.field.s)
    kind, param = describe_noise(cfg.noise)
    if isinstance(cfg.noise, RankNoiseSpec):
        params = make_rank_params(field, cfg.noise.a, cfg.noise.b, cfg.noise.t)
        closed, exact = rank_entropy_per_symbol(params)
        return CapacityReport(
            q=field.q,
            noise_kind=kind,
            noise_param=param,
            rank_entropy_closed=closed,
            rank_entropy_exact=exact,
        )
    g = noise_from_spec(field, 1, cfg.noise).g
    hirschman = hirschman_check(field, g)
    report = CapacityReport(
        q=field.q,
        noise_kind=kind,
        noise_param=param,
        holevo_capacity=holevo_capacity(field, g),
        shannon_capacity=shannon_capacity(field, g),
        hirschman_sum=hirschman.total,
        hirschman_holds=hirschman.holds,
        hirschman_upper_direction_holds=hirschman.upper_direction_holds,
    )
    logger.info("Capacity q=%d %s: Holevo %.6f", field.q, param, report.holevo_capacity)
    return report


def duality_residual(field: FieldSpec, rows: int, cols: int, t: int) -> Optional[float]:
    """max |dft(f_t) - f_(b-t)| over all matrices, or None above the dense cap."""
    params = make_rank_params(field, rows, cols, t)
    try:
        check_cap(field.q ** params.n, config.CAP_PRODUCT, "rank duality check")
    except CapExceededError as e:
        logger.warning("Skipping dense duality check: %s", e)
        return None
    transformed = dft(rank_noise(params)).dense
    return float(np.max(np.abs(transformed - rank_noise(params.dual()).dense)))


def run_rank_lab(cfg: ExperimentConfig) -> RankLabReport:
    """
    Rank-metric tables: Gaussian binomials, sphere sizes, Z, shell masses and entropies.

    Args:
        cfg: Configuration whose noise is a rank spec; rate R (default 0.5)
            gives the dual rate 1 - R used for the GV distance.

    Returns:
        RankLabReport.
    """
    if not isinstance(cfg.noise, RankNoiseSpec):
        raise ValueError("rank-lab needs a rank noise spec, e.g. --noise preset:rank:2:2:1")
    field = make_field(cfg.field.p, cfg.field.s)
    spec = cfg.noise
    params = make_rank_params(field, spec.a, spec.b, spec.t)
    a, b, t = params.a, params.b, params.t
    closed, exact = rank_entropy_per_symbol(params)
    residual = duality_residual(field, spec.a, spec.b, spec.t)
    dual_rate = 1.0 - (cfg.rate if cfg.rate is not None else 0.5)

    report = RankLabReport(
        q=field.q,
        a=a,
        b=b,
        t=t,
        gaussian_binomials=[gaussian_binomial(b, u, field) for u in range(b + 1)],
        sphere_sizes=params.sphere_sizes(),
        Z=params.Z,
        Z_over_binomial=params.Z / gaussian_binomial(b, t, field),
        shell_masses=[float(m) for m in rank_shell_masses(params)],
        duality_residual=residual,
        duality_note="dense check run" if residual is not None else "skipped: above the dense cap",
        entropy_closed=closed,
        entropy_exact=exact,
        rate=dual_rate,
        gv_distance=rank_gv_distance(a, b, dual_rate),
    )
    logger.info("Rank lab q=%d a=%d b=%d t=%d: Z=%.6g, GV distance %d", field.q, a, b, t, report.Z, report.gv_distance)
    return report
