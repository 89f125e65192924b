"""
SVG plots derived from the CSV rows the CLI just produced.

Files are byte-stable: the SVG hash salt is fixed and no date is written.
"""

import logging
from typing import Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from schemas import SampleRow, SweepRow  # noqa: E402

logger = logging.getLogger(__name__)

matplotlib.rcParams["svg.hashsalt"] = "qdp-lab"
SVG_METADATA = {"Date": None}


def _save(fig, path: str) -> None:
    fig.savefig(path, format="svg", metadata=SVG_METADATA)
    plt.close(fig)
    logger.info("Wrote plot %s", path)


def plot_sweep(rows: list[SweepRow], path: str, capacity: Optional[float] = None) -> None:
    """
    Mean P_PGM against the rate k/n, with a marker at the Holevo capacity.

    Args:
        rows: Sweep rows sorted by k.
        path: Output SVG path.
        capacity: Entropy rate of the noise, drawn as a vertical line.
    """
    fig, ax = plt.subplots(figsize=(6, 4))
    rates = [r.k / r.n for r in rows]
    means = [r.P_PGM_mean for r in rows]
    stds = [r.P_PGM_std for r in rows]
    ax.errorbar(rates, means, yerr=stds, marker="o", capsize=3, label="mean P_PGM")
    if capacity is not None:
        ax.axvline(capacity, color="tab:red", linestyle="--", label=f"capacity {capacity:.4f}")
    ax.set_xlabel("rate k/n")
    ax.set_ylabel("P_PGM")
    ax.set_ylim(-0.02, 1.02)
    if rows:
        ax.set_title(f"q={rows[0].q}, n={rows[0].n}, {rows[0].noise_kind} {rows[0].noise_param}")
    ax.legend()
    _save(fig, path)


def plot_weights(rows: list[SampleRow], path: str) -> None:
    """
    Histogram of per-seed minimum dual weight against the expected sample weight.

    Args:
        rows: Sample rows.
        path: Output SVG path.
    """
    ok = [r for r in rows if r.status == "ok"]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(
        [[r.d_min for r in ok], [r.expected_weight for r in ok]],
        bins=20,
        label=["d_min", "expected weight"],
    )
    ax.set_xlabel("weight")
    ax.set_ylabel("seeds")
    if rows:
        ax.set_title(f"n={rows[0].n}, k={rows[0].k}, {rows[0].noise}")
    ax.legend()
    _save(fig, path)
