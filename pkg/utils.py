# utils.py
"""
Utility functions for the QDP lab.
Provides logging configuration, size caps and seed derivation.
"""

import logging
import sys

import numpy as np

import config


class CapExceededError(ValueError):
    """Raised when an instance exceeds a desk-scale size cap."""

    pass


def setup_logging(level: int = logging.INFO) -> None:
    """
    Configure logging for console and file output.

    Console output goes to stderr so CSV/JSON written to stdout stays clean.

    Args:
        level: Logging level (default: INFO).
    """
    root = logging.getLogger()

    if root.handlers:
        return

    root.setLevel(level)

    formatter = logging.Formatter(
        "%(asctime)s %(levelname)s %(name)s: %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(formatter)
    root.addHandler(console_handler)

    file_handler = logging.FileHandler(config.LOG_FILE)
    file_handler.setFormatter(formatter)
    root.addHandler(file_handler)


def check_cap(size: int, cap: int, what: str) -> None:
    """
    Raise CapExceededError when size is above cap.

    Args:
        size: Number of elements the operation would materialize.
        cap: Configured limit.
        what: Short description used in the error message.
    """
    if size > cap:
        raise CapExceededError(f"{what}: size {size} exceeds cap {cap}")


def derive_seed(master: int, *keys: int) -> int:
    """
    Derive a per-trial seed from the master seed by a counter-based split.

    The seed depends only on (master, keys), so results do not depend on
    how trials are scheduled across workers.

    Args:
        master: Master seed of the experiment.
        *keys: Counters identifying the trial (e.g. k, trial index).

    Returns:
        A 63-bit nonnegative integer seed.
    """
    sequence = np.random.SeedSequence(entropy=master, spawn_key=tuple(int(k) for k in keys))
    return int(sequence.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
