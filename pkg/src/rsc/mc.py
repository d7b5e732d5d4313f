"""Seed derivation, trial-parallel execution, and Monte Carlo aggregation."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")

SEED_MAX = 2**64 - 1


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed <= SEED_MAX:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def trial_seed(seed: int, trial: int) -> int:
    """64-bit seed for one trial, keyed by (master seed, trial index).

    The derivation does not depend on how many trials are run or in which
    order, so serial and parallel runs see identical streams.
    """
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=(int(trial),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def kernel_seed(seed: int, trial: int) -> int:
    """32-bit seed for the Mersenne Twister used inside compiled kernels."""
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=(int(trial),))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def default_jobs() -> int:
    return max(1, os.cpu_count() or 1)


def run_trials(fn: Callable[[int], T], n_trials: int, jobs: int | None = 1) -> list[T]:
    """Evaluate ``fn(trial_index)`` for all trials; results come back in index order."""
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    jobs = default_jobs() if jobs is None else int(jobs)
    if jobs <= 1 or n_trials == 1:
        return [fn(i) for i in range(n_trials)]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, range(n_trials)))


def mean_se(samples: np.ndarray | Sequence, axis: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Sample mean and standard error of the mean along ``axis`` (NaN s.e. for a single sample)."""
    x = np.asarray(samples, dtype=float)
    n = x.shape[axis]
    mean = x.mean(axis=axis)
    if n < 2:
        return mean, np.full_like(mean, np.nan)
    se = x.std(axis=axis, ddof=1) / np.sqrt(n)
    return mean, se


def z_score(measured, se, expected):
    """(measured - expected) / se, with zero-se entries mapped to 0 when equal and inf otherwise."""
    measured = np.asarray(measured, dtype=float)
    se = np.asarray(se, dtype=float)
    diff = measured - np.asarray(expected, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, diff / np.where(se > 0, se, 1.0), np.where(np.abs(diff) < 1e-15, 0.0, np.inf))
    return z
