"""Deterministic batched Monte Carlo.

A run of ``samples`` draws is cut into a fixed number of batches. Batch b draws
from its own stream seeded by (seed, b), so the result depends only on the seed
and the batch layout, never on how many worker processes evaluate the batches.
The standard error comes from the spread of the batch means.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from functools import partial
from typing import Any, Callable

import numpy as np

from .stats import z_score

__all__ = [
    "DEFAULT_SEED",
    "DEFAULT_BATCHES",
    "EstimateRecord",
    "batch_rng",
    "derive_seed",
    "batch_sizes",
    "run_batches",
    "summarize",
    "exact_record",
]

DEFAULT_SEED = 20240611
DEFAULT_BATCHES = 100

# A batch function takes (rng, size) and returns (per-statistic batch means, discarded).
BatchFn = Callable[[np.random.Generator, int], tuple[np.ndarray, int]]


@dataclass(frozen=True)
class EstimateRecord:
    experiment: str
    params: str
    samples: int
    mean: float
    se: float
    target: float
    z: float
    discarded: int
    seed: int
    exact: bool = False
    error_bar: bool = True

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        for key in ("mean", "se", "target", "z"):
            value = out[key]
            # JSON has no infinities
            if not math.isfinite(value):
                out[key] = repr(value)
        return out

    @classmethod
    def from_dict(cls, obj: dict[str, Any]) -> "EstimateRecord":
        names = {f.name for f in fields(cls)}
        kwargs = {k: v for k, v in obj.items() if k in names}
        for key in ("mean", "se", "target", "z"):
            kwargs[key] = float(kwargs[key])
        return cls(**kwargs)

    def passes(self, z_threshold: float = 4.0, exact_tol: float = 1e-10) -> bool:
        if self.exact:
            return abs(self.mean - self.target) <= exact_tol
        if not self.error_bar:
            # no valid variance: reported for information only
            return math.isfinite(self.mean)
        return abs(self.z) <= z_threshold


def batch_rng(seed: int, batch: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(batch)]))


def derive_seed(seed: int, *keys: int) -> int:
    """A 63-bit seed for a sub-experiment, fixed by the parent seed and the keys."""
    state = np.random.SeedSequence([int(seed), *map(int, keys)]).generate_state(2, np.uint32)
    return (int(state[0]) << 31) ^ int(state[1])


def batch_sizes(samples: int, batches: int) -> list[int]:
    if batches < 2:
        raise ValueError("need at least two batches for an error bar")
    if samples < batches:
        raise ValueError(f"{samples} samples cannot fill {batches} batches")
    base, extra = divmod(samples, batches)
    return [base + (b < extra) for b in range(batches)]


def _run_one(fn: BatchFn, seed: int, item: tuple[int, int]) -> tuple[np.ndarray, int]:
    b, size = item
    means, discarded = fn(batch_rng(seed, b), size)
    return np.atleast_1d(np.asarray(means, dtype=float)), int(discarded)


def default_workers() -> int:
    return os.cpu_count() or 1


def run_batches(
    fn: BatchFn, samples: int, seed: int, batches: int = DEFAULT_BATCHES, workers: int = 1
) -> tuple[np.ndarray, np.ndarray, int]:
    """Evaluate all batches; returns (batch means (B, q), batch sizes (B,), total discarded).

    ``fn`` must be picklable when ``workers`` > 1.
    """
    sizes = batch_sizes(samples, batches)
    items = list(enumerate(sizes))
    job = partial(_run_one, fn, seed)
    if workers <= 1:
        results = [job(item) for item in items]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, items, chunksize=max(1, batches // (4 * workers))))
    means = np.stack([r[0] for r in results])
    return means, np.asarray(sizes), sum(r[1] for r in results)


def summarize(
    experiment: str,
    params: str,
    means: np.ndarray,
    sizes: np.ndarray,
    target: float,
    discarded: int,
    seed: int,
    error_bar: bool = True,
) -> EstimateRecord:
    """Record for one statistic from its batch means."""
    means = np.asarray(means, dtype=float)
    sizes = np.asarray(sizes, dtype=float)
    mean = float(np.sum(means * sizes) / np.sum(sizes))
    se = float(np.std(means, ddof=1) / math.sqrt(len(means)))
    z = z_score(mean, se, target) if error_bar else math.nan
    return EstimateRecord(
        experiment=experiment,
        params=params,
        samples=int(np.sum(sizes)),
        mean=mean,
        se=se,
        target=float(target),
        z=z,
        discarded=int(discarded),
        seed=int(seed),
        error_bar=error_bar,
    )


def exact_record(experiment: str, params: str, value: float, target: float) -> EstimateRecord:
    """A deterministic check with no sampling."""
    return EstimateRecord(
        experiment=experiment,
        params=params,
        samples=0,
        mean=float(value),
        se=0.0,
        target=float(target),
        z=z_score(float(value), 0.0, float(target)),
        discarded=0,
        seed=0,
        exact=True,
    )
