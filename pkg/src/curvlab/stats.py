"""Batch-means error bars and two-sample comparisons."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

__all__ = ["batch_statistic", "batch_mean", "z_score", "two_sample_z"]


def batch_statistic(
    data: np.ndarray, stat: Callable[[np.ndarray], float], batches: int = 100
) -> tuple[float, float]:
    """Mean and standard error of ``stat`` evaluated on equal contiguous batches of ``data``.

    Trailing samples that do not fill a batch are dropped.
    """
    data = np.asarray(data)
    size = data.shape[0] // batches
    if size < 1:
        raise ValueError(f"{data.shape[0]} samples cannot fill {batches} batches")
    values = np.array([stat(data[b * size : (b + 1) * size]) for b in range(batches)])
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(batches))


def batch_mean(x: np.ndarray, batches: int = 100) -> tuple[float, float]:
    x = np.asarray(x, dtype=float)
    size = x.shape[0] // batches
    if size < 1:
        raise ValueError(f"{x.shape[0]} samples cannot fill {batches} batches")
    means = x[: size * batches].reshape((batches, size) + x.shape[1:]).mean(axis=1)
    return float(means.mean()), float(means.std(ddof=1) / math.sqrt(batches))


def z_score(mean: float, se: float, target: float, exact_tol: float = 1e-10) -> float:
    """(mean - target)/se; with a zero error bar, 0 on exact agreement and +-inf otherwise."""
    diff = mean - target
    if se > 0:
        return diff / se
    if abs(diff) <= exact_tol * max(1.0, abs(target)):
        return 0.0
    return math.copysign(math.inf, diff)


def two_sample_z(m1: float, se1: float, m2: float, se2: float) -> float:
    return z_score(m1 - m2, math.hypot(se1, se2), 0.0)
