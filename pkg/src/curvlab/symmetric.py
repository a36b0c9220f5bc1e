"""O(n)-invariant Gaussian symmetric matrices W = r Z I + s T.

T is GOE-like: independent entries, off-diagonal N(0,1), diagonal N(0,2).
Every invariant centered Gaussian symmetric matrix has this form, and its
parameter is delta(W) = r^2 - s^2, which may be negative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .special import gaussian_abs_moment
from .stats import batch_statistic

__all__ = [
    "SymmetricEnsemble",
    "goe_like",
    "sample",
    "parameter",
    "parameter_empirical",
    "parameter_estimate",
    "expected_det_identity",
    "LinearConditioning",
    "condition_on_linear",
]


@dataclass(frozen=True)
class SymmetricEnsemble:
    n: int
    r: float = 0.0
    s_off: float = 0.0

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError(f"symmetric ensembles need n >= 2, got {self.n}")
        if self.r < 0 or self.s_off < 0:
            raise ValueError("scales r and s_off must be nonnegative")

    @property
    def delta(self) -> float:
        return self.r**2 - self.s_off**2

    @classmethod
    def from_delta(cls, n: int, delta: float) -> "SymmetricEnsemble":
        """Canonical representative: pure Z*I for delta >= 0, pure T for delta < 0."""
        if delta >= 0:
            return cls(n, math.sqrt(delta), 0.0)
        return cls(n, 0.0, math.sqrt(-delta))

    def covariances(self) -> dict[str, float]:
        """Entry moments: Var off-diagonal, Var diagonal, Cov of distinct diagonal entries."""
        r2, s2 = self.r**2, self.s_off**2
        return {"offdiag_var": s2, "diag_var": r2 + 2 * s2, "diag_cov": r2}


def goe_like(rng: np.random.Generator, n: int, size: int | None = None) -> np.ndarray:
    shape = (n, n) if size is None else (size, n, n)
    g = rng.standard_normal(shape)
    upper = np.triu(g, 1)
    # diagonal N(0,2)
    diag = math.sqrt(2.0) * np.diagonal(g, axis1=-2, axis2=-1)
    t = upper + np.swapaxes(upper, -1, -2)
    idx = np.arange(n)
    t[..., idx, idx] = diag
    return t


def sample(
    ensemble: SymmetricEnsemble, rng: np.random.Generator, size: int | None = None
) -> np.ndarray:
    """Draw W = r Z I + s_off T; shape (n, n) or (size, n, n)."""
    n = ensemble.n
    shape = () if size is None else (size,)
    z = rng.standard_normal(shape)
    w = ensemble.s_off * goe_like(rng, n, size)
    idx = np.arange(n)
    w[..., idx, idx] += ensemble.r * np.asarray(z)[..., None]
    return w


def parameter(mean_trace_sq: float, mean_frob_sq: float, n: int) -> float:
    """delta(W) from E(tr W)^2 and E||W||_F^2."""
    return (mean_trace_sq - mean_frob_sq) / (n * (n - 1))


def _as_stack(samples) -> np.ndarray:
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise ValueError(f"expected a stack of square matrices, got shape {arr.shape}")
    if arr.shape[1] < 2:
        raise ValueError("parameter needs n >= 2")
    return arr


def parameter_empirical(samples) -> float:
    """Plug-in estimate of delta(W) from a stack of samples (N, n, n)."""
    arr = _as_stack(samples)
    if arr.shape[0] < 2:
        raise ValueError("need at least two samples")
    n = arr.shape[1]
    tr = np.trace(arr, axis1=1, axis2=2)
    frob = np.einsum("kij,kij->k", arr, arr)
    return parameter(float(np.mean(tr**2)), float(np.mean(frob)), n)


def parameter_estimate(samples, batches: int = 100) -> tuple[float, float]:
    """delta(W) estimate with a batch-means standard error."""
    arr = _as_stack(samples)
    n = arr.shape[1]
    tr = np.trace(arr, axis1=1, axis2=2)
    frob = np.einsum("kij,kij->k", arr, arr)
    per_sample = (tr**2 - frob) / (n * (n - 1))
    return batch_statistic(per_sample, np.mean, batches)


def expected_det_identity(n: int, delta: float) -> float:
    """E det(I + W) for invariant W with parameter delta: E(1 + sqrt(delta) X)^n,
    expanded as sum_j binom(n, 2j) gamma_{2j} delta^j (a polynomial in delta)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return math.fsum(
        math.comb(n, 2 * j) * gaussian_abs_moment(2 * j) * delta**j for j in range(n // 2 + 1)
    )


@dataclass(frozen=True)
class LinearConditioning:
    """Law of W given u = 0, for jointly invariant Gaussian (u, W).

    W - lam*u*I is independent of u, so it is a sample of the conditioned matrix.
    """

    n: int
    delta: float
    lam: float

    def apply(self, w: np.ndarray, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return w - self.lam * u[..., None, None] * np.eye(self.n)


def condition_on_linear(n: int, delta_w: float, var_u: float, cross: float) -> LinearConditioning:
    """Condition W on u = 0 given delta(W), E u^2 and E(u tr W)."""
    if not var_u > 0:
        raise ValueError("E u^2 must be positive")
    lam = cross / (n * var_u)
    return LinearConditioning(n, delta_w - cross**2 / (n**2 * var_u), lam)
