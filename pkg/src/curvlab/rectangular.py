"""Rectangular Gaussian matrices: Gram-Schmidt frames, parallelepiped volumes,
Moore-Penrose inverses and the distributional identities they satisfy.

All functions operate on the last two axes, so stacks of matrices of shape
(..., s, n) are handled in one call.
"""

from __future__ import annotations

import math

import numpy as np

from .special import gaussian_abs_moment, sphere_volume

__all__ = [
    "RankDeficientError",
    "RANK_TOL",
    "gram_schmidt",
    "gram_volume",
    "frame",
    "pinv",
    "moore_penrose_transpose_apply",
    "uniform_sphere",
    "expected_volume",
    "expected_vol_inverse_power",
    "pseudoinverse_pipelines",
]

RANK_TOL = 1e-10


class RankDeficientError(ValueError):
    """Rows are numerically linearly dependent."""


def gram_schmidt(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Classical Gram-Schmidt in row order with one reorthogonalization pass.

    Returns the orthonormalized rows and the residual norms ||A_m^perp|| (the
    length of row m after removing its projection on rows 1..m-1). Rows whose
    residual falls below RANK_TOL times their norm are returned as zeros with
    residual 0.
    """
    a = np.asarray(a, dtype=float)
    s = a.shape[-2]
    q = np.zeros_like(a)
    res = np.zeros(a.shape[:-1])
    for m in range(s):
        v = a[..., m, :].copy()
        for _ in range(2):
            if m:
                coeffs = np.einsum("...kj,...j->...k", q[..., :m, :], v)
                v -= np.einsum("...k,...kj->...j", coeffs, q[..., :m, :])
        norm = np.linalg.norm(v, axis=-1)
        scale = np.linalg.norm(a[..., m, :], axis=-1)
        ok = norm > RANK_TOL * scale
        safe = np.where(ok, norm, 1.0)
        q[..., m, :] = np.where(ok[..., None], v / safe[..., None], 0.0)
        res[..., m] = np.where(ok, norm, 0.0)
    return q, res


def gram_volume(a: np.ndarray, m: int | None = None) -> np.ndarray | float:
    """vol(A_1, ..., A_m) as the product of Gram-Schmidt residual norms."""
    a = np.asarray(a, dtype=float)
    s = a.shape[-2]
    m = s if m is None else m
    if not 1 <= m <= s:
        raise ValueError(f"need 1 <= m <= {s}, got {m}")
    _, res = gram_schmidt(a[..., :m, :])
    vol = np.prod(res, axis=-1)
    return float(vol) if np.ndim(vol) == 0 else vol


def frame(a: np.ndarray) -> np.ndarray:
    """Orthonormal rows N_1..N_s spanning the row space of A, in row order."""
    q, res = gram_schmidt(a)
    if np.any(res == 0.0):
        raise RankDeficientError("rows are numerically dependent")
    return q


def _gram(a: np.ndarray) -> np.ndarray:
    return a @ np.swapaxes(a, -1, -2)


def _check_gram(g: np.ndarray) -> None:
    cond = np.linalg.cond(g)
    if np.any(~np.isfinite(cond)) or np.any(cond > 1e12):
        raise RankDeficientError("Gram matrix is numerically singular")


def pinv(a: np.ndarray) -> np.ndarray:
    """A^dagger = A^T (A A^T)^{-1} for full row rank A."""
    a = np.asarray(a, dtype=float)
    g = _gram(a)
    _check_gram(g)
    return np.swapaxes(np.linalg.solve(g, a), -1, -2)


def moore_penrose_transpose_apply(a: np.ndarray, y: np.ndarray) -> np.ndarray:
    """v = (A^dagger)^T y = (A A^T)^{-1} A y, i.e. the coefficients with A^T v = y
    for y in the row space of A."""
    a = np.asarray(a, dtype=float)
    g = _gram(a)
    _check_gram(g)
    ay = np.einsum("...ij,...j->...i", a, y)
    return np.linalg.solve(g, ay[..., None])[..., 0]


def uniform_sphere(rng: np.random.Generator, dim: int, size: int | None = None) -> np.ndarray:
    """Uniform points on S^{dim-1} as normalized standard Gaussian vectors."""
    shape = (dim,) if size is None else (size, dim)
    x = rng.standard_normal(shape)
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


def expected_volume(n: int, m: int) -> float:
    """E vol(A_1..A_m) for an m x n standard Gaussian matrix: gamma_n / gamma_{n-m}."""
    return gaussian_abs_moment(n) / gaussian_abs_moment(n - m)


def expected_vol_inverse_power(n: int, m: int, j: int) -> float:
    """E[ vol(A_1..A_{m-1}) / ||A_m^perp||^{2j-1} ] for standard Gaussian rows in R^n."""
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got m={m}, n={n}")
    if not 0 <= j <= (n - m) // 2:
        raise ValueError(f"need 0 <= j <= {(n - m) // 2}, got j={j}")
    g = gaussian_abs_moment
    return (
        sphere_volume(n - m)
        / (2.0 * (2.0 * math.pi) ** (0.5 * (n - m)))
        * g(n)
        * g(n - m + 1 - 2 * j)
        / g(n - m + 1)
    )


def _full_rank_gaussian(rng: np.random.Generator, size: int, s: int, n: int) -> tuple[np.ndarray, int]:
    """Draw standard Gaussian (size, s, n) stacks, redrawing numerically dependent ones."""
    a = rng.standard_normal((size, s, n))
    discarded = 0
    while True:
        _, res = gram_schmidt(a)
        bad = np.any(res == 0.0, axis=-1)
        k = int(bad.sum())
        if not k:
            return a, discarded
        discarded += k
        a[bad] = rng.standard_normal((k, s, n))


def pseudoinverse_pipelines(n: int, s: int, rng: np.random.Generator, size: int) -> dict[str, np.ndarray]:
    """Two constructions claimed equal in law.

    first:  (sqrt(det A A^T), (A^dagger)^T Q_A(u)) with u uniform on S^{s-1}
    second: (vol(A_1..A_{s-1}) ||A_s^perp||, w / ||A_s^perp||) with w uniform on S^{s-1}

    Independent matrices are drawn for the two pipelines.
    """
    if not 1 <= s <= n:
        raise ValueError(f"need 1 <= s <= n, got s={s}, n={n}")
    a1, dis1 = _full_rank_gaussian(rng, size, s, n)
    u = uniform_sphere(rng, s, size)
    q, res1 = gram_schmidt(a1)
    y = np.einsum("ks,ksj->kj", u, q)
    v1 = moore_penrose_transpose_apply(a1, y)
    scalar1 = np.sqrt(np.linalg.det(_gram(a1)))

    a2, dis2 = _full_rank_gaussian(rng, size, s, n)
    w = uniform_sphere(rng, s, size)
    _, res2 = gram_schmidt(a2)
    scalar2 = np.prod(res2, axis=-1)
    v2 = w / res2[:, -1:]
    return {
        "scalar1": scalar1,
        "vector1": v1,
        "scalar2": scalar2,
        "vector2": v2,
        "discarded": np.array(dis1 + dis2),
    }
