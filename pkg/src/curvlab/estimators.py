"""Monte Carlo estimators for root counts, line-section volumes, quadric Euler
characteristics, curvature coefficients of random zero sets and tube volumes.

Every estimator is deterministic in ``seed`` and independent of ``workers``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial
from typing import Sequence

import numpy as np

from .ensembles import PolynomialEnsemble, quadric_matrix, sample_binary_form, sample_form, sample_jet
from .montecarlo import DEFAULT_BATCHES, DEFAULT_SEED, EstimateRecord, run_batches, summarize
from .rectangular import gram_schmidt, uniform_sphere
from .roots import count_common_zeros_p2, count_projective_roots
from .series import expected_euler_hypersurface_series, expected_tube_coefficients
from .special import sphere_volume, tube_integral

__all__ = [
    "WeingartenSample",
    "build_weingarten",
    "elementary_symmetric",
    "estimate_univariate_roots",
    "estimate_crofton_volume",
    "estimate_quadric_euler",
    "estimate_rice_curvature",
    "estimate_tube_volume_subsphere",
    "quadric_euler_characteristic",
    "rice_constant",
    "RICE_BATCHES",
]

RICE_BATCHES = 200
EIGEN_TOL = 1e-10
MAX_RESAMPLE_ROUNDS = 100


def _fill(draw, bad_of, rng, size):
    """Draw ``size`` items, redrawing the ones flagged bad. Returns (items, discarded).

    ``draw(rng, k)`` returns a tuple of arrays with leading axis k; ``bad_of(items)``
    returns (bad mask, payload) with payload aligned with the items.
    """
    items = draw(rng, size)
    bad, payload = bad_of(items)
    discarded = 0
    for _ in range(MAX_RESAMPLE_ROUNDS):
        k = int(np.count_nonzero(bad))
        if not k:
            return payload, discarded
        discarded += k
        fresh = draw(rng, k)
        fresh_bad, fresh_payload = bad_of(fresh)
        idx = np.flatnonzero(bad)
        payload[idx] = fresh_payload
        bad[idx] = fresh_bad
    raise RuntimeError("degenerate samples keep recurring; the ensemble is likely singular")


def _params(**kw) -> str:
    return " ".join(f"{k}={v}" for k, v in kw.items())


def _factors_label(es: Sequence[PolynomialEnsemble]) -> str:
    return "[" + ", ".join(e.describe() for e in es) + "]"


# ----------------------------------------------------------------- roots


def _count_or_flag(forms: np.ndarray):
    counts, degenerate = count_projective_roots(forms)
    return degenerate, counts


def _roots_batch(e: PolynomialEnsemble, rng: np.random.Generator, size: int):
    counts, discarded = _fill(partial(sample_binary_form, e), _count_or_flag, rng, size)
    return np.array([counts.mean()]), discarded


def estimate_univariate_roots(
    e: PolynomialEnsemble,
    samples: int,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
    batches: int = DEFAULT_BATCHES,
) -> EstimateRecord:
    """Mean number of real projective roots of the binary restriction of ``e``; target sqrt(delta)."""
    means, sizes, discarded = run_batches(partial(_roots_batch, e), samples, seed, batches, workers)
    return summarize(
        "univariate_roots", _params(ensemble=e.describe(), delta=f"{e.delta:.6g}"),
        means[:, 0], sizes, math.sqrt(e.delta), discarded, seed,
    )


# ----------------------------------------------------------------- crofton


def _crofton_line_batch(e: PolynomialEnsemble, rng: np.random.Generator, size: int):
    return _roots_batch(e, rng, size)


def _crofton_plane_batch(es: tuple[PolynomialEnsemble, PolynomialEnsemble], rng, size: int):
    e1, e2 = es

    def draw(r, k):
        return sample_form(e1, 3, r, k), sample_form(e2, 3, r, k)

    def bad_of(pair):
        counts, degenerate = count_common_zeros_p2(pair[0], pair[1], e1.d, e2.d)
        return degenerate, counts

    counts, discarded = _fill(draw, bad_of, rng, size)
    return np.array([counts.mean()]), discarded


def estimate_crofton_volume(
    ensembles: Sequence[PolynomialEnsemble],
    n: int,
    samples: int,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
    batches: int = DEFAULT_BATCHES,
) -> EstimateRecord:
    """Mean number of common zeros on a random s-dimensional projective subspace.

    By invariance the coordinate subspace will do. Its expectation is
    E vol(Z) / vol(P^{n-s}) = prod sqrt(delta_sigma). Supports s = 1 and s = 2
    with degrees up to 3.
    """
    es = tuple(ensembles)
    s = len(es)
    if not 1 <= s <= n:
        raise ValueError(f"need 1 <= s <= n, got s={s}, n={n}")
    if any(e.n < n for e in es):
        raise ValueError("every factor must live on P^n")
    if s == 1:
        fn = partial(_crofton_line_batch, es[0])
    elif s == 2:
        if any(e.d > 3 for e in es):
            raise ValueError("plane sections are limited to degrees <= 3")
        fn = partial(_crofton_plane_batch, es)
    else:
        raise ValueError(f"common zeros are only counted for s <= 2, got s={s}")
    target = math.prod(math.sqrt(e.delta) for e in es)
    means, sizes, discarded = run_batches(fn, samples, seed, batches, workers)
    return summarize(
        "crofton_volume", _params(n=n, s=s, factors=_factors_label(es)),
        means[:, 0], sizes, target, discarded, seed,
    )


# ----------------------------------------------------------------- quadrics


def quadric_euler_characteristic(positive: np.ndarray, dim: int) -> np.ndarray:
    """Euler characteristic of the real projective quadric with p positive and
    dim - p negative eigenvalues: the zero set in S^{dim-1} is S^{p-1} x S^{q-1},
    and the antipodal map acts freely, so chi = chi(S^{p-1}) chi(S^{q-1}) / 2."""
    p = np.asarray(positive)
    q = dim - p
    chi = np.where((p - 1) % 2 == 0, 2, 0) * np.where((q - 1) % 2 == 0, 2, 0) // 2
    return np.where((p == 0) | (q == 0), 0, chi)


def _quadric_batch(e: PolynomialEnsemble, rng: np.random.Generator, size: int):
    dim = e.n + 1

    def bad_of(q):
        ev = np.linalg.eigvalsh(q)
        scale = np.max(np.abs(ev), axis=1)
        bad = np.any(np.abs(ev) <= EIGEN_TOL * scale[:, None], axis=1) | (scale == 0)
        return bad, np.count_nonzero(ev > 0, axis=1)

    positive, discarded = _fill(lambda r, k: quadric_matrix(e, r, k), bad_of, rng, size)
    return np.array([quadric_euler_characteristic(positive, dim).mean()]), discarded


def estimate_quadric_euler(
    e: PolynomialEnsemble,
    samples: int,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
    batches: int = DEFAULT_BATCHES,
) -> EstimateRecord:
    """Mean Euler characteristic of a random quadric in P^n (n odd) from its signature."""
    n = e.n
    if e.d != 2:
        raise ValueError(f"quadrics need degree 2, got {e.d}")
    if n % 2 == 0:
        raise ValueError(f"n must be odd so the quadric is even-dimensional, got {n}")
    if n + 1 > 12:
        raise ValueError(f"quadric matrices are capped at size 12, got {n + 1}")
    target = expected_euler_hypersurface_series(e.delta, (n - 1) // 2)[-1]
    means, sizes, discarded = run_batches(partial(_quadric_batch, e), samples, seed, batches, workers)
    return summarize(
        "quadric_euler", _params(n=n, ensemble=e.describe(), delta=f"{e.delta:.6g}"),
        means[:, 0], sizes, target, discarded, seed,
    )


# ----------------------------------------------------------------- curvature


@dataclass(frozen=True)
class WeingartenSample:
    """Normal coordinates v (..., s), Weingarten matrices L (..., m, m) and the
    factor sqrt(det M M^T) (...), with m = n - s."""

    v: np.ndarray
    L: np.ndarray
    gram: np.ndarray


def _tangent_basis(m: np.ndarray) -> np.ndarray:
    """Orthonormal basis of ker M as columns, shape (..., n, n - s)."""
    s = m.shape[-2]
    q, _ = np.linalg.qr(np.swapaxes(m, -1, -2), mode="complete")
    return q[..., :, s:]


def build_weingarten(gradients: np.ndarray, hessians: np.ndarray, u: np.ndarray) -> WeingartenSample:
    """Weingarten map of Z(f_1..f_s) at q in the normal direction sum_sigma u_sigma N_sigma.

    gradients (..., s, n), hessians (..., s, n, n), u (..., s) on the unit sphere.
    The caller must ensure the gradients are linearly independent.
    """
    m = np.asarray(gradients, dtype=float)
    w = np.asarray(hessians, dtype=float)
    u = np.asarray(u, dtype=float)
    b = _tangent_basis(m)
    h = np.swapaxes(b, -1, -2)[..., None, :, :] @ w @ b[..., None, :, :]
    frame, res = gram_schmidt(m)
    y = np.einsum("...s,...sn->...n", u, frame)
    gram_matrix = m @ np.swapaxes(m, -1, -2)
    v = np.linalg.solve(gram_matrix, np.einsum("...sn,...n->...s", m, y)[..., None])[..., 0]
    L = -np.einsum("...s,...sij->...ij", v, h)
    L = 0.5 * (L + np.swapaxes(L, -1, -2))
    return WeingartenSample(v=v, L=L, gram=np.prod(res, axis=-1))


def elementary_symmetric(eigenvalues: np.ndarray) -> np.ndarray:
    """e_0..e_m of the last axis; det(I - rL) = sum_k (-r)^k e_k(L)."""
    lam = np.asarray(eigenvalues, dtype=float)
    m = lam.shape[-1]
    out = np.zeros(lam.shape[:-1] + (m + 1,))
    out[..., 0] = 1.0
    for i in range(m):
        out[..., 1 : i + 2] = out[..., 1 : i + 2] + lam[..., i : i + 1] * out[..., : i + 1]
    return out


def rice_constant(n: int, s: int) -> float:
    """E K_{s+k} = rice_constant(n, s) * E[gram * e_k(L)]."""
    return sphere_volume(n) * sphere_volume(s - 1) * (2.0 * math.pi) ** (-0.5 * s)


def _rice_batch(es: tuple[PolynomialEnsemble, ...], n: int, rng: np.random.Generator, size: int):
    s = len(es)

    def draw(r, k):
        jets = [sample_jet(e, r, k, conditioned=True, dim=n) for e in es]
        grads = np.stack([j.gradient for j in jets], axis=1)
        hess = np.stack([j.hessian for j in jets], axis=1)
        return grads, hess

    grads, hess = draw(rng, size)
    _, res = gram_schmidt(grads)
    bad = np.any(res == 0.0, axis=-1)
    discarded = 0
    for _ in range(MAX_RESAMPLE_ROUNDS):
        k = int(np.count_nonzero(bad))
        if not k:
            break
        discarded += k
        g2, h2 = draw(rng, k)
        idx = np.flatnonzero(bad)
        grads[idx], hess[idx] = g2, h2
        _, res2 = gram_schmidt(g2)
        bad[idx] = np.any(res2 == 0.0, axis=-1)
    else:
        raise RuntimeError("gradients keep coming out dependent")

    u = uniform_sphere(rng, s, size)
    ws = build_weingarten(grads, hess, u)
    e_k = elementary_symmetric(np.linalg.eigvalsh(ws.L))
    return (ws.gram[:, None] * e_k).mean(axis=0), discarded


def _integrable(n: int, s: int, k: int) -> bool:
    # gram * e_k(L) behaves like a chi variable with n - s + 1 degrees of
    # freedom raised to the power 1 - k; its variance is finite iff 2k - 2 < n - s + 1
    return n - s + 1 > 2 * k - 2


def estimate_rice_curvature(
    ensembles: Sequence[PolynomialEnsemble],
    n: int,
    samples: int,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
    batches: int = RICE_BATCHES,
    include_odd: bool = True,
) -> list[EstimateRecord]:
    """E K_{s+2j}(Z(f_1..f_s)) in S^n for j = 0..(n-s)/2, from the spectrum of the
    Weingarten map at q. With ``include_odd`` the odd elementary symmetric
    accumulators are also reported; they must vanish by the symmetry u -> -u.

    Records whose second moment is infinite carry ``error_bar=False`` and no z.
    """
    es = tuple(ensembles)
    s = len(es)
    if not 1 <= s <= n - 1:
        raise ValueError(f"need 1 <= s <= n - 1, got s={s}, n={n}")
    for e in es:
        if not e.delta > 0:
            raise ValueError(f"curvature estimates need delta > 0, got {e.describe()}")
    means, sizes, discarded = run_batches(partial(_rice_batch, es, n), samples, seed, batches, workers)
    const = rice_constant(n, s)
    targets = expected_tube_coefficients(n, [e.delta for e in es])
    label = _factors_label(es)
    records = []
    for k in range(n - s + 1):
        if k % 2 and not include_odd:
            continue
        target = targets.K(s + k) if k % 2 == 0 else 0.0
        name = f"K_{s + k}" if k % 2 == 0 else f"odd e_{k}"
        records.append(
            summarize(
                "rice_curvature", _params(n=n, s=s, factors=label, coefficient=name),
                const * means[:, k], sizes, target, discarded, seed,
                error_bar=_integrable(n, s, k),
            )
        )
    return records


# ----------------------------------------------------------------- tubes


def _tube_batch(n: int, k: int, alpha: float, rng: np.random.Generator, size: int):
    x = uniform_sphere(rng, n + 1, size)
    dist = np.arcsin(np.clip(np.linalg.norm(x[:, n + 1 - k :], axis=1), 0.0, 1.0))
    return np.array([sphere_volume(n) * np.mean(dist <= alpha)]), 0


def estimate_tube_volume_subsphere(
    n: int,
    k: int,
    alpha: float,
    samples: int,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
    batches: int = DEFAULT_BATCHES,
) -> EstimateRecord:
    """Volume of the alpha-tube around a great S^{n-k} in S^n by uniform sampling."""
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got n={n}, k={k}")
    if not 0.0 < alpha < 0.5 * math.pi:
        raise ValueError(f"alpha must lie in (0, pi/2), got {alpha!r}")
    target = sphere_volume(n - k) * sphere_volume(k - 1) * tube_integral(n, k, alpha)
    means, sizes, discarded = run_batches(partial(_tube_batch, n, k, alpha), samples, seed, batches, workers)
    return summarize(
        "tube_subsphere", _params(n=n, k=k, alpha=f"{alpha:.6g}"),
        means[:, 0], sizes, target, discarded, seed,
    )
