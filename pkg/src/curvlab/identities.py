"""Suites of identity checks: sampled random-matrix identities and exact
power-series identities. Each check becomes one EstimateRecord."""

from __future__ import annotations

import math
from fractions import Fraction
from functools import partial

import numpy as np

from .ensembles import kostlan, mixture, sample_jet
from .montecarlo import DEFAULT_BATCHES, EstimateRecord, derive_seed, exact_record, run_batches, summarize
from .rectangular import _full_rank_gaussian, expected_vol_inverse_power, expected_volume, gram_schmidt, pseudoinverse_pipelines
from .series import (
    CurvaturePolynomial,
    euler_characteristic,
    expected_curvature_polynomial,
    expected_euler_hypersurface_series,
    hypersurface_series,
    kinematic_product,
)
from .special import gaussian_abs_moment, series_coefficient, sphere_volume
from .symmetric import SymmetricEnsemble, condition_on_linear, expected_det_identity, goe_like, sample as sample_symmetric

__all__ = [
    "DET_REPRESENTATIVES",
    "INVERSE_POWER_GRID",
    "PIPELINE_CASES",
    "matrix_identity_records",
    "algebra_identity_records",
    "pipeline_functionals",
]

# (r, s_off) per delta; each mixes both components where it can
DET_REPRESENTATIVES = {-1.0: (0.0, 1.0), 0.0: (1.0, 1.0), 1.0: (math.sqrt(2.0), 1.0), 3.0: (2.0, 1.0)}
# (n, m, j) with a finite second moment: 4j - 2 < n - m + 1
INVERSE_POWER_GRID = ((3, 1, 0), (3, 2, 0), (4, 2, 0), (4, 2, 1), (5, 1, 1), (5, 3, 1), (6, 2, 1), (7, 1, 2))
VOLUME_GRID = ((3, 1), (3, 2), (4, 2), (5, 3))
PIPELINE_CASES = ((3, 2), (4, 2), (4, 3))
NAME = "matrix_identities"


def _det_batch(n: int, r: float, s_off: float, rng, size: int):
    w = sample_symmetric(SymmetricEnsemble(n, r, s_off), rng, size)
    return np.array([np.linalg.det(np.eye(n) + w).mean()]), 0


def _det_t_batch(n: int, rng, size: int):
    return np.array([np.linalg.det(goe_like(rng, n, size)).mean()]), 0


def _volume_batch(n: int, m: int, rng, size: int):
    _, res = gram_schmidt(rng.standard_normal((size, m, n)))
    return np.array([np.prod(res, axis=1).mean()]), 0


def _inverse_power_batch(n: int, m: int, j: int, rng, size: int):
    a, discarded = _full_rank_gaussian(rng, size, m, n)
    _, res = gram_schmidt(a)
    value = np.prod(res[:, : m - 1], axis=1) * res[:, m - 1] ** (1 - 2 * j)
    return np.array([value.mean()]), discarded


def pipeline_functionals(n: int, s: int) -> list[str]:
    """Functionals of (scalar, vector) compared across the two pipelines.

    Only functionals with a finite variance are used: ||vector|| is distributed as
    1/chi_{n-s+1}, so its p-th power needs 2p < n - s + 1.
    """
    names = ["scalar", "scalar^2", "scalar*|vector|", "1/(1+|vector|^2)", "vector_1^2/|vector|^2"]
    if 2 < n - s + 1:
        names.append("|vector|")
    return names


def _evaluate_functionals(names, scalar, vector):
    norm = np.linalg.norm(vector, axis=1)
    table = {
        "scalar": scalar,
        "scalar^2": scalar**2,
        "scalar*|vector|": scalar * norm,
        "1/(1+|vector|^2)": 1.0 / (1.0 + norm**2),
        "vector_1^2/|vector|^2": vector[:, 0] ** 2 / norm**2,
        "|vector|": norm,
    }
    return np.array([table[k].mean() for k in names])


def _pipeline_batch(n: int, s: int, rng, size: int):
    out = pseudoinverse_pipelines(n, s, rng, size)
    names = pipeline_functionals(n, s)
    first = _evaluate_functionals(names, out["scalar1"], out["vector1"])
    second = _evaluate_functionals(names, out["scalar2"], out["vector2"])
    return np.concatenate([first - second, first[:1]]), int(out["discarded"])


def _conditioned_delta_batch(d: int, n: int, rng, size: int):
    jet = sample_jet(kostlan(n, d), rng, size, conditioned=True)
    w = jet.hessian
    tr = np.trace(w, axis1=1, axis2=2)
    frob = np.einsum("kij,kij->k", w, w)
    return np.array([((tr**2 - frob) / (n * (n - 1))).mean()]), 0


def _trace_batch(e, rng, size: int):
    jet = sample_jet(e, rng, size)
    return np.array([(jet.value * np.trace(jet.hessian, axis1=1, axis2=2)).mean()]), 0


def _regression_batch(n: int, rng, size: int):
    # W = u I + V with delta(V) = -1: delta(W) = 0, E u^2 = 1, E(u tr W) = n
    u = rng.standard_normal(size)
    w = sample_symmetric(SymmetricEnsemble.from_delta(n, -1.0), rng, size) + u[:, None, None] * np.eye(n)
    wc = w - condition_on_linear(n, 0.0, 1.0, float(n)).lam * u[:, None, None] * np.eye(n)
    tr = np.trace(wc, axis1=1, axis2=2)
    frob = np.einsum("kij,kij->k", wc, wc)
    return np.array([((tr**2 - frob) / (n * (n - 1))).mean()]), 0


def matrix_identity_records(
    samples: int, seed: int, workers: int = 1, batches: int = DEFAULT_BATCHES
) -> list[EstimateRecord]:
    records = []
    cell = 0

    def run(fn, params, target, error_bar=True, column=0):
        nonlocal cell
        cell += 1
        cell_seed = derive_seed(seed, cell)
        means, sizes, discarded = run_batches(fn, samples, cell_seed, batches, workers)
        records.append(summarize(NAME, params, means[:, column], sizes, target, discarded, seed, error_bar))
        return means, sizes, discarded

    for n in range(2, 9):
        for delta, (r, s_off) in DET_REPRESENTATIVES.items():
            run(
                partial(_det_batch, n, r, s_off),
                f"E det(I+W) n={n} delta={delta:g} r={r:.6g} s={s_off:g}",
                expected_det_identity(n, delta),
            )
    for n in range(2, 7):
        target = (-1) ** (n // 2) * gaussian_abs_moment(n) if n % 2 == 0 else 0.0
        run(partial(_det_t_batch, n), f"E det T n={n}", target)
    for n, m in VOLUME_GRID:
        run(partial(_volume_batch, n, m), f"E vol n={n} m={m}", expected_volume(n, m))
    for n, m, j in INVERSE_POWER_GRID:
        run(
            partial(_inverse_power_batch, n, m, j),
            f"E vol_(m-1)/|A_m^perp|^(2j-1) n={n} m={m} j={j}",
            expected_vol_inverse_power(n, m, j),
        )
    for n, s in PIPELINE_CASES:
        names = pipeline_functionals(n, s)
        means, sizes, discarded = run(
            partial(_pipeline_batch, n, s), f"pipelines n={n} s={s} {names[0]} (first - second)", 0.0
        )
        for col, name in enumerate(names[1:], start=1):
            records.append(
                summarize(NAME, f"pipelines n={n} s={s} {name} (first - second)", means[:, col], sizes, 0.0, discarded, seed)
            )
        records.append(
            summarize(
                NAME, f"pipelines n={n} s={s} E scalar (first)", means[:, len(names)], sizes,
                expected_volume(n, s), discarded, seed,
            )
        )
    for d in (2, 3):
        run(partial(_conditioned_delta_batch, d, 3), f"conditioned kostlan delta n=3 d={d}", d * (1 - d))
    for e in (kostlan(3, 2), kostlan(3, 3), mixture(3, 2, [1, 3])):
        run(partial(_trace_batch, e), f"E(u tr W) n=3 {e.describe()}", -3 * e.delta)
    run(
        partial(_regression_batch, 3),
        "conditioned regression n=3 delta(W)=0 E(u tr W)=3",
        condition_on_linear(3, 0.0, 1.0, 3.0).delta,
    )
    return records


# ----------------------------------------------------------------- exact


def _max_dev(pairs) -> float:
    """Largest deviation, relative once the reference exceeds 1 in size."""
    return max((abs(float(a) - float(b)) / max(1.0, abs(float(b))) for a, b in pairs), default=0.0)


def _convolution_deviation(smax: int = 6, kmax: int = 12) -> float:
    c1 = [series_coefficient(1, k) for k in range(kmax + 1)]
    power = [Fraction(1)] + [Fraction(0)] * kmax
    worst = Fraction(0)
    for s in range(1, smax + 1):
        power = [sum(power[i] * c1[k - i] for i in range(k + 1)) for k in range(kmax + 1)]
        worst = max([worst] + [abs(power[k] - series_coefficient(s, k)) for k in range(kmax + 1)])
    return float(worst)


PRODUCT_CASES = (
    (4, [2.0], [0.5]),
    (6, [3.0], [0.25, 1.5]),
    (7, [2.0, 5.0], [0.3]),
    (9, [0.5, 4.0], [2.0, 1.0]),
)
DELTA_GRID = (0.25, 0.5, 1.0, 2.0, 3.0, 4.0, 7.5)


def _kinematic_deviation() -> float:
    worst = 0.0
    for n, d1, d2 in PRODUCT_CASES:
        prod = kinematic_product(expected_curvature_polynomial(n, d1), expected_curvature_polynomial(n, d2))
        direct = expected_curvature_polynomial(n, d1 + d2)
        worst = max(worst, _max_dev(zip(prod.mu, direct.mu)))
    return worst


def _euler_series_deviation(order: int = 20) -> float:
    worst = 0.0
    for delta in DELTA_GRID:
        chi = expected_euler_hypersurface_series(delta, order)
        # (1 - T^2) chi(T) in powers of T^2
        lhs = [chi[0]] + [chi[k] - chi[k - 1] for k in range(1, order + 1)]
        worst = max(worst, _max_dev(zip(lhs, hypersurface_series(delta, order + 1))))
    return worst


def _telescoping_deviation() -> float:
    worst = 0.0
    for delta in DELTA_GRID:
        for n in (5, 7, 9, 11):
            mu = expected_curvature_polynomial(n, [delta])
            chi = expected_euler_hypersurface_series(delta, (n - 1) // 2)
            worst = max(worst, _max_dev((mu.coefficient(2 * k), chi[k] - chi[k - 1]) for k in range(1, (n - 1) // 2 + 1)))
    return worst


def _gauss_bonnet_deviation() -> float:
    worst = 0.0
    for delta in DELTA_GRID:
        for n in (1, 3, 5, 7, 9):
            chi = euler_characteristic(expected_curvature_polynomial(n, [delta]), "projective")
            worst = max(worst, _max_dev([(chi, expected_euler_hypersurface_series(delta, (n - 1) // 2)[-1])]))
    return worst


def _sphere_moment_deviation(nmax: int = 20) -> float:
    return max(
        abs(sphere_volume(n) * gaussian_abs_moment(n) / (2.0 * (2.0 * math.pi) ** (0.5 * n)) - 1.0)
        for n in range(nmax + 1)
    )


def _dimension_independence_deviation() -> float:
    worst = 0.0
    for delta in DELTA_GRID:
        big = expected_curvature_polynomial(15, [delta, 2.0])
        for n in range(2, 15):
            small = expected_curvature_polynomial(n, [delta, 2.0])
            worst = max(worst, _max_dev((c, big.mu[i]) for i, c in enumerate(small.mu)))
    return worst


def _subsphere_product_deviation() -> float:
    worst = 0.0
    for n, d1, _ in PRODUCT_CASES:
        a = expected_curvature_polynomial(n, d1)
        for p in range(n - a.m, n + 1):
            b = CurvaturePolynomial.subsphere(n, n - p)
            prod = kinematic_product(a, b)
            worst = max(worst, _max_dev(zip(prod.mu, a.mu[: len(prod.mu)])))
    return worst


ALGEBRA_CHECKS = (
    ("C^(s)_k equals the s-fold convolution of C^(1), s<=6, k<=12", _convolution_deviation),
    ("kinematic product of expectations equals expectation of the joint system", _kinematic_deviation),
    ("(1-T^2) chi(delta;T) equals sqrt(delta)(1-(1-delta)T^2)^(-1/2) to order 20", _euler_series_deviation),
    ("mu_2k equals chi_k - chi_(k-1)", _telescoping_deviation),
    ("Gauss-Bonnet: sum of mu_e equals chi_((n-1)/2) for odd n", _gauss_bonnet_deviation),
    ("O_n gamma_n / (2 (2 pi)^(n/2)) - 1, n<=20", _sphere_moment_deviation),
    ("mu_e independent of the ambient dimension", _dimension_independence_deviation),
    ("product with a great subsphere only truncates", _subsphere_product_deviation),
)


def algebra_identity_records() -> list[EstimateRecord]:
    return [exact_record("algebra_identities", label, fn(), 0.0) for label, fn in ALGEBRA_CHECKS]
