"""Orthogonally invariant Gaussian ensembles of degree-d forms.

An ensemble is given by its covariance function

    r(x, y) = sum_k beta_k ||x||^{2k} ||y||^{2k} <x, y>^{d-2k},   beta_k >= 0,

normalized so that sum_k beta_k = E f(q)^2 = 1. Kostlan's ensemble is beta = (1, 0, ...).

Everything the curvature estimators need is the 2-jet of f at q = (1, 0, ..., 0):
the value u = f(q), the gradient g = Df(q) in R^n and the spherical second
derivative W = D^2 f(q) = A - d u I, where A holds the raw second partials in
the tangent coordinates x_1..x_n. All of its moments follow from derivatives of
r at (q, q):

    E u^2 = 1,  E g_i^2 = sum beta_k (d-2k) = delta,
    E(u a_ii) = sum beta_k 2k,  E(a_ii a_jj) = sum beta_k 4k^2,
    E a_ij^2 = sum beta_k (d-2k)(d-2k-1)   (i != j).

The diagonal variance E a_ii^2 is not among these; invariance of A under O(n)
forces E a_ii^2 = E(a_ii a_jj) + 2 E a_ij^2.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np

from .symmetric import SymmetricEnsemble, goe_like, sample as sample_symmetric

__all__ = [
    "PolynomialEnsemble",
    "JetCovariance",
    "JetSample",
    "kostlan",
    "mixture",
    "quadric_with_delta",
    "jet_covariance",
    "sample_jet",
    "monomials",
    "coefficient_covariance",
    "sample_form",
    "sample_binary_form",
    "quadric_matrix",
    "parse_ensemble",
]


@dataclass(frozen=True)
class PolynomialEnsemble:
    n: int
    d: int
    betas: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"need n >= 1, got {self.n}")
        if self.d < 1:
            raise ValueError(f"need degree d >= 1, got {self.d}")
        betas = tuple(float(b) for b in self.betas)
        if len(betas) != self.d // 2 + 1:
            raise ValueError(f"degree {self.d} needs {self.d // 2 + 1} weights, got {len(betas)}")
        if any(b < 0 or not math.isfinite(b) for b in betas):
            raise ValueError(f"weights must be finite and nonnegative, got {betas}")
        total = math.fsum(betas)
        if not total > 0:
            raise ValueError("weights must not all be zero")
        object.__setattr__(self, "betas", tuple(b / total for b in betas))

    @property
    def delta(self) -> float:
        return math.fsum(b * (self.d - 2 * k) for k, b in enumerate(self.betas))

    @property
    def is_kostlan(self) -> bool:
        return self.betas[0] == 1.0

    def covariance(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """r(x, y) evaluated on the last axis."""
        xx = np.sum(x * x, axis=-1)
        yy = np.sum(y * y, axis=-1)
        xy = np.sum(x * y, axis=-1)
        return sum(b * (xx * yy) ** k * xy ** (self.d - 2 * k) for k, b in enumerate(self.betas))

    def restrict(self, n: int) -> "PolynomialEnsemble":
        """Restriction to a coordinate subspace R^{n+1}: same weights, same parameter."""
        if not 1 <= n <= self.n:
            raise ValueError(f"cannot restrict P^{self.n} ensemble to P^{n}")
        return PolynomialEnsemble(n, self.d, self.betas)

    def describe(self) -> str:
        if self.is_kostlan:
            return f"kostlan(d={self.d})"
        return "mixture(d={}, betas=[{}])".format(self.d, ", ".join(f"{b:.6g}" for b in self.betas))

    @cached_property
    def jets(self) -> "JetCovariance":
        return jet_covariance(self)


def kostlan(n: int, d: int) -> PolynomialEnsemble:
    return PolynomialEnsemble(n, d, (1.0,) + (0.0,) * (d // 2))


def mixture(n: int, d: int, betas: Sequence[float]) -> PolynomialEnsemble:
    return PolynomialEnsemble(n, d, tuple(betas))


def quadric_with_delta(n: int, delta: float) -> PolynomialEnsemble:
    """Degree-2 ensemble with parameter delta in [0, 2]: betas = (delta/2, 1 - delta/2)."""
    if not 0 <= delta <= 2:
        raise ValueError(f"quadric parameters lie in [0, 2], got {delta!r}")
    return PolynomialEnsemble(n, 2, (0.5 * delta, 1.0 - 0.5 * delta))


@dataclass(frozen=True)
class JetCovariance:
    """Second moments of (u, g, A) at q, A being the raw second partials."""

    var_value: float
    var_grad: float
    offdiag_hess_var: float
    diag_hess_var: float
    diag_hess_cov: float
    value_hess_diag_cov: float
    degree: int

    @property
    def delta(self) -> float:
        return self.var_grad / self.var_value

    def conditioned_scales(self) -> tuple[float, float]:
        """(r, s_off) of W~ = W + delta u I, the part of D^2 f(q) independent of u.

        W~ = A - (d - delta) u I. Its off-diagonal variance is E a_12^2 and the
        covariance of two distinct diagonal entries is
        E(a_11 a_22) - (E u a_11)^2 = Var_beta(2k) >= 0.
        """
        r2 = self.diag_hess_cov - self.value_hess_diag_cov**2 / self.var_value
        if r2 < -1e-12:
            raise ValueError(f"infeasible jet moments: r^2 = {r2!r} < 0")
        return math.sqrt(max(r2, 0.0)), math.sqrt(max(self.offdiag_hess_var, 0.0))


def jet_covariance(e: PolynomialEnsemble) -> JetCovariance:
    d = e.d
    ks = range(len(e.betas))
    var_value = math.fsum(e.betas)
    var_grad = math.fsum(b * (d - 2 * k) for k, b in zip(ks, e.betas))
    off = math.fsum(b * (d - 2 * k) * (d - 2 * k - 1) for k, b in zip(ks, e.betas))
    cov = math.fsum(b * 4 * k * k for k, b in zip(ks, e.betas))
    val = math.fsum(b * 2 * k for k, b in zip(ks, e.betas))
    return JetCovariance(
        var_value=var_value,
        var_grad=var_grad,
        offdiag_hess_var=off,
        diag_hess_var=cov + 2 * off,
        diag_hess_cov=cov,
        value_hess_diag_cov=val,
        degree=d,
    )


@dataclass(frozen=True)
class JetSample:
    """value u (size,), gradient g (size, n), spherical Hessian W (size, n, n)."""

    value: np.ndarray
    gradient: np.ndarray
    hessian: np.ndarray


def sample_jet(
    e: PolynomialEnsemble,
    rng: np.random.Generator,
    size: int,
    conditioned: bool = False,
    dim: int | None = None,
) -> JetSample:
    """Exact draws of the 2-jet of f at q.

    W = W~ - delta u I with W~ independent of u (Gaussian regression on u), so
    conditioning on f(q) = 0 just means u = 0, W = W~. ``dim`` overrides the
    tangent dimension (defaults to e.n).
    """
    n = e.n if dim is None else dim
    if n < 2:
        raise ValueError("jets need tangent dimension n >= 2")
    jc = e.jets
    r, s_off = jc.conditioned_scales()
    delta = jc.delta
    u = np.zeros(size) if conditioned else rng.standard_normal(size)
    g = math.sqrt(delta) * rng.standard_normal((size, n))
    w = sample_symmetric(SymmetricEnsemble(n, r, s_off), rng, size)
    if not conditioned:
        idx = np.arange(n)
        w[:, idx, idx] -= delta * u[:, None]
    return JetSample(u, g, w)


def _multinomial(exps: Sequence[int]) -> int:
    out = math.factorial(sum(exps))
    for a in exps:
        out //= math.factorial(a)
    return out


@lru_cache(maxsize=None)
def monomials(nvars: int, d: int) -> tuple[tuple[int, ...], ...]:
    """Exponent vectors of degree-d monomials in ``nvars`` variables.

    For two variables the order is x0^d, x0^{d-1} x1, ..., x1^d.
    """
    out = []
    for combo in itertools.combinations_with_replacement(range(nvars), d):
        exps = [0] * nvars
        for i in combo:
            exps[i] += 1
        out.append(tuple(exps))
    out.sort(key=lambda a: tuple(-x for x in a))
    return tuple(out)


@lru_cache(maxsize=None)
def coefficient_covariance(nvars: int, d: int, betas: tuple[float, ...]) -> np.ndarray:
    """Covariance of the monomial coefficients of a form with covariance function r.

    Expands ||x||^{2k} ||y||^{2k} <x,y>^{d-2k} with multinomial coefficients and
    reads off the coefficient of x^a y^b.
    """
    mons = monomials(nvars, d)
    index = {a: i for i, a in enumerate(mons)}
    cov = np.zeros((len(mons), len(mons)))
    for k, beta in enumerate(betas):
        if beta == 0.0:
            continue
        squares = [(g, _multinomial(g)) for g in monomials(nvars, k)] if k else [((0,) * nvars, 1)]
        for alpha in monomials(nvars, d - 2 * k):
            ca = _multinomial(alpha)
            for g1, c1 in squares:
                a = index[tuple(al + 2 * x for al, x in zip(alpha, g1))]
                for g2, c2 in squares:
                    b = index[tuple(al + 2 * x for al, x in zip(alpha, g2))]
                    cov[a, b] += beta * c1 * c2 * ca
    return cov


@lru_cache(maxsize=None)
def _coefficient_factor(nvars: int, d: int, betas: tuple[float, ...]) -> np.ndarray:
    cov = coefficient_covariance(nvars, d, betas)
    vals, vecs = np.linalg.eigh(cov)
    return vecs * np.sqrt(np.clip(vals, 0.0, None))


def sample_form(
    e: PolynomialEnsemble, nvars: int, rng: np.random.Generator, size: int
) -> np.ndarray:
    """Coefficients (size, len(monomials(nvars, d))) of the restriction of f to a
    coordinate subspace with ``nvars`` variables."""
    if not 2 <= nvars <= e.n + 1:
        raise ValueError(f"cannot restrict a form in {e.n + 1} variables to {nvars}")
    if e.is_kostlan:
        std = np.sqrt([float(_multinomial(a)) for a in monomials(nvars, e.d)])
        return rng.standard_normal((size, len(std))) * std
    factor = _coefficient_factor(nvars, e.d, e.betas)
    return rng.standard_normal((size, factor.shape[1])) @ factor.T


def sample_binary_form(e: PolynomialEnsemble, rng: np.random.Generator, size: int) -> np.ndarray:
    """Binary restriction f(x0, x1) = sum_a c_a x0^{d-a} x1^a, rows are (c_0, ..., c_d)."""
    if e.d > 30:
        raise ValueError("binary forms are capped at degree 30")
    return sample_form(e, 2, rng, size)


def quadric_matrix(e: PolynomialEnsemble, rng: np.random.Generator, size: int) -> np.ndarray:
    """Symmetric (size, n+1, n+1) matrices Q with f(x) = x^T Q x distributed as e.

    The Kostlan part has Var Q_ii = 1 and Var Q_ij = 1/2; the ||x||^2 ||y||^2 part is
    an independent multiple of the identity.
    """
    if e.d != 2:
        raise ValueError(f"quadric matrices need degree 2, got {e.d}")
    b0, b1 = e.betas
    dim = e.n + 1
    q = math.sqrt(b0 / 2.0) * goe_like(rng, dim, size)
    z = rng.standard_normal(size)
    idx = np.arange(dim)
    q[:, idx, idx] += math.sqrt(b1) * z[:, None]
    return q


def parse_ensemble(spec, n: int, d: int | None = None) -> PolynomialEnsemble:
    """Build an ensemble from a config value.

    Accepted: "kostlan" (needs d), {"d": 3} or {"d": 3, "kostlan": true},
    {"d": 2, "betas": [1, 3]}, {"d": 2, "delta": 0.5} (degree-2 only).
    """
    if isinstance(spec, str):
        if spec != "kostlan":
            raise ValueError(f"unknown ensemble {spec!r}")
        if d is None:
            raise ValueError("'kostlan' needs a degree d")
        return kostlan(n, d)
    if isinstance(spec, int):
        return kostlan(n, spec)
    if not isinstance(spec, dict):
        raise ValueError(f"cannot parse ensemble {spec!r}")
    deg = spec.get("d", d)
    if deg is None:
        raise ValueError(f"ensemble {spec!r} has no degree d")
    deg = int(deg)
    if "betas" in spec:
        return mixture(n, deg, spec["betas"])
    if "delta" in spec:
        if deg != 2:
            raise ValueError("'delta' shorthand is only defined for degree 2")
        return quadric_with_delta(n, float(spec["delta"]))
    return kostlan(n, deg)
