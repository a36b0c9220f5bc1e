"""Curvature polynomials as truncated even power series.

A curvature polynomial mu(M;T) of an m-dimensional submanifold M of S^n (or P^n)
only has even powers of T up to T^m. Coefficients are stored densely by e/2, so
``mu[i]`` is the coefficient of T^{2i}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .special import series_coefficient, sphere_volume, tube_integral

__all__ = [
    "CurvaturePolynomial",
    "TubeCoefficients",
    "mu_from_K",
    "K_from_mu",
    "tube_volume",
    "kinematic_product",
    "euler_characteristic",
    "hypersurface_series",
    "expected_curvature_polynomial",
    "expected_tube_coefficients",
    "expected_euler_hypersurface_series",
    "multiply_series",
]


def _check_dims(n: int, s: int) -> None:
    if n < 1 or not 0 <= s <= n:
        raise ValueError(f"need n >= 1 and 0 <= s <= n, got n={n}, s={s}")


@dataclass(frozen=True)
class CurvaturePolynomial:
    """mu(M;T) for a codimension-s submanifold of an n-dimensional sphere or projective space."""

    n: int
    s: int
    mu: tuple[float, ...]

    def __post_init__(self) -> None:
        _check_dims(self.n, self.s)
        expected = self.m // 2 + 1
        if len(self.mu) != expected:
            raise ValueError(
                f"intrinsic dimension {self.m} needs {expected} even coefficients, got {len(self.mu)}"
            )
        object.__setattr__(self, "mu", tuple(float(c) for c in self.mu))

    @property
    def m(self) -> int:
        return self.n - self.s

    @classmethod
    def from_even(cls, n: int, s: int, coeffs: Iterable[float]) -> "CurvaturePolynomial":
        """Build from coefficients of T^0, T^2, ...; pads with zeros or truncates at T^m."""
        _check_dims(n, s)
        size = (n - s) // 2 + 1
        coeffs = list(coeffs)[:size]
        coeffs += [0.0] * (size - len(coeffs))
        return cls(n, s, tuple(coeffs))

    @classmethod
    def zero(cls, n: int, s: int) -> "CurvaturePolynomial":
        """The empty variety, mu(empty;T) := 0."""
        return cls.from_even(n, s, [])

    @classmethod
    def subsphere(cls, n: int, s: int) -> "CurvaturePolynomial":
        """A great subsphere (or projective subspace): mu = 1."""
        return cls.from_even(n, s, [1.0])

    def coefficient(self, e: int) -> float:
        """mu_e; zero for odd e and for e outside 0..m."""
        if e < 0 or e % 2 or e > self.m:
            return 0.0
        return self.mu[e // 2]

    def __call__(self, t: float) -> float:
        return sum(c * t ** (2 * i) for i, c in enumerate(self.mu))

    def to_json(self) -> dict:
        return {"n": self.n, "s": self.s, "mu": list(self.mu)}

    @classmethod
    def from_json(cls, obj: dict) -> "CurvaturePolynomial":
        return cls(int(obj["n"]), int(obj["s"]), tuple(obj["mu"]))


@dataclass(frozen=True)
class TubeCoefficients:
    """Weyl coefficients K_{s+e}, e even, of a codimension-s submanifold of S^n.

    ``values[i]`` holds K_{s+2i}.
    """

    n: int
    s: int
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        _check_dims(self.n, self.s)
        if self.s < 1:
            raise ValueError("tube coefficients need codimension s >= 1")
        expected = (self.n - self.s) // 2 + 1
        if len(self.values) != expected:
            raise ValueError(f"expected {expected} coefficients, got {len(self.values)}")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    def K(self, k: int) -> float:
        """K_k, zero unless k - s is even and in range."""
        e = k - self.s
        if e < 0 or e % 2 or e > self.n - self.s:
            return 0.0
        return self.values[e // 2]


def _rescaling(n: int, s: int, e: int) -> float:
    m = n - s
    return sphere_volume(m - e) * sphere_volume(s + e - 1)


def mu_from_K(K: TubeCoefficients) -> CurvaturePolynomial:
    return CurvaturePolynomial(
        K.n, K.s, tuple(v / _rescaling(K.n, K.s, 2 * i) for i, v in enumerate(K.values))
    )


def K_from_mu(mu: CurvaturePolynomial) -> TubeCoefficients:
    return TubeCoefficients(
        mu.n, mu.s, tuple(c * _rescaling(mu.n, mu.s, 2 * i) for i, c in enumerate(mu.mu))
    )


def tube_volume(K: TubeCoefficients, alpha: float) -> float:
    """Weyl's expansion sum_e K_{s+e} J_{n,s+e}(alpha)."""
    if not 0.0 < alpha < 0.5 * math.pi:
        raise ValueError(f"alpha must lie in (0, pi/2), got {alpha!r}")
    return sum(v * tube_integral(K.n, K.s + 2 * i, alpha) for i, v in enumerate(K.values))


def multiply_series(a: Sequence[float], b: Sequence[float], size: int) -> list[float]:
    """Cauchy product of two coefficient sequences, keeping the first ``size`` terms."""
    out = [0.0] * size
    for i, x in enumerate(a[:size]):
        if x == 0.0:
            continue
        for j, y in enumerate(b[: size - i]):
            out[i + j] += x * y
    return out


def kinematic_product(a: CurvaturePolynomial, b: CurvaturePolynomial) -> CurvaturePolynomial:
    """Expected curvature polynomial of M ∩ gN for Haar-random g: mu(M) mu(N) mod T^{m+p-n+1}."""
    if a.n != b.n:
        raise ValueError(f"ambient dimensions differ: {a.n} vs {b.n}")
    m = a.m + b.m - a.n
    if m < 0:
        raise ValueError(f"intersection is generically empty: m_a + m_b = {a.m + b.m} < n = {a.n}")
    size = m // 2 + 1
    return CurvaturePolynomial(a.n, a.s + b.s, tuple(multiply_series(a.mu, b.mu, size)))


def euler_characteristic(mu: CurvaturePolynomial, space: str = "projective") -> float:
    """Gauss-Bonnet: chi = 2 mu(1) in the sphere, mu(1) in projective space; 0 for odd m."""
    if space not in ("sphere", "projective"):
        raise ValueError(f"space must be 'sphere' or 'projective', got {space!r}")
    if mu.m % 2:
        return 0.0
    total = math.fsum(mu.mu)
    return 2.0 * total if space == "sphere" else total


def hypersurface_series(delta: float, size: int) -> list[float]:
    """First ``size`` coefficients (in T^2) of sqrt(delta) (1 - (1-delta) T^2)^{-1/2}.

    delta = 0 is accepted and gives the zero series.
    """
    if delta < 0:
        raise ValueError(f"parameter must be >= 0, got {delta!r}")
    root = math.sqrt(delta)
    x = 1.0 - delta
    return [root * float(series_coefficient(1, k)) * x**k for k in range(size)]


def expected_curvature_polynomial(n: int, deltas: Sequence[float]) -> CurvaturePolynomial:
    """Expected curvature polynomial of the zero set of s independent invariant
    Gaussian forms with parameters ``deltas`` in P^n."""
    s = len(deltas)
    if not 1 <= s <= n:
        raise ValueError(f"need 1 <= s <= n, got s={s}, n={n}")
    for d in deltas:
        if not d > 0:
            raise ValueError(f"parameters must be positive, got {d!r}")
    size = (n - s) // 2 + 1
    coeffs = [1.0] + [0.0] * (size - 1)
    for d in deltas:
        coeffs = multiply_series(coeffs, hypersurface_series(d, size), size)
    return CurvaturePolynomial(n, s, tuple(coeffs))


def expected_tube_coefficients(n: int, deltas: Sequence[float]) -> TubeCoefficients:
    """E K_{s+2j} of the zero set in S^n (preimage of the projective variety)."""
    return K_from_mu(expected_curvature_polynomial(n, deltas))


def expected_euler_hypersurface_series(delta: float, max_ell: int) -> list[float]:
    """chi_0(delta), ..., chi_{max_ell}(delta): expected Euler characteristic of a random
    hypersurface in P^{2l+1}, as partial sums of the hypersurface series."""
    if max_ell < 0:
        raise ValueError("max_ell must be >= 0")
    terms = hypersurface_series(delta, max_ell + 1)
    out, acc = [], 0.0
    for t in terms:
        acc += t
        out.append(acc)
    return out
