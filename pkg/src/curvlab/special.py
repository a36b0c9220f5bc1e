"""Scalar constants and integrals: sphere volumes, Gaussian absolute moments,
the tube integrals J_{n,k} and the binomial-series coefficients C_k^{(s)}."""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

from scipy import integrate, special

__all__ = [
    "sphere_volume",
    "projective_volume",
    "gaussian_abs_moment",
    "chi_mean",
    "tube_integral",
    "tube_integral_beta",
    "series_coefficient",
    "series_coefficients",
]

HALF_PI = 0.5 * math.pi


def sphere_volume(n: int) -> float:
    """Volume O_n of the unit sphere S^n in R^{n+1}.

    O_0 = 2 (two points), O_1 = 2*pi, O_2 = 4*pi.
    """
    if n < 0:
        raise ValueError(f"sphere dimension must be >= 0, got {n}")
    h = 0.5 * (n + 1)
    return 2.0 * math.pi**h / math.gamma(h)


def projective_volume(n: int) -> float:
    """Volume of real projective space P^n (half the sphere)."""
    return 0.5 * sphere_volume(n)


def gaussian_abs_moment(k: int) -> float:
    """E|X|^k for standard normal X."""
    if k < 0:
        raise ValueError(f"moment order must be >= 0, got {k}")
    if k % 2 == 0:
        # double factorial, exact in floating point for the sizes used here
        return float(math.prod(range(1, k, 2)))
    return 2.0 ** (0.5 * k) * math.gamma(0.5 * (k + 1)) / math.sqrt(math.pi)


def chi_mean(d: int) -> float:
    """E||X|| for standard normal X in R^d, i.e. gamma_d / gamma_{d-1}."""
    if d < 1:
        raise ValueError("chi_mean needs d >= 1")
    return math.sqrt(2.0) * math.exp(math.lgamma(0.5 * (d + 1)) - math.lgamma(0.5 * d))


def _check_tube_args(n: int, k: int, alpha: float) -> None:
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got n={n}, k={k}")
    if not 0.0 <= alpha < HALF_PI:
        raise ValueError(f"alpha must lie in [0, pi/2), got {alpha!r}")


def tube_integral(n: int, k: int, alpha: float) -> float:
    """J_{n,k}(alpha) = int_0^alpha sin^{k-1}(rho) cos^{n-k}(rho) drho.

    Adaptive Gauss-Kronrod quadrature (QUADPACK) at absolute tolerance 1e-12.
    """
    _check_tube_args(n, k, alpha)
    if alpha == 0.0:
        return 0.0
    value, _ = integrate.quad(
        lambda rho: math.sin(rho) ** (k - 1) * math.cos(rho) ** (n - k),
        0.0,
        alpha,
        epsabs=1e-13,
        epsrel=1e-13,
        limit=200,
    )
    return value


def tube_integral_beta(n: int, k: int, alpha: float) -> float:
    """Same integral through the regularized incomplete beta function.

    With t = sin^2(rho) the integrand becomes (1/2) t^{k/2-1} (1-t)^{(n-k-1)/2}.
    """
    _check_tube_args(n, k, alpha)
    a = 0.5 * k
    b = 0.5 * (n - k + 1)
    t = math.sin(alpha) ** 2
    return 0.5 * special.beta(a, b) * special.betainc(a, b, t)


@lru_cache(maxsize=None)
def series_coefficient(s: int, k: int) -> Fraction:
    """C_k^{(s)} = s(s+2)...(s+2k-2) / (k! 2^k), the coefficients of (1-Y)^{-s/2}."""
    if s < 1:
        raise ValueError(f"s must be >= 1, got {s}")
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    num = math.prod(s + 2 * i for i in range(k))
    return Fraction(num, math.factorial(k) * 2**k)


def series_coefficients(s: int, kmax: int) -> list[Fraction]:
    return [series_coefficient(s, k) for k in range(kmax + 1)]
