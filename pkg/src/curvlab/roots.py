"""Counting real roots of random polynomials.

Univariate counts use Sturm chains. The chain is run in floating point for a
whole stack of polynomials at once along the generic path, where every
remainder drops the degree by exactly one; any polynomial that leaves the
generic path (a near-vanishing leading coefficient in the chain) is recounted
with exact rational arithmetic on its floating-point coefficients.

Common real zeros of two ternary forms are counted through the Sylvester
resultant with respect to the last variable.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

__all__ = [
    "sturm_chain",
    "count_real_roots_exact",
    "count_real_roots",
    "count_projective_roots",
    "resultant_coefficients",
    "count_common_zeros_p2",
]

CHAIN_TOL = 1e-9
INFINITY_TOL = 1e-12


def _trim(p: list[Fraction]) -> list[Fraction]:
    i = 0
    while i < len(p) - 1 and p[i] == 0:
        i += 1
    return p[i:]


def _rem(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    """Remainder of a by b, coefficients highest degree first."""
    a = list(a)
    while len(a) >= len(b) and any(a):
        factor = a[0] / b[0]
        for i in range(len(b)):
            a[i] -= factor * b[i]
        a.pop(0)
    return _trim(a) if a else [Fraction(0)]


def sturm_chain(coeffs: Sequence) -> list[list[Fraction]]:
    """Exact Sturm sequence of p(t) = sum_a coeffs[a] t^a (ascending powers)."""
    p = _trim([Fraction(c) for c in reversed(list(coeffs))])
    if not any(p):
        raise ValueError("zero polynomial has no Sturm chain")
    deg = len(p) - 1
    dp = [c * (deg - i) for i, c in enumerate(p[:-1])] or [Fraction(0)]
    chain = [p]
    if any(dp):
        chain.append(_trim(dp))
    while len(chain) >= 2 and len(chain[-1]) > 1:
        r = _rem(chain[-2], chain[-1])
        if not any(r):
            break
        chain.append([-c for c in r])
    return chain


def _sign_changes(signs: Sequence[int]) -> int:
    nz = [s for s in signs if s != 0]
    return sum(1 for a, b in zip(nz, nz[1:]) if a != b)


def count_real_roots_exact(coeffs: Sequence) -> int:
    """Number of distinct real roots of sum_a coeffs[a] t^a, exact in rationals."""
    chain = sturm_chain(coeffs)
    plus = [(1 if q[0] > 0 else -1) for q in chain]
    minus = [s * (-1) ** (len(q) - 1) for s, q in zip(plus, chain)]
    return _sign_changes(minus) - _sign_changes(plus)


def count_real_roots(coeffs: np.ndarray) -> np.ndarray:
    """Distinct real roots of each row p(t) = sum_a c[a] t^a of a (B, d+1) array.

    The top coefficient of every row must be nonzero.
    """
    c = np.atleast_2d(np.asarray(coeffs, dtype=float))
    batch, width = c.shape
    deg = width - 1
    if deg == 0:
        return np.zeros(batch, dtype=int)
    if np.any(c[:, -1] == 0):
        raise ValueError("leading coefficients must be nonzero")

    prev = c[:, ::-1] / np.max(np.abs(c), axis=1, keepdims=True)
    cur = prev[:, :-1] * np.arange(deg, 0, -1)
    cur = cur / np.max(np.abs(cur), axis=1, keepdims=True)
    lead = [np.sign(prev[:, 0]), np.sign(cur[:, 0])]
    suspect = np.zeros(batch, dtype=bool)
    # rows that hit a zero leading coefficient are already flagged; their inf/nan is discarded
    with np.errstate(divide="ignore", invalid="ignore"):
        for _ in range(deg - 1):
            # prev has one more coefficient than cur; divide by (a t + b) cur
            a = prev[:, :1] / cur[:, :1]
            tmp = prev[:, 1:-1] - a * cur[:, 1:]
            tmp = np.concatenate([tmp, prev[:, -1:]], axis=1)
            b = tmp[:, :1] / cur[:, :1]
            rem = -(tmp[:, 1:] - b * cur[:, 1:])
            scale = np.max(np.abs(rem), axis=1)
            suspect |= scale <= CHAIN_TOL * np.max(np.abs(tmp), axis=1)
            suspect |= np.abs(rem[:, 0]) <= CHAIN_TOL * scale
            rem = rem / np.where(scale > 0, scale, 1.0)[:, None]
            lead.append(np.sign(rem[:, 0]))
            prev, cur = cur, rem

    plus = np.stack(lead, axis=1)
    degrees = np.arange(deg, -1, -1)
    minus = plus * np.where(degrees % 2, -1.0, 1.0)
    counts = np.sum(minus[:, 1:] != minus[:, :-1], axis=1) - np.sum(plus[:, 1:] != plus[:, :-1], axis=1)
    counts = counts.astype(int)
    for i in np.flatnonzero(suspect):
        counts[i] = count_real_roots_exact(c[i])
    return counts


def count_projective_roots(forms: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Real roots in P^1 of binary forms given by rows (c_0..c_d), c_a the coefficient
    of x0^{d-a} x1^a.

    Returns (counts, degenerate) where ``degenerate`` flags forms with a (numerical)
    root at infinity, |c_d| < 1e-12 ||c||; their counts are meaningless and callers
    resample them.
    """
    c = np.atleast_2d(np.asarray(forms, dtype=float))
    degenerate = np.abs(c[:, -1]) < INFINITY_TOL * np.linalg.norm(c, axis=1)
    counts = np.zeros(c.shape[0], dtype=int)
    ok = ~degenerate
    if np.any(ok):
        counts[ok] = count_real_roots(c[ok])
    return counts, degenerate


def _y_coefficients(coeffs: np.ndarray, mons, d: int) -> list[list[np.ndarray]]:
    """Split f(1, x, y) into sum_j a_j(x) y^j; a_j[i] is the x^i coefficient, per batch."""
    out = [[np.zeros(coeffs.shape[0]) for _ in range(d - j + 1)] for j in range(d + 1)]
    for col, (_, ex, ey) in enumerate(mons):
        out[ey][ex] = out[ey][ex] + coeffs[:, col]
    return out


def resultant_coefficients(f: np.ndarray, g: np.ndarray, mons_f, mons_g, df: int, dg: int) -> np.ndarray:
    """Coefficients (ascending in x) of Res_y(f(1,x,y), g(1,x,y)) for stacks of ternary forms.

    The Sylvester determinant is evaluated at Chebyshev nodes and interpolated; its
    degree in x is at most df*dg.
    """
    batch = f.shape[0]
    deg = df * dg
    nodes = np.cos(np.pi * (np.arange(deg + 1) + 0.5) / (deg + 1))
    fy = _y_coefficients(f, mons_f, df)
    gy = _y_coefficients(g, mons_g, dg)

    def at_nodes(parts):
        # values (batch, nodes) of each y-coefficient polynomial a_j(x)
        return [sum(p[i][:, None] * nodes[None, :] ** i for i in range(len(p))) for p in parts]

    fv, gv = at_nodes(fy), at_nodes(gy)
    size = df + dg
    syl = np.zeros((batch, deg + 1, size, size))
    for row in range(dg):
        for j in range(df + 1):
            syl[:, :, row, row + df - j] = fv[j]
    for row in range(df):
        for j in range(dg + 1):
            syl[:, :, dg + row, row + dg - j] = gv[j]
    vals = np.linalg.det(syl)
    vander = np.vander(nodes, deg + 1, increasing=True)
    return np.linalg.solve(vander, vals.T).T


def count_common_zeros_p2(
    f: np.ndarray, g: np.ndarray, df: int, dg: int
) -> tuple[np.ndarray, np.ndarray]:
    """Common real zeros in P^2 of stacks of ternary forms (coefficients in
    ``monomials(3, d)`` order).

    Generically every real root x of the resultant lifts to exactly one common
    zero, which is then real. Returns (counts, degenerate); degenerate rows (zeros
    at infinity in the chart x0 = 1 or a resultant of deficient degree) must be
    resampled.
    """
    from .ensembles import monomials

    mons_f, mons_g = monomials(3, df), monomials(3, dg)
    res = resultant_coefficients(f, g, mons_f, mons_g, df, dg)
    degenerate = np.abs(res[:, -1]) < 1e-8 * np.max(np.abs(res), axis=1)
    counts = np.zeros(f.shape[0], dtype=int)
    ok = ~degenerate
    if np.any(ok):
        counts[ok] = count_real_roots(res[ok])
    return counts, degenerate
