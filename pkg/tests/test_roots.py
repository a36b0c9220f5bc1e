import math
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from curvlab.ensembles import kostlan, monomials, sample_form
from curvlab.roots import (
    count_common_zeros_p2,
    count_projective_roots,
    count_real_roots,
    count_real_roots_exact,
    resultant_coefficients,
    sturm_chain,
)


@pytest.mark.parametrize(
    "coeffs, expected",
    [
        ([-1, 0, 1], 2),
        ([1, 0, 1], 0),
        ([1, -2, 1], 1),
        ([0, -1, 0, 1], 3),
        ([5], 0),
        ([2, 3], 1),
        ([-2, 0, 0, 0, 0, 1], 1),
        ([Fraction(1, 4), -1, 1], 1),
    ],
)
def test_exact_counts(coeffs, expected):
    assert count_real_roots_exact(coeffs) == expected


def test_sturm_chain_shape():
    chain = sturm_chain([-1, 0, 0, 1])
    assert [len(p) - 1 for p in chain] == [3, 2, 0]
    with pytest.raises(ValueError):
        sturm_chain([0, 0])


def numpy_real_roots(c):
    roots = np.roots(np.asarray(c, dtype=float)[::-1])
    real = np.sort(roots[np.abs(roots.imag) <= 1e-7 * np.maximum(1, np.abs(roots))].real)
    return len(real)


@given(st.lists(st.integers(-20, 20), min_size=2, max_size=9).filter(lambda c: c[-1] != 0))
def test_vectorized_matches_exact_on_integers(c):
    assert count_real_roots(np.array([c], dtype=float))[0] == count_real_roots_exact(c)


@pytest.mark.parametrize("d", [1, 2, 3, 5, 9, 15])
def test_vectorized_matches_oracles_on_random(d):
    rng = np.random.default_rng(d)
    c = rng.standard_normal((400, d + 1)) * np.sqrt([math.comb(d, a) for a in range(d + 1)])
    fast = count_real_roots(c)
    exact = np.array([count_real_roots_exact(row) for row in c])
    assert np.array_equal(fast, exact)
    if d <= 9:
        assert np.array_equal(fast, np.array([numpy_real_roots(row) for row in c]))


def test_near_double_roots_go_exact():
    # (t - 1)^2 (t + 2) and a tiny perturbation that splits the double root
    base = np.polynomial.polynomial.polyfromroots([1.0, 1.0, -2.0])
    rows = np.array([base, base + np.array([-1e-13, 0, 0, 0])])
    counts = count_real_roots(rows)
    assert counts[0] == count_real_roots_exact(rows[0]) == 2
    assert counts[1] == count_real_roots_exact(rows[1])


def test_leading_coefficient_must_be_nonzero():
    with pytest.raises(ValueError):
        count_real_roots(np.array([[1.0, 2.0, 0.0]]))


def test_projective_root_at_infinity_flagged():
    forms = np.array([[1.0, 0.0, -1.0], [1.0, 1.0, 1e-14], [0.0, 1.0, 0.0]])
    counts, degenerate = count_projective_roots(forms)
    assert degenerate.tolist() == [False, True, True]
    assert counts[0] == 2


def test_linear_forms_have_one_root():
    c = np.random.default_rng(0).standard_normal((1000, 2))
    counts, degenerate = count_projective_roots(c)
    assert np.all(counts[~degenerate] == 1)


def sympy_forms(coeffs, d, mons, x, y):
    return sum(sp.Rational(str(round(float(c), 6))) * x**ex * y**ey for c, (_, ex, ey) in zip(coeffs, mons))


def groebner_real_count(f, g, x, y):
    """Real common zeros via a lex Groebner basis (shape position is generic)."""
    basis = sp.groebner([f, g], x, y, order="lex")
    last = [p for p in basis.exprs if not p.has(x)]
    assert len(last) == 1
    uni = sp.Poly(last[0], y)
    assert len(basis.exprs) == 2 and sp.Poly(basis.exprs[0], x).degree() == 1
    return len(sp.real_roots(uni))


@pytest.mark.parametrize("df, dg", [(2, 2), (1, 3), (2, 3), (3, 3)])
def test_plane_counts_against_groebner(df, dg):
    rng = np.random.default_rng(100 * df + dg)
    x, y = sp.symbols("x y")
    mf, mg = monomials(3, df), monomials(3, dg)
    f = np.round(sample_form(kostlan(2, df), 3, rng, 12), 6)
    g = np.round(sample_form(kostlan(2, dg), 3, rng, 12), 6)
    counts, degenerate = count_common_zeros_p2(f, g, df, dg)
    assert not degenerate.any()
    for i in range(len(f)):
        expected = groebner_real_count(sympy_forms(f[i], df, mf, x, y), sympy_forms(g[i], dg, mg, x, y), x, y)
        assert counts[i] == expected


def test_resultant_against_sympy():
    rng = np.random.default_rng(3)
    x, y = sp.symbols("x y")
    df, dg = 2, 3
    mf, mg = monomials(3, df), monomials(3, dg)
    f = rng.integers(-4, 5, size=(3, len(mf))).astype(float)
    g = rng.integers(-4, 5, size=(3, len(mg))).astype(float)
    f[:, [i for i, a in enumerate(mf) if a[2] == df]] = 1.0
    g[:, [i for i, a in enumerate(mg) if a[2] == dg]] = 2.0
    res = resultant_coefficients(f, g, mf, mg, df, dg)
    for i in range(3):
        exact = sp.Poly(sp.resultant(sympy_forms(f[i], df, mf, x, y), sympy_forms(g[i], dg, mg, x, y), y), x)
        coeffs = [float(c) for c in reversed(exact.all_coeffs())]
        coeffs += [0.0] * (df * dg + 1 - len(coeffs))
        assert np.allclose(res[i], coeffs, rtol=1e-8, atol=1e-8 * max(map(abs, coeffs)))


def test_common_zeros_of_lines():
    # two random lines in P^2 always meet once
    rng = np.random.default_rng(4)
    f, g = rng.standard_normal((2, 500, 3))
    counts, degenerate = count_common_zeros_p2(f, g, 1, 1)
    assert np.all(counts[~degenerate] == 1)
