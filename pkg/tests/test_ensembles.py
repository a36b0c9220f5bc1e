import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from curvlab.ensembles import (
    JetCovariance,
    PolynomialEnsemble,
    coefficient_covariance,
    jet_covariance,
    kostlan,
    mixture,
    monomials,
    parse_ensemble,
    quadric_matrix,
    quadric_with_delta,
    sample_binary_form,
    sample_form,
    sample_jet,
)
from curvlab.stats import batch_mean
from curvlab.symmetric import parameter_estimate

N = 100_000


def within(mean, se, target, k=3.0):
    return abs(mean - target) <= k * se


weights = st.integers(1, 6).flatmap(
    lambda d: st.tuples(st.just(d), st.lists(st.floats(0.0, 5.0), min_size=d // 2 + 1, max_size=d // 2 + 1))
).filter(lambda t: sum(t[1]) > 0.01)


def evaluate(mons, x):
    """Monomial values at points x (..., nvars)."""
    values = np.stack([np.prod(x ** np.array(a), axis=-1) for a in mons], axis=-1)
    return values


@pytest.mark.parametrize("n, d", [(2, 3), (4, 1), (3, 2), (1, 9)])
def test_kostlan_parameter(n, d):
    e = kostlan(n, d)
    assert e.delta == d
    assert e.is_kostlan


@pytest.mark.parametrize("betas, delta", [([1, 0], 2.0), ([1, 1], 1.0), ([1, 3], 0.5), ([0, 1], 0.0)])
def test_mixture_parameter(betas, delta):
    assert mixture(3, 2, betas).delta == pytest.approx(delta)


@given(weights)
def test_mixture_normalized_and_in_range(t):
    d, betas = t
    e = mixture(2, d, betas)
    assert sum(e.betas) == pytest.approx(1.0)
    assert d % 2 <= e.delta + 1e-12 and e.delta <= d + 1e-12


def test_mixture_validation():
    with pytest.raises(ValueError):
        mixture(2, 2, [0, 0])
    with pytest.raises(ValueError):
        mixture(2, 2, [1])
    with pytest.raises(ValueError):
        mixture(2, 2, [1, -1])
    with pytest.raises(ValueError):
        PolynomialEnsemble(0, 2, (1.0, 0.0))
    with pytest.raises(ValueError):
        quadric_with_delta(3, 2.5)


def test_scale_invariance_of_weights():
    assert mixture(3, 4, [1, 2, 3]) == mixture(3, 4, [10, 20, 30])


def test_jet_covariance_kostlan():
    for d in range(1, 7):
        jc = jet_covariance(kostlan(3, d))
        assert jc.offdiag_hess_var == d * (d - 1)
        assert jc.value_hess_diag_cov == 0
        assert jc.var_value == 1
        assert jc.delta == d


def test_jet_covariance_pure_norm_term():
    jc = jet_covariance(mixture(3, 2, [0, 1]))
    assert jc.var_grad == 0
    assert jc.delta == 0


@given(weights)
def test_diagonal_variance_identity(t):
    d, betas = t
    jc = jet_covariance(mixture(3, d, betas))
    assert jc.diag_hess_var - jc.diag_hess_cov - 2 * jc.offdiag_hess_var == pytest.approx(0.0, abs=1e-12)


@given(weights)
def test_conditioned_part_parameter(t):
    # delta(W~) = r^2 - s_off^2 = delta (1 - delta)
    d, betas = t
    e = mixture(3, d, betas)
    r, s_off = e.jets.conditioned_scales()
    assert r * r - s_off * s_off == pytest.approx(e.delta * (1 - e.delta), abs=1e-9)


def test_infeasible_jet_moments():
    bad = JetCovariance(1.0, 1.0, 0.0, 0.0, 0.0, 2.0, 2)
    with pytest.raises(ValueError):
        bad.conditioned_scales()


def jet_moments_by_differentiation(e, h=1e-3):
    """Moments of (u, a_11, a_22, a_12) from finite differences of r(x, y) at q."""
    n = e.n
    q = np.zeros(n + 1)
    q[0] = 1.0

    def r(x, y):
        return float(e.covariance(np.asarray(x), np.asarray(y)))

    def unit(i):
        v = np.zeros(n + 1)
        v[i] = 1.0
        return v

    e1, e2 = unit(1), unit(2)

    def d2(a, b, x, y, first):
        # mixed second derivative in directions a, b of the first (or second) argument
        if first:
            f = lambda s, t: r(x + s * a + t * b, y)  # noqa: E731
        else:
            f = lambda s, t: r(x, y + s * a + t * b)  # noqa: E731
        return (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4 * h * h)

    grad = (r(q + h * e1, q + h * e1) - r(q + h * e1, q - h * e1) - r(q - h * e1, q + h * e1) + r(q - h * e1, q - h * e1)) / (4 * h * h)
    u_a11 = d2(e1, e1, q, q, True)

    def four(a, b, c, dd):
        g = lambda s, t, p, w: r(q + s * a + t * b, q + p * c + w * dd)  # noqa: E731
        total = 0.0
        for s in (1, -1):
            for t in (1, -1):
                for p in (1, -1):
                    for w in (1, -1):
                        total += s * t * p * w * g(s * h, t * h, p * h, w * h)
        return total / (16 * h**4)

    return {
        "var_grad": grad,
        "value_hess_diag_cov": u_a11,
        "diag_hess_cov": four(e1, e1, e2, e2),
        "offdiag_hess_var": four(e1, e2, e1, e2),
        "diag_hess_var": four(e1, e1, e1, e1),
    }


@pytest.mark.parametrize("d, betas", [(2, [1, 0]), (2, [1, 3]), (3, [2, 1]), (4, [1, 2, 3]), (5, [0, 1, 1])])
def test_jet_covariance_against_covariance_derivatives(d, betas):
    e = mixture(3, d, betas)
    jc = jet_covariance(e)
    fd = jet_moments_by_differentiation(e)
    for key, value in fd.items():
        assert getattr(jc, key) == pytest.approx(value, rel=1e-4, abs=1e-4), key


@pytest.mark.parametrize("d", [2, 3])
def test_conditioned_kostlan_jet_parameter(d):
    jet = sample_jet(kostlan(3, d), np.random.default_rng(d), N, conditioned=True)
    assert np.all(jet.value == 0)
    mean, se = parameter_estimate(jet.hessian)
    assert within(mean, se, d * (1 - d))


@pytest.mark.parametrize("e", [kostlan(3, 2), kostlan(4, 3), mixture(3, 2, [1, 3]), mixture(3, 4, [1, 1, 1])])
def test_trace_identity_and_parameter(e):
    jet = sample_jet(e, np.random.default_rng(12), N)
    n = e.n
    mean, se = batch_mean(jet.value * np.trace(jet.hessian, axis1=1, axis2=2))
    assert within(mean, se, -n * e.delta)
    mean, se = parameter_estimate(jet.hessian)
    assert within(mean, se, e.delta)


def test_linear_forms_have_scalar_hessian():
    jet = sample_jet(kostlan(3, 1), np.random.default_rng(13), 1000)
    assert np.array_equal(jet.hessian, -jet.value[:, None, None] * np.eye(3))


def test_jet_gradient_independence():
    jet = sample_jet(mixture(3, 3, [1, 2]), np.random.default_rng(14), N)
    g = jet.gradient
    for other in (jet.value, jet.hessian[:, 0, 0], jet.hessian[:, 0, 1], jet.hessian[:, 2, 2]):
        for i in range(3):
            mean, se = batch_mean(g[:, i] * other)
            assert within(mean, se, 0.0)


def test_degenerate_mixture_has_zero_gradient():
    jet = sample_jet(mixture(3, 4, [0, 0, 1]), np.random.default_rng(15), 100)
    assert np.all(jet.gradient == 0)


def test_jet_dimension_override():
    jet = sample_jet(kostlan(6, 2), np.random.default_rng(0), 5, dim=4)
    assert jet.gradient.shape == (5, 4)
    with pytest.raises(ValueError):
        sample_jet(kostlan(1, 2), np.random.default_rng(0), 5)


def test_monomial_order():
    assert monomials(2, 3) == ((3, 0), (2, 1), (1, 2), (0, 3))
    assert len(monomials(3, 3)) == 10
    assert monomials(3, 2)[0] == (2, 0, 0)


@pytest.mark.parametrize("nvars, d, betas", [(2, 4, (0.2, 0.5, 0.3)), (3, 2, (0.25, 0.75)), (3, 3, (0.6, 0.4)), (2, 5, (1.0, 0.0, 0.0))])
def test_coefficient_covariance_reproduces_covariance_function(nvars, d, betas):
    e = PolynomialEnsemble(nvars - 1, d, betas)
    cov = coefficient_covariance(nvars, d, e.betas)
    mons = monomials(nvars, d)
    rng = np.random.default_rng(16)
    x, y = rng.standard_normal((2, 20, nvars))
    mx, my = evaluate(mons, x), evaluate(mons, y)
    lhs = np.einsum("ki,ij,kj->k", mx, cov, my)
    assert np.allclose(lhs, e.covariance(x, y), rtol=1e-10)


def test_kostlan_coefficient_variances():
    c = sample_binary_form(kostlan(1, 2), np.random.default_rng(17), N)
    mean, se = batch_mean(c[:, 1] ** 2)
    assert within(mean, se, 2.0)


@pytest.mark.parametrize("e", [kostlan(1, 5), mixture(1, 4, [1, 2, 1]), mixture(1, 3, [1, 3])])
def test_binary_restriction_keeps_parameter(e):
    c = sample_binary_form(e, np.random.default_rng(18), N)
    # at q = (1, 0): f(q) = c_0 and the derivative along x1 is c_1
    mean, se = batch_mean(c[:, 0] ** 2)
    assert within(mean, se, 1.0)
    mean, se = batch_mean(c[:, 1] ** 2)
    assert within(mean, se, e.delta)


def test_form_sampling_matches_covariance_function():
    e = mixture(2, 3, [1, 2])
    rng = np.random.default_rng(19)
    c = sample_form(e, 3, rng, N)
    mons = monomials(3, 3)
    x = np.array([0.3, -1.0, 0.5])
    y = np.array([1.0, 0.2, 0.0])
    fx = c @ evaluate(mons, x)
    fy = c @ evaluate(mons, y)
    mean, se = batch_mean(fx * fy)
    assert within(mean, se, float(e.covariance(x, y)))


def test_binary_degree_cap():
    with pytest.raises(ValueError):
        sample_binary_form(kostlan(1, 31), np.random.default_rng(0), 1)
    with pytest.raises(ValueError):
        sample_form(kostlan(1, 2), 3, np.random.default_rng(0), 1)


def test_quadric_matrix_law():
    rng = np.random.default_rng(20)
    q = quadric_matrix(kostlan(3, 2), rng, N)
    mean, se = batch_mean(q[:, 0, 1] ** 2)
    assert within(mean, se, 0.5)
    mean, se = batch_mean(q[:, 0, 0] ** 2)
    assert within(mean, se, 1.0)
    e = mixture(3, 2, [1, 1])
    q = quadric_matrix(e, rng, N)
    x = np.array([1.0, 0.5, -0.2, 0.3])
    y = np.array([0.1, 1.0, 0.4, 0.0])
    fx = np.einsum("i,kij,j->k", x, q, x)
    fy = np.einsum("i,kij,j->k", y, q, y)
    mean, se = batch_mean(fx * fy)
    assert within(mean, se, float(e.covariance(x, y)))
    # jet moments at q = e_0 of f(x) = x^T Q x: u = Q_00, gradient 2 Q_0i
    mean, se = batch_mean((2 * q[:, 0, 1]) ** 2)
    assert within(mean, se, e.delta)


def test_pure_norm_quadric_is_definite():
    q = quadric_matrix(mixture(3, 2, [0, 1]), np.random.default_rng(21), 200)
    ev = np.linalg.eigvalsh(q)
    assert np.all((ev > 0).all(axis=1) | (ev < 0).all(axis=1))
    with pytest.raises(ValueError):
        quadric_matrix(kostlan(3, 3), np.random.default_rng(0), 1)


def test_parse_ensemble():
    assert parse_ensemble("kostlan", 3, 4) == kostlan(3, 4)
    assert parse_ensemble(5, 2) == kostlan(2, 5)
    assert parse_ensemble({"d": 2, "betas": [1, 3]}, 3).delta == pytest.approx(0.5)
    assert parse_ensemble({"d": 2, "delta": 1.5}, 3).delta == pytest.approx(1.5)
    assert parse_ensemble({"d": 3, "kostlan": True}, 3) == kostlan(3, 3)
    for bad in ("gauss", {"betas": [1]}, [1, 2], {"d": 3, "delta": 1.0}):
        with pytest.raises(ValueError):
            parse_ensemble(bad, 3)
    with pytest.raises(ValueError):
        parse_ensemble("kostlan", 3)


def test_restrict_keeps_weights():
    e = mixture(5, 4, [1, 2, 3])
    assert e.restrict(2).betas == e.betas
    assert e.restrict(2).delta == e.delta
    with pytest.raises(ValueError):
        e.restrict(6)
    assert math.isclose(e.delta, sum(b * (4 - 2 * k) for k, b in enumerate(e.betas)))
