import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import fd_gradient, fd_hessian, random_safe_expression
from polekit import expr as ex
from polekit.errors import EvaluationError
from polekit.jets import Jet2, compose


def jet_of(e, x):
    return e.eval_jet(Jet2.seed_point(x))


def test_seed_semantics():
    x = (0.3, -1.2, 4.0, 0.5)
    for a in range(4):
        j = Jet2.seed(x, a)
        assert j.value == x[a]
        assert j.grad == tuple(1.0 if i == a else 0.0 for i in range(4))
        assert all(h == 0.0 for h in j.hess)


def test_square_of_coordinate():
    # (x1)^2 at x = (0, 3, 0, 0)
    j = jet_of(ex.Mul(ex.Var(1), ex.Var(1)), (0.0, 3.0, 0.0, 0.0))
    assert j.value == 9.0
    assert j.grad == (0.0, 6.0, 0.0, 0.0)
    assert j.hess_entry(1, 1) == 2.0
    assert sum(abs(h) for h in j.hess) == 2.0


def test_sin_at_zero():
    j = jet_of(ex.Fun("sin", ex.Var(0)), (0.0, 1.0, 2.0, 3.0))
    assert j.value == 0.0
    assert j.grad == (1.0, 0.0, 0.0, 0.0)
    assert j.hess_entry(0, 0) == 0.0


def test_exp_product_against_fd_oracle():
    # exp(x1 * x2) at (0, 1, 1, 0); oracle: Richardson central differences
    e = ex.Fun("exp", ex.Mul(ex.Var(1), ex.Var(2)))
    x = (0.0, 1.0, 1.0, 0.0)
    j = jet_of(e, x)
    assert j.value == pytest.approx(math.e, rel=1e-15)
    assert j.grad[1] == pytest.approx(math.e, rel=1e-12)
    assert j.grad[2] == pytest.approx(math.e, rel=1e-12)
    assert j.hess_entry(1, 2) == pytest.approx(2 * math.e, rel=1e-12)
    assert j.hess_entry(1, 1) == pytest.approx(math.e, rel=1e-12)
    assert j.hess_entry(2, 2) == pytest.approx(math.e, rel=1e-12)

    def f(p):
        return math.exp(p[1] * p[2])

    g = fd_gradient(f, x)
    H = fd_hessian(f, x)
    assert np.allclose(j.grad, g, rtol=1e-8, atol=1e-8)
    assert np.allclose(np.array(j.hessian_rows()), H, rtol=1e-6, atol=1e-6)


def test_plane_distance_jet():
    # sqrt(x1^2 + x2^2) at (0, 3, 4, 0)
    e = ex.Fun(
        "sqrt", ex.Add(ex.Mul(ex.Var(1), ex.Var(1)), ex.Mul(ex.Var(2), ex.Var(2)))
    )
    x = (0.0, 3.0, 4.0, 0.0)
    j = jet_of(e, x)
    assert j.value == pytest.approx(5.0, rel=1e-15)
    assert j.grad == pytest.approx((0.0, 0.6, 0.8, 0.0), rel=1e-14)

    def f(p):
        return math.sqrt(p[1] ** 2 + p[2] ** 2)

    assert np.allclose(j.grad, fd_gradient(f, x), atol=1e-8)
    assert np.allclose(np.array(j.hessian_rows()), fd_hessian(f, x), atol=1e-6)


def test_bump_peak_and_outside():
    # bump((x1 - c)/w) at the peak: value e^{-1}, critical point
    c, w = 0.7, 0.4
    e = ex.Fun("bump", ex.div(ex.sub(ex.Var(1), ex.const(c)), ex.const(w)))
    j = jet_of(e, (0.0, c, 0.0, 0.0))
    assert j.value == pytest.approx(math.exp(-1), rel=1e-15)
    assert all(abs(g) < 1e-15 for g in j.grad)
    outside = jet_of(e, (0.0, c + w, 0.0, 0.0))
    assert outside.value == 0.0
    assert all(g == 0.0 for g in outside.grad)
    assert all(h == 0.0 for h in outside.hess)


def test_bump_smooth_across_boundary():
    # jets match finite differences even close to |u| = 1
    def f(p):
        u = p[1]
        w = 1 - u * u
        return math.exp(-1.0 / w) if w > 0 else 0.0

    e = ex.Fun("bump", ex.Var(1))
    for u in (-0.999, -0.8, 0.0, 0.63, 0.97):
        x = (0.0, u, 0.0, 0.0)
        j = jet_of(e, x)
        assert np.allclose(j.grad, fd_gradient(f, x, h=1e-5), atol=1e-7)


def test_sstep_values_and_derivative_chain():
    e = ex.Fun("sstep", ex.Var(1))
    assert jet_of(e, (0.0, -0.2, 0.0, 0.0)).value == 0.0
    assert jet_of(e, (0.0, 1.3, 0.0, 0.0)).value == 1.0
    j = jet_of(e, (0.0, 0.5, 0.0, 0.0))
    assert j.value == pytest.approx(0.5, rel=1e-14)

    def f(p):
        v = p[1]
        if v <= 0:
            return 0.0
        if v >= 1:
            return 1.0
        return v ** 4 * (35 + v * (-84 + v * (70 - 20 * v)))

    for v in (0.12, 0.5, 0.93):
        x = (0.0, v, 0.0, 0.0)
        j = jet_of(e, x)
        assert np.allclose(j.grad, fd_gradient(f, x), atol=1e-8)
        assert np.allclose(np.array(j.hessian_rows()), fd_hessian(f, x),
                           atol=1e-5)
    # symbolic derivative chain matches the jet gradient
    d = e.diff(1)
    for v in (0.12, 0.5, 0.93, -0.5, 1.5):
        x = (0.0, v, 0.0, 0.0)
        assert d.eval_value(x) == pytest.approx(
            jet_of(e, x).grad[1], rel=1e-12, abs=1e-12
        )


def test_division_and_sqrt_domain_errors():
    with pytest.raises(EvaluationError) as err:
        jet_of(ex.Div(ex.Const(1.0), ex.Var(1)), (0.0, 0.0, 0.0, 0.0))
    assert err.value.op == "div"
    with pytest.raises(EvaluationError) as err:
        jet_of(ex.Fun("sqrt", ex.Var(1)), (0.0, -1.0, 0.0, 0.0))
    assert err.value.op == "sqrt"
    with pytest.raises(EvaluationError):
        jet_of(ex.Fun("sqrt", ex.Var(1)), (0.0, 0.0, 0.0, 0.0))
    with pytest.raises(EvaluationError) as err:
        jet_of(ex.Pow(ex.Var(1), 0.5), (0.0, -2.0, 0.0, 0.0))
    assert err.value.op == "pow"


def test_integer_power_of_negative_base_is_fine():
    j = jet_of(ex.Pow(ex.Var(1), 3.0), (0.0, -2.0, 0.0, 0.0))
    assert j.value == -8.0
    assert j.grad[1] == 12.0
    assert j.hess_entry(1, 1) == -12.0


def test_atan2_jet_against_fd():
    e = ex.Atan2(ex.Var(2), ex.Var(1))

    def f(p):
        return math.atan2(p[2], p[1])

    for x in ((0.0, 1.0, 0.4, 0.0), (0.0, -0.7, 1.1, 0.0), (0.0, 0.3, -2.0, 0.0)):
        j = jet_of(e, x)
        assert np.allclose(j.grad, fd_gradient(f, x), atol=1e-8)
        assert np.allclose(np.array(j.hessian_rows()), fd_hessian(f, x),
                           atol=1e-6)
    with pytest.raises(EvaluationError):
        jet_of(e, (0.0, 0.0, 0.0, 0.0))


def test_thousand_random_expressions_match_fd(rng):
    """Gradient and Hessian of random composed expressions agree with
    central differences (h = 1e-4 x coordinate scale) to 1e-6."""
    checked = 0
    while checked < 1000:
        e = random_safe_expression(rng)
        x = tuple(rng.uniform(-1.5, 1.5, 4))
        try:
            j = e.eval_jet(Jet2.seed_point(x))
        except EvaluationError:
            continue
        mags = [abs(j.value), *map(abs, j.grad), *map(abs, j.hess)]
        if not all(np.isfinite(mags)) or max(mags) > 1e6:
            continue

        def f(p, _e=e):
            return _e.eval_value(tuple(p))

        g = fd_gradient(f, x)
        H = fd_hessian(f, x)
        for a in range(4):
            assert abs(j.grad[a] - g[a]) <= 1e-6 * max(1.0, abs(j.grad[a]))
        jh = np.array(j.hessian_rows())
        assert np.max(np.abs(jh - H) / np.maximum(1.0, np.abs(jh))) <= 1e-6
        checked += 1


def test_exact_on_degree_two_polynomials(rng):
    """Jets reproduce hand-expanded coefficients of quadratics to
    rounding (<= 1e-13 relative)."""
    for _ in range(200):
        c0 = rng.uniform(-3, 3)
        lin = rng.uniform(-3, 3, 4)
        quad = rng.uniform(-3, 3, (4, 4))
        quad = 0.5 * (quad + quad.T)
        e = ex.const(c0)
        for a in range(4):
            e = ex.add(e, ex.mul(ex.const(lin[a]), ex.Var(a)))
            for b in range(a, 4):
                coeff = quad[a, b] if a == b else 2 * quad[a, b]
                e = ex.add(
                    e,
                    ex.mul(ex.const(coeff), ex.Mul(ex.Var(a), ex.Var(b))),
                )
        x = rng.uniform(-2, 2, 4)
        j = e.eval_jet(Jet2.seed_point(tuple(x)))
        value = c0 + lin @ x + x @ quad @ x
        grad = lin + 2 * quad @ x
        hess = 2 * quad
        scale = max(1.0, abs(value), np.max(np.abs(grad)), np.max(np.abs(hess)))
        assert abs(j.value - value) <= 1e-13 * scale
        assert np.max(np.abs(np.array(j.grad) - grad)) <= 1e-13 * scale
        assert np.max(np.abs(np.array(j.hessian_rows()) - hess)) <= 1e-13 * scale


@settings(max_examples=60, deadline=None)
@given(
    st.tuples(*[st.floats(-3, 3) for _ in range(4)]),
    st.tuples(*[st.floats(-2, 2) for _ in range(4)]),
)
def test_mul_commutes_and_hessian_symmetric(coeffs, point):
    a = ex.linear_combination(coeffs, 0.5)
    b = ex.Fun("sin", ex.Var(1))
    x = tuple(point)
    j1 = ex.Mul(a, b).eval_jet(Jet2.seed_point(x))
    j2 = ex.Mul(b, a).eval_jet(Jet2.seed_point(x))
    assert j1.value == j2.value
    assert j1.grad == j2.grad
    assert j1.hess == j2.hess
    rows = j1.hessian_rows()
    for i in range(4):
        for k in range(4):
            assert rows[i][k] == rows[k][i]


def test_compose_matches_substitution(rng):
    """Second-order jet composition equals evaluating the substituted
    tree (pullback correctness at the jet level)."""
    inner = [random_safe_expression(rng) for _ in range(4)]
    outer = random_safe_expression(rng)
    x = tuple(rng.uniform(-1, 1, 4))
    seeds = Jet2.seed_point(x)
    Y = tuple(e.eval_jet(seeds) for e in inner)
    yvals = tuple(j.value for j in Y)
    outer_jet = outer.eval_jet(Jet2.seed_point(yvals))
    composed = compose(outer_jet, Y)
    direct = outer.subs({i: inner[i] for i in range(4)}).eval_jet(seeds)
    assert composed.value == pytest.approx(direct.value, rel=1e-12, abs=1e-12)
    assert np.allclose(composed.grad, direct.grad, rtol=1e-10, atol=1e-10)
    assert np.allclose(composed.hess, direct.hess, rtol=1e-9, atol=1e-9)
