import math

import pytest

from oracles import fd_gradient_plain, random_safe_expression
from polekit import expr as ex
from polekit.errors import SceneError
from polekit.jets import Jet2


@pytest.mark.parametrize(
    "text,point,expected",
    [
        ("1 + 2*3", (0, 0, 0, 0), 7.0),
        ("2^3^1", (0, 0, 0, 0), 8.0),
        ("-x1^2", (0, 2, 0, 0), -4.0),
        ("(x0 + x1)*(x0 - x1)", (3, 2, 0, 0), 5.0),
        ("sin(pi/2)", (0, 0, 0, 0), 1.0),
        ("atan2(1, 0)", (0, 0, 0, 0), math.pi / 2),
        ("sqrt(x2)/2", (0, 0, 9, 0), 1.5),
        ("2e-1 * x3", (0, 0, 0, 10), 2.0),
    ],
)
def test_parse_and_eval(text, point, expected):
    e = ex.parse(text)
    assert e.eval_value(tuple(float(p) for p in point)) == pytest.approx(
        expected, rel=1e-14
    )


def test_tau_variables():
    e = ex.parse("tau^2 - 1", ex.TAU_VARS)
    assert e.eval_value((3.0, 0.0, 0.0, 0.0)) == 8.0
    with pytest.raises(SceneError):
        ex.parse("x1", ex.TAU_VARS)


@pytest.mark.parametrize(
    "bad,fragment",
    [
        ("x1 +", "unexpected"),
        ("foo(x1)", "unknown name"),
        ("x1 ^ x2", "constant"),
        ("(x1", "expected"),
        ("x1 @ 2", "unexpected character"),
    ],
)
def test_parse_errors_carry_position(bad, fragment):
    with pytest.raises(SceneError) as err:
        ex.parse(bad)
    assert "column" in err.value.problems[0]
    assert fragment in err.value.problems[0]


def test_serialize_round_trip(rng):
    for _ in range(60):
        e = random_safe_expression(rng)
        text = e.to_str()
        again = ex.parse(text)
        # structural equality after one round trip
        assert ex.parse(again.to_str()) == again
        x = tuple(rng.uniform(-1, 1, 4))
        assert again.eval_value(x) == pytest.approx(
            e.eval_value(x), rel=1e-12, abs=1e-12
        )


def test_precedence_round_trip_examples():
    for text in [
        "x0 - (x1 - x2)",
        "x0 - x1 - x2",
        "(x0 + x1)*x2",
        "x0/(x1*x2)",
        "-(x0 + x1)",
        "(x0 + 1)^2",
        "2*x1^2 - x2/4 + sin(x0)*cos(x3)",
    ]:
        e = ex.parse(text)
        assert ex.parse(e.to_str()) == e


def test_symbolic_diff_matches_jet_gradient(rng):
    for _ in range(40):
        e = random_safe_expression(rng)
        x = tuple(rng.uniform(-1, 1, 4))
        try:
            j = e.eval_jet(Jet2.seed_point(x))
        except Exception:
            continue
        for a in range(4):
            d = e.diff(a)
            assert d.eval_value(x) == pytest.approx(
                j.grad[a], rel=1e-10, abs=1e-10
            )


def test_diff_of_atan2():
    e = ex.Atan2(ex.Var(2), ex.Var(1))
    x = (0.0, 0.8, -1.3, 0.0)
    j = e.eval_jet(Jet2.seed_point(x))
    for a in (1, 2):
        assert e.diff(a).eval_value(x) == pytest.approx(j.grad[a], rel=1e-12)


def test_bump_has_no_symbolic_derivative():
    e = ex.Fun("bump", ex.Var(1))
    with pytest.raises(Exception):
        e.diff(1)


def test_substitution_composes():
    outer = ex.parse("x1^2 + x2")
    inner = {1: ex.parse("x0 + 1"), 2: ex.parse("3*x3")}
    composed = outer.subs(inner)
    assert composed.eval_value((2.0, 0.0, 0.0, 5.0)) == 9.0 + 15.0


def test_value_and_jet_paths_agree(rng):
    for _ in range(40):
        e = random_safe_expression(rng)
        x = tuple(rng.uniform(-1, 1, 4))
        assert e.eval_value(x) == pytest.approx(
            e.eval_jet(Jet2.seed_point(x)).value, rel=1e-13, abs=1e-13
        )


def test_fd_on_symbolic_derivative(rng):
    # the derivative tree itself differentiates correctly (needed for
    # pullbacks, which jet-evaluate symbolic Jacobians)
    e = ex.parse("x1*sin(x2) + sqrt(2 + x1^2)")
    d = e.diff(1)
    x = (0.0, 0.7, 1.2, 0.0)

    def f(p):
        return e.eval_value(tuple(p))

    assert d.eval_value(x) == pytest.approx(
        fd_gradient_plain(f, x)[1], abs=1e-7
    )
