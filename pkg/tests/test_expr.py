import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from colombeau import expr as ex


def test_parse_builds_tree_with_expected_nodes():
    e = ex.parse("x*y + eps^-1", ["x", "y"])
    assert isinstance(e, ex.Binary) and e.op == "+"
    assert isinstance(e.left, ex.Binary) and e.left.op == "*"
    assert isinstance(e.right, ex.Binary) and e.right.op == "^"


def test_unknown_symbol_is_reported_with_position():
    with pytest.raises(ex.UnknownSymbolError) as info:
        ex.parse("sin(q)", ["x"])
    assert "q" in str(info.value)


@pytest.mark.parametrize("text", ["", "x +", "(x", "x y", "sin(x, x)", "x $ 2", "bumpd(1.5, x)"])
def test_malformed_input_is_rejected(text):
    with pytest.raises(ex.ExprError):
        ex.parse(text, ["x"])


def test_power_is_right_associative():
    assert ex.evaluate(ex.parse("2^3^2"), 0.5) == 2.0 ** 9
    assert ex.evaluate(ex.parse("-2^2"), 0.5) == -4.0
    assert ex.evaluate(ex.parse("2**-1"), 0.5) == 0.5


def test_gaussian_mollifier_values():
    e = ex.parse("eps^-2 * exp(-(x^2+y^2)/eps^2)", ["x", "y"])
    assert ex.evaluate(e, 0.1, [0.0, 0.0], ["x", "y"]) == pytest.approx(100.0)
    assert ex.evaluate(e, 0.5, [0.5, 0.0], ["x", "y"]) == pytest.approx(4 * math.exp(-1))


def test_constants_and_eps():
    assert ex.evaluate(ex.parse("3"), 0.7) == 3.0
    assert ex.evaluate(ex.parse("eps^-1"), 0.25) == 4.0
    assert ex.evaluate(ex.parse("pi"), 0.5) == math.pi


def test_profiles():
    assert ex.evaluate(ex.parse("bump(x)", ["x"]), 0.5, [0.0], ["x"]) == pytest.approx(math.exp(-1))
    assert ex.evaluate(ex.parse("bump(x)", ["x"]), 0.5, [1.0], ["x"]) == 0.0
    assert ex.evaluate(ex.parse("gauss(x, y)", ["x", "y"]), 0.5, [1.0, 1.0], ["x", "y"]) == pytest.approx(math.exp(-2))


def test_simple_derivatives():
    names = ["x", "y"]
    d = ex.differentiate(ex.parse("x*y", names), "x")
    assert ex.to_text(d) == "y"
    d = ex.differentiate(ex.parse("sin(x^2)", names), "x")
    for x in (-1.3, 0.2, 2.0):
        assert ex.evaluate(d, 0.5, [x, 0.0], names) == pytest.approx(2 * x * math.cos(x * x))


def test_round_trip_through_text():
    names = ["x", "y"]
    e = ex.parse("-(x - y)^2 / (1 + eps*abs(y)) + atan2(y, x) - gauss(x/eps)", names)
    again = ex.parse(ex.to_text(e), names)
    X = np.array([[0.3, -0.7], [1.1, 0.4]])
    assert_allclose(ex.eval_points(again, 0.25, X, names), ex.eval_points(e, 0.25, X, names), rtol=1e-14)


def test_domain_errors():
    with pytest.raises(ex.ExprDomainError):
        ex.evaluate(ex.parse("1/x", ["x"]), 0.5, [0.0], ["x"])
    with pytest.raises(ex.ExprDomainError):
        ex.evaluate(ex.parse("log(x)", ["x"]), 0.5, [-1.0], ["x"])


def test_substitute_and_free_symbols():
    e = ex.parse("x*y + eps", ["x", "y"])
    assert ex.free_symbols(e) == {"x", "y", "eps"}
    f = ex.substitute(e, {"y": ex.parse("2*x", ["x"])})
    assert ex.free_symbols(f) == {"x", "eps"}
    assert ex.evaluate(f, 0.5, [3.0], ["x"]) == pytest.approx(18.5)


def test_eval_magnitude_tracks_cancellation():
    e = ex.parse("x - y", ["x", "y"])
    v, m = ex.eval_magnitude(e, {"x": np.array(1e8), "y": np.array(1e8), "eps": 0.5})
    assert float(v) == 0.0
    assert float(m) == pytest.approx(2e8)


# random expressions for the properties below

_LEAVES = st.sampled_from(["x", "y", "eps", "1.5", "2", "0.3"])


def _combine(children):
    binary = st.tuples(children, st.sampled_from(["+", "-", "*"]), children).map(lambda t: f"({t[0]} {t[1]} {t[2]})")
    unary = st.tuples(st.sampled_from(["sin", "cos", "exp", "atan", "tanh"]), children).map(lambda t: f"{t[0]}({t[1]})")
    power = children.map(lambda c: f"({c})^2")
    return st.one_of(binary, unary, power)


EXPRS = st.recursive(_LEAVES, _combine, max_leaves=6)
NAMES = ["x", "y"]


def _bounded(e, pts):
    vals = ex.eval_points(e, 0.5, pts, NAMES)
    return np.all(np.isfinite(vals)) and np.max(np.abs(vals)) < 1e6


@given(EXPRS, st.integers(0, 2**31 - 1))
def test_derivative_matches_central_differences(text, seed):
    e = ex.parse(text, NAMES)
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1, 1, size=(20, 2))
    if not _bounded(e, pts):
        return
    h = 1e-5
    for k, v in enumerate(NAMES):
        d = ex.eval_points(ex.differentiate(e, v), 0.5, pts, NAMES)
        step = np.zeros(2)
        step[k] = h
        fd = (ex.eval_points(e, 0.5, pts + step, NAMES) - ex.eval_points(e, 0.5, pts - step, NAMES)) / (2 * h)
        assert_allclose(d, fd, rtol=1e-6, atol=1e-6 * (1 + np.max(np.abs(fd))))


@given(EXPRS, st.integers(0, 2**31 - 1))
def test_mixed_partials_commute(text, seed):
    e = ex.parse(text, NAMES)
    pts = np.random.default_rng(seed).uniform(-1, 1, size=(10, 2))
    dxy = ex.eval_points(ex.differentiate(ex.differentiate(e, "x"), "y"), 0.5, pts, NAMES)
    dyx = ex.eval_points(ex.differentiate(ex.differentiate(e, "y"), "x"), 0.5, pts, NAMES)
    assert_allclose(dxy, dyx, rtol=1e-9, atol=1e-9 * (1 + np.max(np.abs(dxy))))


@given(EXPRS, EXPRS, st.floats(-3, 3), st.floats(-3, 3))
def test_differentiation_is_linear(t1, t2, a, b):
    e1, e2 = ex.parse(t1, NAMES), ex.parse(t2, NAMES)
    combo = ex.add(ex.mul(ex.Const(a), e1), ex.mul(ex.Const(b), e2))
    pts = np.random.default_rng(0).uniform(-1, 1, size=(8, 2))
    lhs = ex.eval_points(ex.differentiate(combo, "x"), 0.5, pts, NAMES)
    rhs = a * ex.eval_points(ex.differentiate(e1, "x"), 0.5, pts, NAMES) + b * ex.eval_points(
        ex.differentiate(e2, "x"), 0.5, pts, NAMES)
    assert_allclose(lhs, rhs, rtol=1e-10, atol=1e-10 * (1 + np.max(np.abs(rhs))))


@given(EXPRS)
def test_parser_accepts_its_own_output(text):
    e = ex.parse(text, NAMES)
    assert ex.parse(ex.to_text(e), NAMES) is not None


def test_profile_derivatives_match_differences():
    for text in ["bump(x, y)", "gauss(2*x, y)"]:
        e = ex.parse(text, NAMES)
        pts = np.array([[0.1, 0.2], [-0.3, 0.4], [0.5, -0.5]])
        h = 1e-6
        d = ex.eval_points(ex.differentiate(e, "x"), 0.5, pts, NAMES)
        fd = (ex.eval_points(e, 0.5, pts + [h, 0], NAMES) - ex.eval_points(e, 0.5, pts - [h, 0], NAMES)) / (2 * h)
        assert_allclose(d, fd, rtol=1e-6, atol=1e-9)
