import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from colombeau import gfunc as gf
from colombeau import net as nt
from colombeau.gfunc import CompactBox, from_exprs

I = [CompactBox([0.0], [1.0])]
SQ = [CompactBox([-1.0, -1.0], [1.0, 1.0], 9)]


def test_sup_seminorm_examples():
    s = gf.sup_seminorm(from_exprs(["x"], ["x"]), I[0])
    assert_allclose(s.sample(nt.DEFAULT_GRID), 1.0)
    s = gf.sup_seminorm(from_exprs(["0"], ["x"]), I[0])
    assert np.all(s.sample(nt.DEFAULT_GRID) == 0)


def test_derivative_seminorm_of_oscillation():
    u = from_exprs(["sin(x/eps)/eps"], ["x"])
    K = CompactBox([0.0], [1.0], zoom=[[0.0]], zoom_radius=4.0, zoom_resolution=33)
    v = nt.classify_order(gf.sup_seminorm(u, K, 1))
    assert v.cls == nt.MODERATE and v.p == 2


def test_is_negligible_on_examples():
    assert gf.is_negligible_on(from_exprs(["exp(-1/eps)*sin(x)"], ["x"]), I)[0]
    assert not gf.is_negligible_on(from_exprs(["eps*x"], ["x"]), I)[0]
    u = from_exprs(["x^2 + eps"], ["x"])
    assert gf.equals_in_G(u, from_exprs(["x^2 + eps"], ["x"]), I)[0]


def test_c_bounded_witness():
    w = gf.c_bounded_witness(from_exprs(["sin(x)"], ["x"]), CompactBox([0.0], [10.0], 201))
    assert w.lo[0] <= -0.99 and w.hi[0] >= 0.99
    assert gf.c_bounded_witness(from_exprs(["x/eps"], ["x"]), CompactBox([1.0], [2.0])) is None


def test_compose_examples():
    u = from_exprs(["x + eps"], ["x"])
    assert gf.equals_in_G(gf.compose(gf.identity(u.domain), u, I), u, I)[0]
    vu = gf.compose(from_exprs(["y^2"], ["y"]), u, I)
    assert gf.equals_in_G(vu, from_exprs(["(x+eps)^2"], ["x"]), I)[0]
    with pytest.raises(gf.CBoundednessError):
        gf.compose(from_exprs(["y"], ["y"]), from_exprs(["x/eps"], ["x"]), I)


def test_compose_respects_equality():
    v = from_exprs(["sin(3*y) + y^3"], ["y"])
    u = from_exprs(["x*cos(x) + eps"], ["x"])
    u2 = from_exprs(["x*cos(x) + eps + exp(-1/eps)"], ["x"])
    assert gf.equals_in_G(u, u2, I)[0]
    assert gf.equals_in_G(gf.compose(v, u, I), gf.compose(v, u2, I), I)[0]


def test_value_at_examples():
    four = gf.value_at(from_exprs(["x^2"], ["x"]), nt.GPoint.constant([2.0]))[0]
    assert_allclose(four.sample(nt.DEFAULT_GRID), 4.0)
    J = nt.AlternatingHarmonicSet()
    F = gf.PiecewiseGFunc(J, from_exprs(["x"], ["x"]), from_exprs(["x - 1"], ["x"]))
    xt = nt.GPoint([nt.ScalarNet.piecewise(J, nt.ScalarNet.constant(0.0), nt.ScalarNet.constant(1.0))], [-1], [2])
    vals = gf.value_at(F, xt)[0]
    assert np.all(vals.sample(nt.DEFAULT_GRID) == 0.0)
    x, y = nt.GPoint([nt.as_net("0.3")], [-1], [1]), nt.GPoint([nt.as_net("0.3 + exp(-1/eps)")], [-1], [1])
    ux = gf.value_at(from_exprs(["x"], ["x"]), x)[0]
    uy = gf.value_at(from_exprs(["x"], ["x"]), y)[0]
    assert nt.classify_order(ux - uy).negligible


def test_value_at_commutes_with_products():
    u, w = from_exprs(["sin(x) + eps"], ["x"]), from_exprs(["x^2/(1+eps)"], ["x"])
    x = nt.GPoint([nt.as_net("0.5 + eps")], [0], [2])
    lhs = gf.value_at(gf.product(u, w), x)[0]
    rhs = gf.value_at(u, x)[0] * gf.value_at(w, x)[0]
    assert nt.classify_order(lhs - rhs).negligible


FAMILY = [
    from_exprs(["x^2"], ["x"]),
    from_exprs(["x^2 + exp(-1/eps)"], ["x"]),
    from_exprs(["x^2 + eps^9*cos(x)"], ["x"]),
    from_exprs(["x^2 + eps"], ["x"]),
    from_exprs(["sin(x/eps)"], ["x"]),
]


def test_equals_in_G_is_an_equivalence_relation():
    n = len(FAMILY)
    R = np.array([[gf.equals_in_G(FAMILY[i], FAMILY[j], I)[0] for j in range(n)] for i in range(n)])
    assert np.all(np.diag(R)) and np.array_equal(R, R.T)
    assert R[0, 1] and R[0, 2] and R[1, 2] and not R[0, 3] and not R[0, 4]


@given(st.floats(-2, 0), st.floats(0.05, 2), st.floats(0.05, 2))
def test_sup_seminorm_is_monotone_in_the_box(lo, w1, w2):
    u = from_exprs(["exp(x)*sin(3*x/eps)"], ["x"])
    small = CompactBox([lo], [lo + w1], 17)
    big = CompactBox([lo], [lo + w1 + w2], 17)
    # the small lattice must be a subset of the big one for the lattice sup to be monotone
    big = CompactBox(big.lo, big.hi, 17)
    eps = nt.DEFAULT_GRID.values[:6]
    s_small = np.array([np.max(np.abs(u(e, small.lattice()))) for e in eps])
    s_big = np.array([np.max(np.abs(u(e, np.concatenate([big.lattice(), small.lattice()])))) for e in eps])
    assert np.all(s_small <= s_big + 1e-15)


def test_fd_partial_matches_symbolic():
    u = from_exprs(["sin(x)*y^2 + eps*x*y"], ["x", "y"])
    X = SQ[0].lattice()
    h = 1e-3
    for alpha in [(1, 0), (0, 1), (1, 1), (2, 0)]:
        num = gf.fd_partial(lambda P: u(0.5, P), X, alpha, h)
        sym = u.partial(0.5, X, alpha)
        assert_allclose(num, sym, atol=1e-7)


def test_domain_and_box_validation():
    with pytest.raises(gf.GFuncError):
        gf.Domain([1.0], [0.0])
    with pytest.raises(gf.GFuncError):
        CompactBox([0.0], [np.inf])
    D = gf.Domain([0.0], [1.0])
    assert D.contains_closed([0.1], [0.9]) and not D.contains_closed([0.0], [0.5])
