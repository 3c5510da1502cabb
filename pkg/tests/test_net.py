import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from colombeau import net as nt
from colombeau.net import ScalarNet, as_net

J = nt.AlternatingHarmonicSet()


def test_grid_values_and_parse():
    g = nt.EpsilonGrid.parse("1:20")
    assert len(g) == 20
    assert g.values[0] == 0.5 and g.values[-1] == 2.0 ** -20
    assert nt.EpsilonGrid.parse("3:10:0.25").values[0] == 0.25 ** 3
    with pytest.raises(nt.NetError):
        nt.EpsilonGrid.parse("5")
    with pytest.raises(nt.NetError):
        nt.EpsilonGrid(q=1.5)


def test_power_law_classification():
    v = nt.classify_order(as_net("eps^-3"))
    assert v.cls == nt.MODERATE and v.p == 3
    assert abs(v.slope + 3) <= 0.01


def test_zero_net_is_negligible():
    assert nt.classify_order(ScalarNet.constant(0.0)).negligible


def test_exponential_nets():
    # tail slopes of log exp(-1/eps) against log eps: d(1/eps)/d(log 1/eps) = 1/eps >> 5
    eps = nt.DEFAULT_GRID.tail()
    slopes = np.diff(-1 / eps) / np.diff(np.log(eps))
    assert np.all(slopes > 5)
    assert nt.classify_order(as_net("exp(-1/eps)")).negligible
    assert nt.classify_order(as_net("exp(1/eps)")).cls == nt.NOT_MODERATE


def test_ring_operations():
    ab = nt.gn_mul(as_net("eps"), as_net("eps^2"))
    assert_allclose(ab.sample(nt.DEFAULT_GRID), nt.DEFAULT_GRID.values ** 3)
    inv = nt.gn_invert(as_net("eps"))
    v = nt.classify_order(inv)
    assert v.cls == nt.MODERATE and v.p == 1


def test_invert_rejects_net_vanishing_on_J():
    a = ScalarNet.piecewise(J, ScalarNet.constant(0.0), ScalarNet.constant(1.0))
    assert not nt.is_strictly_nonzero(a)
    with pytest.raises(nt.NotStrictlyNonzeroError):
        nt.gn_invert(a)


def test_alternating_harmonic_membership():
    assert J.contains(0.45) and not J.contains(0.55)
    assert J.contains(0.25) and not J.contains(1 / 3.5)
    # 2^-k has floor(2^k) even, so every dyadic grid point lies in J
    assert all(J.contains(e) for e in nt.DEFAULT_GRID.values[1:])


def test_interval_union():
    s = nt.IntervalUnion(((0.25, 0.5),))
    assert s.contains(0.5) and not s.contains(0.25) and s.contains(0.3)


def test_near_standard_examples():
    lim = nt.near_standard(nt.GPoint.constant([1.0, 2.0]))
    assert_allclose(lim, [1.0, 2.0])
    x = nt.GPoint([as_net("eps")], [-1], [1])
    assert_allclose(nt.near_standard(x), [0.0], atol=1e-12)
    xt = nt.GPoint([ScalarNet.piecewise(J, ScalarNet.constant(0.0), ScalarNet.constant(1.0))], [-1], [2])
    assert nt.near_standard(xt) is None


def test_points_equivalent_examples():
    x = nt.GPoint.constant([0.0])
    assert nt.points_equivalent(x, x)
    assert nt.points_equivalent(x, nt.GPoint([as_net("exp(-1/eps)")], [-1], [1]))
    assert not nt.points_equivalent(x, nt.GPoint([as_net("eps^3")], [-1], [1]))


@given(st.floats(-5, 5), st.sampled_from([-2.0, -1.0, 0.0, 1.5, 3.0]))
def test_slope_shifts_with_eps_power(a, b):
    base = nt.classify_order(as_net(f"eps^({b})*(2+eps)"))
    shifted = nt.classify_order(as_net(f"eps^({a})*eps^({b})*(2+eps)"))
    if base.cls == nt.MODERATE and shifted.cls == nt.MODERATE:
        assert shifted.slope - base.slope == pytest.approx(a, abs=0.05)


@given(st.floats(-4, 4))
def test_power_law_slope_within_tolerance(a):
    v = nt.classify_order(as_net(f"eps^({a})"))
    if v.cls == nt.MODERATE:
        assert abs(v.slope - a) <= 0.05
    else:
        assert v.negligible and a >= 5 - 0.05


@given(st.floats(0, 4))
def test_moderate_times_negligible_is_negligible(a):
    prod = nt.gn_mul(as_net(f"eps^(-{a})"), as_net("exp(-1/eps)"))
    assert nt.classify_order(prod).negligible


FAMILY = [
    nt.GPoint.constant([0.0]),
    nt.GPoint([as_net("exp(-1/eps)")], [-1], [1]),
    nt.GPoint([as_net("eps^8")], [-1], [1]),
    nt.GPoint([as_net("eps")], [-1], [1]),
    nt.GPoint([as_net("1+eps")], [0], [3]),
    nt.GPoint.constant([1.0]),
]


def test_points_equivalent_is_an_equivalence_relation():
    n = len(FAMILY)
    R = np.array([[nt.points_equivalent(FAMILY[i], FAMILY[j]) for j in range(n)] for i in range(n)])
    assert np.all(np.diag(R))
    assert np.array_equal(R, R.T)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if R[i, j] and R[j, k]:
                    assert R[i, k]


@given(st.integers(0, 10_000))
def test_near_standard_tail_converges(seed):
    rng = np.random.default_rng(seed)
    c, a, r = rng.uniform(-3, 3), rng.uniform(-1, 1), rng.uniform(0.5, 3)
    x = nt.GPoint([as_net(f"{c} + {a}*eps^{r}")], [c - 2], [c + 2])
    lim = nt.near_standard(x)
    assert lim is not None and abs(lim[0] - c) <= 1e-6
    tail = np.abs(x(nt.DEFAULT_GRID.tail())[:, 0] - lim[0])
    assert np.all(np.diff(tail) <= 1e-12)


def test_verdict_records_policy_and_grid():
    v = nt.classify_order(as_net("eps"))
    d = v.as_dict()
    assert d["m_test"] == 5 and d["grid"] == {"q": 0.5, "k_min": 1, "k_max": 20}
    assert len(d["samples"]) == 0 or len(d["samples"]) == 20
    assert math.isfinite(d["slope"])
