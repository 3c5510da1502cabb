import numpy as np
import pytest
from numpy.testing import assert_allclose

from colombeau import flow as fl
from colombeau import gfunc as gf
from colombeau import net as nt
from colombeau import symmetry as sy
from colombeau.gfunc import CompactBox
from families import FAMILY, perturbed

ETAS = (-0.5, 0.5, 1.0, nt.as_net("1+eps"))


def test_triangular_chart_one_equation():
    ch = sy.build_triangular_chart([gf.from_exprs(["sin(b)"], ["b"])])
    X = np.array([[0.3, 1.1], [-2.0, 0.4]])
    assert_allclose(ch.forward(0.5, X), np.stack([X[:, 0] - np.sin(X[:, 1]), X[:, 1]], 1))
    assert_allclose(ch.inverse(0.5, X), np.stack([X[:, 0] + np.sin(X[:, 1]), X[:, 1]], 1))
    assert ch.verification["passed"]


def test_triangular_chart_round_trip():
    sys_, _ = FAMILY["triangular"]()
    ch = sys_.chart
    X = np.random.default_rng(1).uniform(-2, 2, (50, 3))
    assert np.max(np.abs(ch.forward(0.5, ch.inverse(0.5, X)) - X)) < 1e-10
    assert ch.verification["passed"]


def test_triangular_chart_refuses_unbounded():
    with pytest.raises(gf.CBoundednessError):
        sy.build_triangular_chart([gf.from_exprs(["x/eps"], ["x"])])


def test_linear_charts():
    ch = sy.build_linear_chart([["1", "0"], ["0", "1"]])
    X = np.random.default_rng(2).normal(size=(5, 2))
    assert_allclose(ch.forward(0.5, X), X)
    sys_, _ = FAMILY["linear"]()
    assert sys_.chart.verification["passed"]
    with pytest.raises(gf.CBoundednessError):
        sy.build_linear_chart([["eps", "0"], ["0", "1"]])
    J = nt.AlternatingHarmonicSet()
    z = nt.ScalarNet.piecewise(J, nt.ScalarNet.constant(0.0), nt.ScalarNet.constant(1.0))
    with pytest.raises(nt.NotStrictlyNonzeroError):
        sy.build_linear_chart([[z, "0"], ["0", "1"]])


@pytest.mark.parametrize("name", sorted(FAMILY))
def test_chart_round_trip_and_normal_form(name):
    sys_, _ = FAMILY[name]()
    ch = sys_.chart
    for K in ch.source_boxes:
        back = gf.compose(ch.inverse, ch.forward, [K])
        assert gf.equals_in_G(back, gf.identity(ch.source), [K])[0]
    for K in ch.target_boxes:
        there = gf.compose(ch.forward, ch.inverse, [K])
        assert gf.equals_in_G(there, gf.identity(ch.target), [K])[0]
    assert sys_.check_solutions()["passed"]
    assert sys_.normal_form()["passed"]


def test_infinitesimal_criterion_examples():
    F = gf.from_exprs(["x1"], ["x1", "x2"])
    S = sy.AlgebraicSystem(F, [nt.GPoint.constant([0.0, t]) for t in (-1, 0, 2)], label="x1")
    assert sy.infinitesimal_criterion(S, fl.GVectorField.from_exprs(["x1", "0"], ["x1", "x2"]))["passed"]
    circle, rot = FAMILY["circle"]()
    assert sy.infinitesimal_criterion(circle, rot)["passed"]
    C = sy.AlgebraicSystem(circle.F, [nt.GPoint.constant([1.0, 0.0])], label="c")
    assert not sy.infinitesimal_criterion(C, fl.GVectorField.from_exprs(["1", "0"], ["x", "y"]))["passed"]


def test_transport_examples():
    circle, rot = FAMILY["circle"]()
    assert sy.transport_check(circle, fl.integrate_flow(rot), (-1.0, -0.5, 0.5, 1.0, nt.as_net("1+eps")))["passed"]
    trans = fl.GroupAction.from_exprs(["x + eta", "y"], ["x", "y"])
    assert not sy.transport_check(circle, trans, (0.5,))["passed"]
    J = nt.AlternatingHarmonicSet()
    F = gf.PiecewiseGFunc(J, gf.from_exprs(["x"], ["x"]), gf.from_exprs(["x - 1"], ["x"]))
    xt = nt.GPoint([nt.ScalarNet.piecewise(J, nt.ScalarNet.constant(0.0), nt.ScalarNet.constant(1.0))], [-1], [2])
    S = sy.AlgebraicSystem(F, [xt], label="piecewise")
    assert sy.transport_check(S, fl.identity_action(gf.Domain.whole(1)), (0.5,))["passed"]
    assert not sy.transport_check(S, fl.GroupAction.from_exprs(["x + eta"], ["x"]), (0.5,))["passed"]


def test_hypothesis_branches_on_simple_fields():
    lin = fl.GVectorField.from_exprs(["x"], ["x"])
    assert sy.hypothesis_check(lin, "linear_growth")["passed"]
    quad = fl.GVectorField.from_exprs(["x^2"], ["x"])
    assert not sy.hypothesis_check(quad, "linear_growth")["passed"]
    logf = fl.GVectorField.from_exprs(["abs(log(eps))*x/(1+x^2)"], ["x"])
    assert sy.hypothesis_check(logf, "box_logtype", boxes=[CompactBox([-2.0], [2.0])])["passed"]


@pytest.mark.parametrize("name", sorted(FAMILY))
def test_theorem_directions_on_family(name):
    sys_, xi = FAMILY[name]()
    good = sy.check_symmetry(sys_, xi, fl.integrate_flow(xi), ETAS)
    assert good.criterion["passed"] and good.transport["passed"] and good.overall
    bad_xi = perturbed(xi)
    bad = sy.check_symmetry(sys_, bad_xi, fl.integrate_flow(bad_xi), (-0.5, 0.5))
    assert not bad.criterion["passed"] and not bad.transport["passed"]
    for v in (good, bad):
        # forward direction: transport => criterion
        if v.transport["passed"]:
            assert v.criterion["passed"]
        # converse under a passing hypothesis: criterion => transport
        if v.criterion["passed"] and any(h["passed"] for h in v.hypothesis.values()):
            assert v.transport["passed"]
        assert v.agree


def test_hypothesis_branch_per_case():
    expected = {"circle": ("box_logtype",), "triangular": ("box_logtype",), "linear": ("linear_growth",)}
    for name, modes in expected.items():
        sys_, xi = FAMILY[name]()
        xbar = sy.chart_field(sys_.chart, xi)
        for mode in modes:
            assert sy.hypothesis_check(xbar, mode, boxes=sys_.chart.target_boxes or None)["passed"], (name, mode)


def test_chart_field_straightens_rotation_on_circle():
    sys_, rot = FAMILY["circle"]()
    xbar = sy.chart_field(sys_.chart, rot)
    T = sys_.chart.target_boxes[0].lattice()
    vals = xbar(0.5, T)
    assert np.max(np.abs(vals[:, 0])) < 1e-9
    assert_allclose(np.abs(vals[:, 1]), 1.0, atol=1e-9)
