import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from colombeau import flow as fl
from colombeau import gfunc as gf
from colombeau import net as nt
from colombeau.chart import GChart
from colombeau.gfunc import CompactBox

K = CompactBox([-1.0, -1.0], [1.0, 1.0], 9)
ROT = fl.GVectorField.from_exprs(["y", "-x"], ["x", "y"])
SHIFT = fl.GVectorField.from_exprs(["1", "0"], ["x", "y"])
ETAS = np.linspace(-2, 2, 9)


def _rotation(eta, X):
    c, s = math.cos(eta), math.sin(eta)
    return np.stack([c * X[:, 0] + s * X[:, 1], -s * X[:, 0] + c * X[:, 1]], axis=1)


def test_constant_field_flow_is_translation():
    Phi = fl.integrate_flow(fl.GVectorField.from_exprs(["1"], ["x"]))
    X = np.linspace(-1, 1, 11)[:, None]
    for eta in ETAS:
        assert np.max(np.abs(Phi(0.5, eta, X) - (X + eta))) < 1e-9


def test_rotation_flow_matches_closed_form():
    Phi = fl.integrate_flow(ROT)
    X = K.lattice()
    for eta in ETAS:
        assert np.max(np.abs(Phi(0.5, eta, X) - _rotation(eta, X))) < 1e-8


def test_escape_events_are_logged():
    xi = fl.GVectorField.from_exprs(["1/eps", "0"], ["x", "y"])
    cfg = fl.FlowConfig(escape_box=CompactBox([-3.0, -3.0], [3.0, 3.0]))
    Phi = fl.integrate_flow(xi, cfg)
    Phi(2.0 ** -10, 1.0, K.lattice())
    assert Phi.log.as_dict()["escape_events"] > 0


def test_group_action_checks():
    trans = fl.GroupAction.from_exprs(["x + eta", "y"], ["x", "y"])
    assert fl.verify_group_action(trans, [K])["passed"]
    rot = fl.integrate_flow(ROT)
    r = fl.verify_group_action(rot, [K], eta_samples=[(0.5, 1.0), (-1.0, 0.5)])
    assert r["passed"] and r["floor"] == nt.INTEGRATOR_FLOOR
    assert max(c["max_residual"] for c in r["composition"]) < 1e-7
    bad = fl.GroupAction.from_exprs(["x + eta^2", "y"], ["x", "y"])
    assert not fl.verify_group_action(bad, [K])["passed"]


def test_generator_residuals():
    trans = fl.GroupAction.from_exprs(["x + eta", "y"], ["x", "y"])
    r = fl.generator_residual(trans, SHIFT, [K])
    assert r["passed"] and r["max_residual"] < 1e-8
    r = fl.generator_residual(fl.integrate_flow(ROT), ROT, [K], eta_samples=[0.0, 0.5, 1.0])
    assert r["passed"] and r["max_residual"] < 1e-7
    assert not fl.generator_residual(trans, ROT, [K])["passed"]


def test_conserved_radius():
    Phi = fl.integrate_flow(ROT)
    X = K.lattice()
    r0 = np.sum(X ** 2, axis=1)
    mask = r0 > 0
    for eta in ETAS:
        r = np.sum(Phi(0.5, eta, X) ** 2, axis=1)
        assert np.max(np.abs(r[mask] - r0[mask]) / r0[mask]) < 1e-8


@given(st.floats(-1, 1), st.floats(-1, 1))
def test_flow_semigroup_and_reversibility(a, b):
    Phi = fl.integrate_flow(fl.GVectorField.from_exprs(["sin(y)", "x - x^3/3"], ["x", "y"]))
    X = K.lattice()
    two = Phi(0.5, a, Phi(0.5, b, X))
    assert_allclose(two, Phi(0.5, a + b, X), atol=1e-8)
    assert_allclose(Phi(0.5, -a, Phi(0.5, a, X)), X, atol=1e-8)


def test_pullback_identity_and_linear():
    D = gf.Domain.whole(2)
    ident = GChart(gf.identity(D), gf.identity(D), D, D, "identity")
    xi = fl.GVectorField.from_exprs(["x*y", "1 + eps"], ["x", "y"])
    assert gf.equals_in_G(fl.pullback_field(ident, xi).components, xi.components, [K])[0]
    A = np.array([[2.0, 1.0], [0.5, 3.0]])
    lin = GChart(gf.from_exprs(["2*x + y", "0.5*x + 3*y"], ["x", "y"]), None, D, D, "linear")
    c = fl.GVectorField.from_exprs(["1", "-2"], ["x", "y"])
    pulled = fl.pullback_field(lin, c).components(0.5, K.lattice())
    assert_allclose(pulled, np.tile(np.linalg.solve(A, [1.0, -2.0]), (len(pulled), 1)), atol=1e-9)


def test_pullback_naturality():
    D = gf.Domain.whole(2)
    psi = GChart(gf.from_exprs(["x + y^3", "y"], ["x", "y"]), gf.from_exprs(["x - y^3", "y"], ["x", "y"]), D, D)
    Phi = fl.GroupAction.from_exprs(["x*cos(eta) + y*sin(eta)", "-x*sin(eta) + y*cos(eta)"], ["x", "y"])
    assert fl.generator_residual(Phi, ROT, [K])["passed"]
    r = fl.generator_residual(fl.pullback_action(psi, Phi), fl.pullback_field(psi, ROT), [K], eta_samples=[0.0, 0.5])
    assert r["passed"]


@pytest.mark.parametrize("a", ["1", "2+eps"])
def test_polar_straightening(a):
    _, r = fl.straighten_polar(a)
    assert r["passed"] and r["equals_minus_d_theta"] and not r["equals_d_theta"]
    _, r = fl.straighten_polar(a, clockwise=False)
    assert r["passed"] and r["equals_d_theta"]


def test_polar_straightening_refuses_vanishing_scale():
    J = nt.AlternatingHarmonicSet()
    a = nt.ScalarNet.piecewise(J, nt.ScalarNet.constant(0.0), nt.ScalarNet.constant(1.0))
    with pytest.raises(nt.NotStrictlyNonzeroError):
        fl.straighten_polar(a)


def test_completeness_diagnostics():
    L = [CompactBox([-2.0], [2.0])]
    r = fl.completeness_diagnostics(fl.GVectorField.from_exprs(["sin(x)"], ["x"]), L)
    assert r["global_bound"] and r["log_type"]
    r = fl.completeness_diagnostics(fl.GVectorField.from_exprs(["abs(log(eps))*x/(1+x^2)"], ["x"]), L)
    assert r["log_type"]
    r = fl.completeness_diagnostics(fl.GVectorField.from_exprs(["1/eps"], ["x"]), L)
    assert not r["global_bound"]


def test_eta_outside_range_is_refused():
    Phi = fl.integrate_flow(ROT, eta_range=(-1.0, 1.0))
    with pytest.raises(fl.ActionRangeError):
        Phi(0.5, 1.5, K.lattice())


def test_net_valued_eta():
    Phi = fl.GroupAction.from_exprs(["x + eta"], ["x"])
    out = Phi(0.25, nt.as_net("1+eps"), np.array([[0.0]]))
    assert out[0, 0] == pytest.approx(1.25)
