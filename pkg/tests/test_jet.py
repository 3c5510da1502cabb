import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from colombeau import expr as ex
from colombeau import flow as fl
from colombeau import gfunc as gf
from colombeau import jet as jt
from colombeau.gfunc import CompactBox

S1 = jt.JetSpec(1, 1, 1)
S2 = jt.JetSpec(2, 1, 3, ("x", "y"))
K1 = [CompactBox([-1.0], [1.0], 17)]


def _same(a, b, spec, points=20, seed=0, tol=1e-12):
    Z = np.random.default_rng(seed).uniform(-2, 2, (points, spec.dim))
    da = ex.eval_points(ex.parse(a, spec.names) if isinstance(a, str) else a, 0.5, Z, spec.names)
    db = ex.eval_points(ex.parse(b, spec.names) if isinstance(b, str) else b, 0.5, Z, spec.names)
    return np.max(np.abs(da - db)) <= tol


def test_jet_coordinates():
    assert S1.names == ("x", "u", "u_x")
    assert "u_xy" in S2.names and "u_yx" not in S2.names
    assert S2.parse_coord("u_xyy") == (0, (0, 1, 1))
    assert S2.order_of("u_xx") == 2


def test_total_derivative_examples():
    assert _same(jt.total_derivative("u", 0, S1), "u_x", S1)
    S = jt.JetSpec(1, 1, 2)
    assert _same(jt.total_derivative("x*u_x", 0, S), "u_x + x*u_xx", S)
    dxy = jt.total_derivative(jt.total_derivative("u", 0, S2), 1, S2)
    dyx = jt.total_derivative(jt.total_derivative("u", 1, S2), 0, S2)
    assert dxy == dyx == ex.Sym("u_xy")


def test_total_derivative_overflow_is_an_error():
    with pytest.raises(jt.JetError):
        jt.total_derivative("u_x", 0, S1)


_TERMS = st.lists(st.sampled_from(["x", "y", "u", "u_x", "u_y", "sin(u)", "x*u_y", "exp(y)", "u_x*u_y"]), min_size=1, max_size=4)


@given(_TERMS, _TERMS)
def test_total_derivatives_commute(a, b):
    e = ex.parse(f"({' + '.join(a)}) * ({' * '.join(b)})", S2.names)
    dxy = jt.total_derivative(jt.total_derivative(e, 0, S2), 1, S2)
    dyx = jt.total_derivative(jt.total_derivative(e, 1, S2), 0, S2)
    assert _same(dxy, dyx, S2, tol=1e-8)


def test_prolong_field_examples():
    pr = jt.prolong_field(["1"], ["0"], S1)
    assert all(_same(v, "0", S1) for v in pr.added().values())
    pr = jt.prolong_field(["x"], ["0"], S1)
    assert _same(pr.added()["u_x"], "-u_x", S1, tol=1e-10)
    pr = jt.prolong_field(["0"], ["x"], S1)
    assert _same(pr.added()["u_x"], "1", S1, tol=1e-10)
    with pytest.raises(jt.JetError):
        jt.prolong_field(["u"], ["-x"], S1)


def test_recursive_prolongation_matches_characteristic_formula():
    S = jt.JetSpec(2, 1, 2, ("x", "t"))
    xi, phi = ["x*t", "t^2"], ["u*x + t"]
    pr = jt.prolong_field(xi, phi, S)
    for name in ("u_x", "u_t", "u_xx", "u_xt", "u_tt"):
        alpha, J = S.parse_coord(name)
        char = jt.characteristic_coefficient(xi, phi, S, alpha, J)
        assert _same(pr.coefficient(name), char, S.extended(), tol=1e-9)


def test_prolong_action_examples():
    ident = jt.ProjectableAction.from_exprs(["x"], ["u"], ["x"], ["u"])
    z = np.array([0.7, 1.3, 2.0])
    assert_allclose(jt.prolong_action(ident, S1, z, 0.4, 0.5), z, atol=1e-12)
    trans = jt.ProjectableAction.from_exprs(["x + eta"], ["u"], ["x"], ["u"])
    assert_allclose(jt.prolong_action(trans, S1, z, 0.4, 0.5), [1.1, 1.3, 2.0], atol=1e-12)
    scale = jt.ProjectableAction.from_exprs(["exp(eta)*x"], ["u"], ["x"], ["u"])
    assert_allclose(jt.prolong_action(scale, S1, z, 0.4, 0.5), [0.7 * np.exp(0.4), 1.3, 2.0 * np.exp(-0.4)], atol=1e-10)


def test_prolong_action_independent_of_h():
    S = jt.JetSpec(1, 1, 2)
    A = jt.ProjectableAction.from_exprs(["x + eta"], ["u*exp(eta) + x*eta"], ["x"], ["u"])
    z = np.array([0.3, 0.5, -0.2, 0.9])
    base = jt.prolong_action(A, S, z, 0.3, 0.5)
    assert_allclose(jt.prolong_action(A, S, z, 0.3, 0.5, perturb=([3], 2.0)), base, atol=1e-10)


def test_numeric_and_symbolic_prolongation_agree():
    xi, phi = ["x^2"], ["x*u"]
    pr = jt.prolong_field(xi, phi, S1)
    F = fl.GVectorField.from_exprs(xi + phi, ["x", "u"])
    P = jt.ProjectableAction.from_flow(fl.integrate_flow(F), 1)
    for z in np.random.default_rng(3).uniform(-1, 1, (3, 3)):
        num = jt.prolonged_generator(P, S1, z, 0.5)
        sym = [ex.evaluate(c, 0.5, z, S1.names) for c in pr.components]
        assert np.max(np.abs(num - sym)) < 1e-5


def test_graph_transform_examples():
    u = gf.from_exprs(["sin(x) + eps"], ["x"])
    trans = jt.ProjectableAction.from_exprs(["x + eta"], ["u"], ["x"], ["u"])
    assert gf.equals_in_G(jt.graph_transform(u, trans, 0.5, K1), gf.from_exprs(["sin(x - 0.5) + eps"], ["x"]), K1)[0]
    lift = jt.ProjectableAction.from_exprs(["x"], ["u + eta"], ["x"], ["u"])
    assert gf.equals_in_G(jt.graph_transform(u, lift, 0.5, K1), gf.from_exprs(["sin(x) + eps + 0.5"], ["x"]), K1)[0]
    scale = jt.ProjectableAction.from_exprs(["exp(eta)*x"], ["u"], ["x"], ["u"])
    sq = gf.from_exprs(["x^2"], ["x"])
    assert gf.equals_in_G(jt.graph_transform(sq, scale, 0.3, K1), gf.from_exprs(["(x*exp(-0.3))^2"], ["x"]), K1)[0]


@given(st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))
def test_graph_transform_group_law(a, b):
    u = gf.from_exprs(["x^3 - x + eps"], ["x"])
    # flow of d/dx + x d/du
    A = jt.ProjectableAction.from_exprs(["x + eta"], ["u + eta*x + eta^2/2"], ["x"], ["u"])
    two = jt.graph_transform(jt.graph_transform(u, A, b, K1), A, a, K1)
    one = jt.graph_transform(u, A, a + b, K1)
    assert gf.equals_in_G(two, one, K1)[0]


def test_graph_sampling_agrees_with_direct_substitution():
    H = jt.JetSpec(2, 1, 2, ("x", "t"))
    kernel = gf.from_exprs(["exp(-x^2/(4*(t+eps)))/sqrt(4*pi*(t+eps))"], ["x", "t"])
    not_sol = gf.from_exprs(["x^2 + t^2"], ["x", "t"])
    heat = jt.PdeSystem(H, ["u_t - u_xx"], solutions=[kernel, not_sol], boxes=[CompactBox([-2, 0.5], [2, 1], 9)])
    r = jt.pde_symmetry_check(heat, ["0", "1"], ["0"], action=jt.ProjectableAction.from_exprs(["x", "t+eta"], ["u"], ["x", "t"], ["u"]))
    for s in r["solutions"]:
        assert s["consistent"]
    assert [s["graph_sampling"] for s in r["solutions"]] == [True, False]


def test_pde_examples():
    S = jt.JetSpec(1, 1, 1)
    pts = [jt.jet_point(S, {"x": x, "u": v, "u_x": 0}) for x, v in [(0, 0), (0.5, 2)]]
    assert jt.pde_symmetry_check(jt.PdeSystem(S, ["u_x"], pts), ["1"], ["0"])["passed"]
    pts = [jt.jet_point(S, {"x": x, "u": v, "u_x": 1}) for x, v in [(0, 0), (0.5, 2), (-1, 3)]]
    r = jt.pde_symmetry_check(jt.PdeSystem(S, ["u_x - 1"], pts), ["x"], ["0"])
    assert not r["passed"]
    assert all(np.allclose(p["residual"], -1.0) for p in r["points"])
