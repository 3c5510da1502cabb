import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from colombeau import flow as fl
from colombeau import gfunc as gf
from colombeau import invariance as inv
from colombeau import net as nt
from colombeau.gfunc import CompactBox, from_exprs

K = [CompactBox([-1.0, -1.0], [1.0, 1.0], 9)]
KZ = [CompactBox([-1.0, -1.0], [1.0, 1.0], 17, zoom=[[0.0, 0.0], [0.5, 0.0]])]
XY = ["x", "y"]
ROT = fl.GVectorField.from_exprs(["y", "-x"], XY)
MODES = ("standard", "generalized", "infinitesimal")


def test_action_invariance_examples():
    rot = fl.integrate_flow(ROT)
    assert inv.action_invariance(from_exprs(["x^2+y^2"], XY), rot, K).overall
    trans = fl.GroupAction.from_exprs(["x + eta", "y"], XY)
    assert not inv.action_invariance(from_exprs(["x"], XY), trans, K).overall
    assert inv.action_invariance(from_exprs(["3"], XY), trans, K).overall


def test_infinitesimal_invariance_examples():
    assert inv.infinitesimal_invariance(from_exprs(["x^2+y^2"], XY), ROT, K).overall
    dx = fl.GVectorField.from_exprs(["1", "0"], XY)
    assert not inv.infinitesimal_invariance(from_exprs(["x"], XY), dx, K).overall
    assert inv.infinitesimal_invariance(from_exprs(["x^2+y^2+exp(-1/eps)*x"], XY), ROT, K).overall


@pytest.mark.parametrize("f", ["x^2+y^2", "x^2+y^2+exp(-1/eps)*x", "x", "x*y", "exp(-(x^2+y^2)/eps)"])
def test_action_and_infinitesimal_agree(f):
    u = from_exprs([f], XY)
    Phi = fl.integrate_flow(ROT)
    a = inv.action_invariance(u, Phi, K, eta_samples=(-0.5, 0.5, "1+eps"))
    b = inv.infinitesimal_invariance(u, ROT, K, flow=Phi)
    assert a.overall == b.overall
    assert b.agree


@pytest.mark.parametrize(
    "expr, expected",
    [("x2", True), ("x2^2 + exp(-1/eps)*sin(x1)", True), ("sin(x1/eps)", False), ("x1", False)],
)
def test_translation_examples(expr, expected):
    r = inv.translation_invariance(from_exprs([expr], ["x1", "x2"]), 0, K)
    assert r.agree
    assert all(r.subverdicts[m]["passed"] == expected for m in MODES)


@pytest.mark.parametrize(
    "expr, expected",
    [("gauss(x1/eps, x2/eps)/eps^2", True), ("bump((x1-0.5)/eps, x2/eps)/eps^2", False), ("3", True)],
)
def test_rotation_examples(expr, expected):
    r = inv.rotation_invariance(from_exprs([expr], ["x1", "x2"]), KZ)
    assert r.agree
    assert all(r.subverdicts[m]["passed"] == expected for m in MODES)


def test_generalized_rotation_examples():
    R = inv.make_generalized_rotation(2, [nt.as_net("pi/4")])
    c = math.sqrt(0.5)
    assert_allclose(R.matrix(0.3), [[c, -c], [c, c]], atol=1e-15)
    R = inv.make_generalized_rotation(2, ["1/abs(log(eps))"])
    assert R.verification["passed"]
    assert_allclose(R.limit(), np.eye(2), atol=1e-2)
    R = inv.make_generalized_rotation(3, ["pi/2", "eps"], [(0, 1), (1, 2)])
    assert R.verification["passed"] and R.verification["max_gram_residual"] < 1e-12


@given(st.lists(st.floats(-10, 10), min_size=3, max_size=3), st.integers(0, 1000))
def test_rotations_preserve_norms(angles, seed):
    R = inv.make_generalized_rotation(3, [nt.ScalarNet.constant(a) for a in angles], [(0, 1), (1, 2), (0, 2)])
    X = np.random.default_rng(seed).normal(size=(20, 3))
    for eps in (0.5, 1e-3):
        assert_allclose(np.linalg.norm(R(eps, X), axis=1), np.linalg.norm(X, axis=1), rtol=1e-12)


@given(st.floats(0, 2 * math.pi))
def test_rotation_verdict_is_basis_covariant(theta):
    """Invariance of u and of u composed with a fixed rotation Q must be decided alike.

    Only the sampled modes are compared: printed cos/sin coefficients are not an exact
    rotation, and the infinitesimal mode rightly sees that as an eps^-2 residual.
    """
    c, s = math.cos(theta), math.sin(theta)
    for expr, expected in [("gauss(x1/eps, x2/eps)/eps^2", True), ("x1 + eps*x2", False)]:
        rotated = expr.replace("x1", "(X1)").replace("x2", "(X2)")
        rotated = rotated.replace("X1", f"{c}*x1 - ({s})*x2").replace("X2", f"{s}*x1 + {c}*x2")
        r = inv.rotation_invariance(from_exprs([rotated], ["x1", "x2"]), KZ, random_angles=1, fixed_angles=2,
                                    diagnostics=False)
        assert r.subverdicts["standard"]["passed"] == expected
        assert r.subverdicts["generalized"]["passed"] == expected


def test_angular_average_of_radial_function_is_itself():
    u = from_exprs(["exp(-(x1^2+x2^2)/eps)"], ["x1", "x2"])
    avg = inv.angular_average(u, 64)
    X = K[0].lattice()
    assert_allclose(avg(0.25, X), u(0.25, X), atol=1e-12)


def test_rotation_generators_are_tangent_to_spheres():
    for xi in inv.rotation_generators(3):
        X = np.random.default_rng(0).normal(size=(10, 3))
        assert_allclose(np.einsum("ni,ni->n", X, xi(0.5, X)), 0.0, atol=1e-12)
