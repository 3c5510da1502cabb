"""Example systems shared by the module tests and the acceptance suite."""
import numpy as np

from colombeau import flow as fl
from colombeau import gfunc as gf
from colombeau import net as nt
from colombeau import symmetry as sy
from colombeau.gfunc import CompactBox

TH = "1/abs(log(eps))"


def circle(resolution=9):
    F = gf.from_exprs(["x^2+y^2-1"], ["x", "y"])
    chart = sy.GChart(
        gf.from_exprs(["x^2+y^2-1", "pi+atan2(-y,-x)"], ["x", "y"]),
        gf.from_exprs(["sqrt(1+x)*cos(y)", "sqrt(1+x)*sin(y)"], ["x", "y"]),
        gf.Domain.whole(2),
        gf.Domain([-1, 0], [np.inf, 2 * np.pi]),
        "user-closed-form",
        [CompactBox([-1.5, -1], [-0.5, 1], resolution)],
        [CompactBox([-0.5, 0.5], [1, 5.5], resolution)],
    )
    chart.verification = chart.verify()
    sols = [nt.GPoint.constant([np.cos(t), np.sin(t)]) for t in (0.3, 1.2, 2.5)]
    sols.append(nt.GPoint([nt.as_net("cos(4+eps)"), nt.as_net("sin(4+eps)")], [-2, -2], [2, 2], "net"))
    xi = fl.GVectorField.from_exprs(["y", "-x"], ["x", "y"])
    return sy.AlgebraicSystem(F, sols, chart, label="circle"), xi


def triangular(resolution=9):
    f1, f2 = gf.from_exprs(["a*b"], ["a", "b"]), gf.from_exprs(["c^2"], ["c"])
    chart = sy.build_triangular_chart([f1, f2], boxes=[CompactBox([-1.0] * 3, [1.0] * 3, resolution)])
    F = gf.from_exprs(["x1 - x2*x3", "x2 - x3^2"], ["x1", "x2", "x3"])
    sols = [nt.GPoint.constant([t ** 3, t ** 2, t]) for t in (-1.0, 0.5)]
    sols.append(nt.GPoint([nt.as_net("(1+eps)^3"), nt.as_net("(1+eps)^2"), nt.as_net("1+eps")], [0, 0, 0], [9, 9, 9], "net"))
    xi = fl.GVectorField.from_exprs(["3*x3^2", "2*x3", "1"], ["x1", "x2", "x3"])
    return sy.AlgebraicSystem(F, sols, chart, label="triangular"), xi


def linear(resolution=9):
    A = [[f"cos({TH})", f"-sin({TH})"], [f"sin({TH})", f"cos({TH})"]]
    chart = sy.build_linear_chart(A, boxes=[CompactBox([-1.0, -1.0], [1.0, 1.0], resolution)])
    F = sy.linear_system(A, 1)
    sols = [nt.GPoint([nt.as_net(f"{s}*sin({TH})"), nt.as_net(f"{s}*cos({TH})")], [-2, -2], [2, 2], f"s={s}")
            for s in (-1, 0.5, 1)]
    xi = fl.GVectorField.from_exprs([f"sin({TH})", f"cos({TH})"], ["x1", "x2"])
    return sy.AlgebraicSystem(F, sols, chart, label="linear"), xi


FAMILY = {"circle": circle, "triangular": triangular, "linear": linear}


def perturbed(xi):
    """xi + d/dx_1."""
    names = xi.components.names
    bump = ["1"] + ["0"] * (len(names) - 1)
    return xi + fl.GVectorField.from_exprs(bump, names)
