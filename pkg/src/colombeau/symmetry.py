"""Algebraic systems F(x) = 0: charts in projection normal form and symmetry criteria.

A system carries a finite sampled family of solution points (constant or
net-valued).  ``infinitesimal_criterion`` evaluates xi(F) at those points,
``transport_check`` moves them along a group action and evaluates F there.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import expr as ex
from .chart import GChart
from .flow import (
    GroupAction,
    GVectorField,
    IntegrationError,
    _bounded_along_grid,
    completeness_diagnostics,
    eta_at,
    eta_label,
)
from .gfunc import (
    CBoundednessError,
    CompactBox,
    Domain,
    ExprGFunc,
    GFunc,
    GFuncError,
    ProcGFunc,
    c_bounded_witness,
    compose,
    equals_in_G,
    from_exprs,
    sup_seminorm,
    value_at,
)
from .net import (
    DEFAULT_GRID,
    DEFAULT_POLICY,
    INTEGRATOR_FLOOR,
    EpsilonGrid,
    GPoint,
    NotStrictlyNonzeroError,
    Policy,
    ScalarNet,
    as_net,
    classify_order,
    classify_samples,
    is_strictly_nonzero,
)

__all__ = [
    "GChart",
    "AlgebraicSystem",
    "SymmetryVerdict",
    "build_triangular_chart",
    "build_linear_chart",
    "linear_system",
    "chart_field",
    "infinitesimal_criterion",
    "transport_check",
    "hypothesis_check",
    "check_symmetry",
]

# a sup/(1+R) ratio whose log-log slope in R stays below this is called bounded in R
GROWTH_SLOPE_TOL = 0.25


class SymmetryError(Exception):
    pass


def _default_boxes(n: int) -> list[CompactBox]:
    return [CompactBox([-1.0] * n, [1.0] * n, resolution=9)]


def _names(n: int) -> tuple[str, ...]:
    return tuple(f"x{i + 1}" for i in range(n))


def _finish(chart: GChart, grid: EpsilonGrid, policy: Policy, verify: bool) -> GChart:
    if verify:
        chart.verification = chart.verify(grid, policy)
    return chart


# ---------------------------------------------------------------------------
# chart constructions


def build_triangular_chart(
    f_list: Sequence[GFunc],
    boxes: Sequence[CompactBox] | None = None,
    target_boxes: Sequence[CompactBox] | None = None,
    grid: EpsilonGrid = DEFAULT_GRID,
    policy: Policy = DEFAULT_POLICY,
    verify: bool = True,
) -> GChart:
    """Chart for F_i = x_i - f_i(x_{i+1}, ..., x_n), i = 1..l.

    ``f_list[i-1]`` is a scalar GFunc of the n - i trailing coordinates.
    The forward map is y -> (F_1(y), ..., F_l(y), y_{l+1}, ..., y_n); the inverse
    is the back substitution y_i = x_i + f_i(y_{i+1}, ..., y_n).
    """
    if not f_list:
        raise SymmetryError("a triangular system needs at least one equation")
    l = len(f_list)
    n = f_list[0].domain.dim + 1
    for i, f in enumerate(f_list, start=1):
        if f.domain.dim != n - i or f.dim_out != 1:
            raise SymmetryError(f"f_{i} must map R^{n - i} to R (got R^{f.domain.dim} -> R^{f.dim_out})")
    if l >= n:
        raise SymmetryError("the triangular form needs l < n")
    boxes = list(boxes) if boxes else _default_boxes(n)
    for i, f in enumerate(f_list, start=1):
        for K in boxes:
            Ki = CompactBox(K.lo[i:], K.hi[i:], K.resolution)
            if c_bounded_witness(f, Ki, grid, policy) is None:
                raise CBoundednessError(f"f_{i} = {f.label} has no c-bounded witness on {Ki.lo}..{Ki.hi}")

    names = _names(n)
    whole = Domain.whole(n)
    if all(isinstance(f, ExprGFunc) for f in f_list):
        syms = [ex.Sym(v) for v in names]

        def sub(f, args):
            return ex.substitute(f.exprs[0], dict(zip(f.names, args)))

        fwd_exprs = [ex.sub(syms[i - 1], sub(f, syms[i:])) for i, f in enumerate(f_list, start=1)] + syms[l:]
        ys = list(syms)
        for i in range(l, 0, -1):
            ys[i - 1] = ex.add(syms[i - 1], sub(f_list[i - 1], ys[i:]))
        fwd = ExprGFunc(whole, fwd_exprs, names, label="psi_tri")
        inv = ExprGFunc(whole, ys, names, label="psi_tri^-1")
    else:

        def fwd_fn(eps, X):
            out = np.array(X, dtype=float)
            for i, f in enumerate(f_list, start=1):
                out[:, i - 1] = X[:, i - 1] - f(eps, X[:, i:])[:, 0]
            return out

        def inv_fn(eps, X):
            Y = np.array(X, dtype=float)
            for i in range(l, 0, -1):
                Y[:, i - 1] = X[:, i - 1] + f_list[i - 1](eps, Y[:, i:])[:, 0]
            return Y

        fwd = ProcGFunc(whole, n, fwd_fn, label="psi_tri")
        inv = ProcGFunc(whole, n, inv_fn, label="psi_tri^-1")
    if target_boxes is None:
        target_boxes = []
        for K in boxes:
            w = c_bounded_witness(fwd, K, grid, policy)
            target_boxes.append(CompactBox(w.lo, w.hi, K.resolution))
    chart = GChart(fwd, inv, whole, whole, "triangular", list(boxes), list(target_boxes))
    chart.rank = l
    chart.functions = list(f_list)
    return _finish(chart, grid, policy, verify)


def _matrix_nets(A) -> list[list[ScalarNet]]:
    rows = [[as_net(a) for a in row] for row in A]
    n = len(rows)
    if n == 0 or any(len(r) != n for r in rows):
        raise SymmetryError("the matrix must be square and nonempty")
    return rows


def _matrix_fn(rows):
    n = len(rows)

    def mat(eps) -> np.ndarray:
        eps = np.atleast_1d(np.asarray(eps, dtype=float))
        M = np.empty((len(eps), n, n))
        for i in range(n):
            for j in range(n):
                M[:, i, j] = rows[i][j](eps)
        return M

    return mat


def build_linear_chart(
    A,
    boxes: Sequence[CompactBox] | None = None,
    target_boxes: Sequence[CompactBox] | None = None,
    grid: EpsilonGrid = DEFAULT_GRID,
    policy: Policy = DEFAULT_POLICY,
    verify: bool = True,
) -> GChart:
    """Chart for F(x) = pr(A x) with A an n x n matrix of generalized numbers.

    Forward map x -> A x (so that F o psi^{-1} = pr), inverse x -> A^{-1} x.
    ``det A`` must be strictly nonzero and both maps c-bounded on the boxes.
    """
    rows = _matrix_nets(A)
    n = len(rows)
    mat = _matrix_fn(rows)
    det = ScalarNet(lambda e: np.linalg.det(mat(e)), label="det A")
    if not is_strictly_nonzero(det, grid, policy):
        raise NotStrictlyNonzeroError("det A is not strictly nonzero; A is not invertible in the generalized numbers")
    names = _names(n)
    whole = Domain.whole(n)
    if all(a.expr is not None for row in rows for a in row):
        syms = [ex.Sym(v) for v in names]
        exprs = []
        for row in rows:
            acc = ex.ZERO
            for a, s in zip(row, syms):
                acc = ex.add(acc, ex.mul(a.expr, s))
            exprs.append(acc)
        fwd = ExprGFunc(whole, exprs, names, label="A x")
    else:
        fwd = ProcGFunc(whole, n, lambda e, X: np.einsum("ij,nj->ni", mat(e)[0], X), label="A x")

    def inv_partial(e, X, alpha, h):
        out = np.zeros((len(X), n))
        if sum(alpha) == 0:
            return X @ np.linalg.inv(mat(e)[0]).T
        if sum(alpha) == 1:
            out[:] = np.linalg.inv(mat(e)[0])[:, list(alpha).index(1)]
        return out

    def inv_scaled(e, X):
        B = np.linalg.inv(mat(e)[0])
        return X @ B.T, np.abs(X) @ np.abs(B).T

    inv = ProcGFunc(whole, n, label="A^-1 x", scaled_fn=inv_scaled, partial_fn=inv_partial)
    boxes = list(boxes) if boxes else _default_boxes(n)
    target_boxes = list(target_boxes) if target_boxes else list(boxes)
    for K in boxes:
        if c_bounded_witness(fwd, K, grid, policy) is None:
            raise CBoundednessError(f"x -> A x is not c-bounded on {K.lo}..{K.hi}")
    for K in target_boxes:
        if c_bounded_witness(inv, K, grid, policy) is None:
            raise CBoundednessError(f"x -> A^-1 x is not c-bounded on {K.lo}..{K.hi}")
    chart = GChart(fwd, inv, whole, whole, "linear", boxes, target_boxes)
    chart.matrix = mat
    return _finish(chart, grid, policy, verify)


def linear_system(A, l: int) -> GFunc:
    """F(x) = pr_{R^n -> R^l}(A x)."""
    rows = _matrix_nets(A)
    n = len(rows)
    if not 1 <= l <= n:
        raise SymmetryError(f"rank {l} outside 1..{n}")
    names = _names(n)
    if all(a.expr is not None for row in rows[:l] for a in row):
        exprs = []
        for row in rows[:l]:
            acc = ex.ZERO
            for a, s in zip(row, names):
                acc = ex.add(acc, ex.mul(a.expr, ex.Sym(s)))
            exprs.append(acc)
        return ExprGFunc(Domain.whole(n), exprs, names, label="pr(A x)")
    mat = _matrix_fn(rows)
    return ProcGFunc(Domain.whole(n), l, lambda e, X: np.einsum("ij,nj->ni", mat(e)[0][:l], X), label="pr(A x)")


def chart_field(chart: GChart, xi: GVectorField) -> GVectorField:
    """Field on the chart target: x -> D psi(y) xi(y) with y = psi^{-1}(x)."""
    if chart.inverse is None:
        raise SymmetryError("transporting a field to the chart target needs the inverse")
    fwd, inv = chart.forward, chart.inverse

    def both(eps, X):
        Y = inv(eps, X)
        J = fwd.jacobian(eps, Y)
        v = xi(eps, Y)
        return np.einsum("nij,nj->ni", J, v), np.einsum("nij,nj->ni", np.abs(J), np.abs(v))

    comp = ProcGFunc(chart.target, fwd.dim_out, label=f"chart({xi.label})", scaled_fn=both)
    return GVectorField(comp, label=f"(psi^-1)*({xi.label})")


# ---------------------------------------------------------------------------
# systems


@dataclass
class AlgebraicSystem:
    """F(x) = 0 with a chart certifying maximal rank and a sampled solution family."""

    F: GFunc
    solutions: list[GPoint]
    chart: GChart | None = None
    rank: int | None = None
    label: str = "F"

    def __post_init__(self):
        if self.rank is None:
            self.rank = self.F.dim_out
        if self.rank != self.F.dim_out:
            raise SymmetryError(f"claimed rank {self.rank} differs from the number of equations {self.F.dim_out}")
        if self.F.dim_out > self.F.domain.dim:
            raise SymmetryError("more equations than unknowns: l must not exceed m")
        for x in self.solutions:
            if x.dim != self.F.domain.dim:
                raise SymmetryError(f"solution {x.label} has dimension {x.dim}, expected {self.F.domain.dim}")

    @property
    def m(self) -> int:
        return self.F.domain.dim

    @property
    def l(self) -> int:
        return self.F.dim_out

    def check_solutions(self, grid: EpsilonGrid = DEFAULT_GRID, policy: Policy = DEFAULT_POLICY) -> dict:
        """Each sampled point must satisfy F(x) = 0 in the generalized numbers."""
        rows = []
        for x in self.solutions:
            vs = [classify_order(n, grid, policy=policy) for n in value_at(self.F, x, grid)]
            rows.append({"point": x.label, "passed": all(v.negligible for v in vs), "verdicts": [v.as_dict() for v in vs]})
        return {"passed": all(r["passed"] for r in rows), "points": rows}

    def normal_form(self, grid: EpsilonGrid = DEFAULT_GRID, policy: Policy = DEFAULT_POLICY) -> dict:
        """F o psi^{-1} = pr on the chart's target boxes."""
        if self.chart is None or self.chart.inverse is None or not self.chart.target_boxes:
            return {"passed": False, "note": "no invertible chart with target boxes"}
        Ks = self.chart.target_boxes
        lhs = compose(self.F, self.chart.inverse, Ks, grid, policy)
        names = _names(self.m)
        pr = from_exprs(list(names[: self.l]), names, self.chart.target)
        ok, vs = equals_in_G(lhs, pr, Ks, grid, policy)
        return {"passed": ok, "verdicts": [v.as_dict() for v in vs]}


@dataclass
class SymmetryVerdict:
    direction: str
    hypothesis: dict
    criterion: dict
    transport: dict
    overall: bool
    agree: bool = True
    notes: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "direction": self.direction,
            "hypothesis": self.hypothesis,
            "criterion": self.criterion,
            "transport": self.transport,
            "agree": self.agree,
            "overall": self.overall,
            "notes": list(self.notes),
        }


def _floor_policy(policy: Policy, numeric: bool) -> Policy:
    if numeric and policy.atol < INTEGRATOR_FLOOR:
        return policy.with_atol(INTEGRATOR_FLOOR)
    return policy


def infinitesimal_criterion(
    sys: AlgebraicSystem, xi: GVectorField, grid: EpsilonGrid = DEFAULT_GRID, policy: Policy = DEFAULT_POLICY
) -> dict:
    """xi(F_nu) evaluated at every sampled solution; passes iff all are negligible."""
    if xi.dim != sys.m:
        raise SymmetryError("field dimension differs from the system's")
    pol = _floor_policy(policy, not sys.F.symbolic)
    xiF = xi.apply(sys.F)
    rows = []
    for x in sys.solutions:
        vs = [classify_order(n, grid, policy=pol) for n in value_at(xiF, x, grid)]
        rows.append({
            "point": x.label,
            "passed": all(v.negligible for v in vs),
            "verdicts": [v.as_dict() for v in vs],
            "max_residual": max(v.max_sample for v in vs),
        })
    return {"field": xi.label, "system": sys.label, "passed": all(r["passed"] for r in rows), "points": rows,
            "atol": pol.atol}


def transport_check(
    sys: AlgebraicSystem,
    Phi: GroupAction,
    eta_samples=(-1.0, -0.5, 0.5, 1.0),
    grid: EpsilonGrid = DEFAULT_GRID,
    policy: Policy = DEFAULT_POLICY,
) -> dict:
    """F(Phi(eta, x)) for each sampled solution x and each eta (classical or ScalarNet).

    Points whose transport escapes the integrator box or F's domain are skipped
    and flagged; a check with skipped points does not pass.
    """
    pol = _floor_policy(policy, Phi.provenance == "integrated" or not sys.F.symbolic)
    eps = grid.values
    starts = np.stack([x(eps) for x in sys.solutions], axis=1) if sys.solutions else np.zeros((len(eps), 0, sys.m))
    rows = []
    for eta in eta_samples:
        etas = np.array([eta_at(eta, float(e)) for e in eps])
        before = len(Phi.log.escapes)
        try:
            Y = Phi.batch(eps, etas, starts)
        except IntegrationError as err:
            rows.extend({"point": x.label, "eta": eta_label(eta), "passed": False, "escaped": True, "note": str(err)}
                        for x in sys.solutions)
            continue
        new = Phi.log.escapes[before:]
        for j, x in enumerate(sys.solutions):
            row = {"point": x.label, "eta": eta_label(eta)}
            y = Y[:, j, :]
            escaped = any(np.allclose(ev["x0"], starts[k, j]) and ev["eps"] == eps[k]
                          for ev in new for k in range(len(eps)))
            if not np.all(sys.F.domain.contains_points(y)):
                row.update(passed=False, escaped=True, note="transported point left the domain of F")
                rows.append(row)
                continue
            vals, scales = [], []
            for e, yy in zip(eps, y):
                v, s = sys.F.eval_scaled(float(e), yy[None, :])
                vals.append(v[0])
                scales.append(np.abs(v[0]) if s is None else s[0])
            vals, scales = np.array(vals), np.array(scales)
            vs = [classify_samples(eps, vals[:, k], grid, pol, pol.rtol * scales[:, k]) for k in range(sys.l)]
            ok = all(v.negligible for v in vs) and not escaped
            row.update(passed=ok, escaped=escaped, verdicts=[v.as_dict() for v in vs],
                       max_residual=max(v.max_sample for v in vs))
            rows.append(row)
    return {"action": Phi.label, "system": sys.label, "passed": all(r["passed"] for r in rows), "rows": rows,
            "escapes": sum(bool(r.get("escaped")) for r in rows), "atol": pol.atol}


def hypothesis_check(
    xbar: GVectorField,
    mode: str,
    grid: EpsilonGrid = DEFAULT_GRID,
    policy: Policy = DEFAULT_POLICY,
    boxes: Sequence[CompactBox] | None = None,
    radii: Sequence[float] = (1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0),
    resolution: int = 9,
) -> dict:
    """Sufficient conditions on the field in chart coordinates.

    ``linear_growth``: sup_{|x| <= R} |xbar_eps| / (1 + R) bounded in R and eps,
    sampled on expanding cubes [-R, R]^m (R measured as the cube's half-diagonal).
    ``box_logtype``: the target is a box and sup |D xbar_eps| / |log eps| stays
    bounded along the grid tail on ``boxes``.
    """
    m = xbar.dim
    if mode == "linear_growth":
        dom = xbar.domain
        if not (all(math.isinf(v) for v in dom.lo) and all(math.isinf(v) for v in dom.hi)):
            return {"mode": mode, "passed": False, "note": "linear growth needs the chart target to be all of R^m"}
        eps = grid.values
        ratios = np.empty((len(radii), len(eps)))
        for a, R in enumerate(radii):
            K = CompactBox([-R] * m, [R] * m, resolution)
            sups = sup_seminorm(xbar.components, K, 0, grid).sample(eps)
            ratios[a] = sups / (1.0 + R * math.sqrt(m))
        worst_R = ratios.max(axis=1)
        tail = max(3, len(radii) // 2)
        lr, lw = np.log(np.asarray(radii[-tail:])), np.log(np.maximum(worst_R[-tail:], 1e-300))
        slope_R = float(np.polyfit(lr, lw, 1)[0]) if np.all(worst_R[-tail:] > 0) else 0.0
        bounded_eps, slope_eps = _bounded_along_grid(ratios.max(axis=0), eps, policy)
        ok = bool(np.all(np.isfinite(ratios)) and slope_R <= GROWTH_SLOPE_TOL and bounded_eps)
        return {
            "mode": mode,
            "passed": ok,
            "C": float(ratios.max()) if np.all(np.isfinite(ratios)) else "inf",
            "radii": [float(r) for r in radii],
            "ratio_by_radius": worst_R.tolist(),
            "slope_in_R": slope_R,
            "bounded_in_eps": bool(bounded_eps),
            "slope_in_eps": slope_eps if math.isfinite(slope_eps) else str(slope_eps),
        }
    if mode == "box_logtype":
        boxes = list(boxes) if boxes else _default_boxes(m)
        diag = completeness_diagnostics(xbar, boxes, grid, policy)
        return {"mode": mode, "passed": bool(diag["log_type"]), "target_is_box": True,
                "boxes": [{k: r[k] for k in ("box", "log_type", "log_type_slope")} for r in diag["boxes"]]}
    raise SymmetryError(f"unknown hypothesis mode {mode!r}; use linear_growth or box_logtype")


def check_symmetry(
    sys: AlgebraicSystem,
    xi: GVectorField,
    Phi: GroupAction,
    eta_samples=(-1.0, -0.5, 0.5, 1.0),
    grid: EpsilonGrid = DEFAULT_GRID,
    policy: Policy = DEFAULT_POLICY,
    direction: str = "criterion=>symmetry",
    modes: Sequence[str] = ("linear_growth", "box_logtype"),
) -> SymmetryVerdict:
    """Run both sides of the algebraic symmetry theorem on the sampled family."""
    if direction not in ("criterion=>symmetry", "symmetry=>criterion"):
        raise SymmetryError(f"unknown direction {direction!r}")
    hyp = {}
    notes = []
    if sys.chart is not None and sys.chart.inverse is not None:
        xbar = chart_field(sys.chart, xi)
        for mode in modes:
            hyp[mode] = hypothesis_check(xbar, mode, grid, policy, boxes=sys.chart.target_boxes or None)
    else:
        notes.append("no invertible chart: hypotheses not checked")
    crit = infinitesimal_criterion(sys, xi, grid, policy)
    trans = transport_check(sys, Phi, eta_samples, grid, policy)
    any_hyp = any(h["passed"] for h in hyp.values())
    if direction == "criterion=>symmetry":
        overall = crit["passed"] and any_hyp and trans["passed"]
    else:
        overall = trans["passed"] and crit["passed"] and any_hyp
    return SymmetryVerdict(direction, hyp, crit, trans, bool(overall), crit["passed"] == trans["passed"], notes)
