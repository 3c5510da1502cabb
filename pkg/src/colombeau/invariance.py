"""Invariance of generalized functions under group actions, translations and rotations."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import expr as ex
from .flow import GroupAction, GVectorField, eta_at, eta_label
from .gfunc import (
    CompactBox,
    Domain,
    ExprGFunc,
    GFunc,
    GFuncError,
    ProcGFunc,
    is_negligible_on,
    value_at,
)
from .net import (
    DEFAULT_GRID,
    DEFAULT_POLICY,
    INTEGRATOR_FLOOR,
    EpsilonGrid,
    GPoint,
    Policy,
    ScalarNet,
    as_net,
    classify_samples,
    near_standard,
)

STANDARD_SHIFTS = (1.0, -1.0, 0.5, -0.5, 0.1, -0.1)
NET_SHIFTS = ("1+eps", "-0.5+eps^2", "1/abs(log(eps))")
NET_ANGLES = ("1/abs(log(eps))", "pi/4+eps", "1+eps^2")


class InvarianceError(Exception):
    pass


# ---------------------------------------------------------------------------
# generalized rotations


def _plane_rotation(n: int, i: int, j: int, theta: np.ndarray) -> np.ndarray:
    """(E, n, n) rotations by theta in the (i, j) plane."""
    theta = np.atleast_1d(theta)
    R = np.broadcast_to(np.eye(n), (len(theta), n, n)).copy()
    c, s = np.cos(theta), np.sin(theta)
    R[:, i, i] = c
    R[:, j, j] = c
    R[:, i, j] = -s
    R[:, j, i] = s
    return R


@dataclass
class GRotation:
    """Product of plane rotations, each with its own angle net."""

    n: int
    planes: list[tuple[int, int]]
    angles: list[ScalarNet]
    label: str = "A"
    verification: dict | None = None

    def matrix(self, eps) -> np.ndarray:
        """(n, n) for scalar eps, (E, n, n) for an array."""
        arr = np.atleast_1d(np.asarray(eps, dtype=float))
        M = np.broadcast_to(np.eye(self.n), (len(arr), self.n, self.n)).copy()
        for (i, j), a in zip(self.planes, self.angles):
            M = M @ _plane_rotation(self.n, i, j, a(arr))
        return M if np.ndim(eps) else M[0]

    def __call__(self, eps: float, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=float) @ self.matrix(float(eps)).T

    def orthogonality(self, grid: EpsilonGrid = DEFAULT_GRID, policy: Policy = DEFAULT_POLICY) -> dict:
        """A^T A - I and det A - 1, each classified entrywise with a rounding floor of n * rtol."""
        eps = grid.values
        M = self.matrix(eps)
        gram = np.einsum("eki,ekj->eij", M, M) - np.eye(self.n)
        det = np.linalg.det(M) - 1.0
        floor = np.full(len(eps), self.n * max(policy.rtol, 1e-15))
        v_gram = classify_samples(eps, np.abs(gram).max(axis=(1, 2)), grid, policy, floor)
        v_det = classify_samples(eps, det, grid, policy, floor)
        return {
            "passed": v_gram.negligible and v_det.negligible,
            "max_gram_residual": float(np.abs(gram).max()),
            "max_det_residual": float(np.abs(det).max()),
            "gram": v_gram.as_dict(),
            "det": v_det.as_dict(),
        }

    def limit(self, grid: EpsilonGrid = DEFAULT_GRID, tol: float = 1e-2) -> np.ndarray | None:
        """Near-standard limit of the matrix entries, or None."""
        entries = [ScalarNet(lambda e, i=i, j=j: self.matrix(e)[:, i, j], label=f"A[{i},{j}]")
                   for i in range(self.n) for j in range(self.n)]
        pt = GPoint(entries, [-1.0] * self.n**2, [1.0] * self.n**2, label=self.label)
        lim = near_standard(pt, grid, tol)
        return None if lim is None else lim.reshape(self.n, self.n)

    def describe(self) -> dict:
        return {"n": self.n, "planes": [list(p) for p in self.planes], "angles": [a.label for a in self.angles]}


def make_generalized_rotation(
    n: int,
    angle_nets: Sequence,
    planes: Sequence[tuple[int, int]] | None = None,
    grid: EpsilonGrid = DEFAULT_GRID,
    policy: Policy = DEFAULT_POLICY,
    label: str | None = None,
) -> GRotation:
    """Product of plane rotations; for n = 2 the single plane is (0, 1)."""
    if n < 2:
        raise InvarianceError("rotations need n >= 2")
    if planes is None:
        if n != 2:
            raise InvarianceError("planes must be given for n > 2")
        planes = [(0, 1)]
    planes = [tuple(int(v) for v in p) for p in planes]
    if len(planes) != len(angle_nets):
        raise InvarianceError("one angle net per plane factor is required")
    for i, j in planes:
        if not (0 <= i < n and 0 <= j < n and i != j):
            raise InvarianceError(f"bad plane ({i}, {j}) for n = {n}")
    angles = [as_net(a) for a in angle_nets]
    lab = label or "R[" + ", ".join(f"{p}:{a.label}" for p, a in zip(planes, angles)) + "]"
    rot = GRotation(n, planes, angles, lab)
    rot.verification = rot.orthogonality(grid, policy)
    return rot


def standard_rotations(n: int, fixed: int = 8, random: int = 5, seed: int = 0) -> list[GRotation]:
    """``fixed`` evenly spaced angles plus ``random`` seeded angles on every coordinate plane."""
    rng = np.random.default_rng(seed)
    out = []
    for i, j in itertools.combinations(range(n), 2):
        angles = [2 * math.pi * (k + 1) / (fixed + 1) for k in range(fixed)]
        angles += list(rng.uniform(0.0, 2 * math.pi, random))
        for t in angles:
            net = ScalarNet.constant(t)
            out.append(GRotation(n, [(i, j)], [net], f"R({i},{j}; {t:.6g})"))
    return out


# ---------------------------------------------------------------------------
# reports


@dataclass
class InvarianceReport:
    mode: str
    subverdicts: dict
    overall: bool
    agree: bool = True
    representative: dict | None = None
    diagnostics: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "mode": self.mode,
            "overall": self.overall,
            "agree": self.agree,
            "subverdicts": self.subverdicts,
            "representative": self.representative,
            "diagnostics": self.diagnostics,
        }


def _moved_residual(u: GFunc, T: Callable[[float, np.ndarray], np.ndarray], label: str) -> GFunc:
    """x -> u(T(x)) - u(x) with the magnitudes of both evaluations as scale."""

    def both(e, X):
        Y = T(e, X)
        if not np.all(u.domain.contains_points(Y)):
            raise GFuncError(f"{label}: moved points leave the domain of {u.label}")
        a, sa = u.eval_scaled(e, Y)
        b, sb = u.eval_scaled(e, X)
        sa = np.abs(a) if sa is None else sa
        sb = np.abs(b) if sb is None else sb
        return a - b, sa + sb

    return ProcGFunc(u.domain, u.dim_out, label=label, scaled_fn=both)


def _check(res: GFunc, Ks, grid, policy) -> dict:
    ok, vs = is_negligible_on(res, Ks, grid, policy)
    return {"label": res.label, "passed": ok, "max_residual": max(v.max_sample for v in vs),
            "verdicts": [v.as_dict() for v in vs]}


def _summary(rows: list[dict]) -> dict:
    return {"passed": all(r["passed"] for r in rows), "checks": rows}


def _box_notes(Ks) -> list[dict]:
    return [{"box": K.as_dict(), "contains_origin": bool(np.all(np.asarray(K.lo) <= 0) and np.all(np.asarray(K.hi) >= 0))}
            for K in Ks]


# ---------------------------------------------------------------------------
# general actions


def action_invariance(
    f: GFunc,
    Phi: GroupAction,
    Ks: Sequence[CompactBox],
    eta_samples=(-1.0, -0.5, 0.5, 1.0, "1+eps"),
    grid: EpsilonGrid = DEFAULT_GRID,
    policy: Policy = DEFAULT_POLICY,
) -> InvarianceReport:
    """f(Phi(eta, x)) - f(x) negligible on Ks for every eta (classical or net-valued)."""
    if Phi.domain.dim != f.domain.dim:
        raise InvarianceError("action and function live on different spaces")
    pol = policy.with_atol(max(policy.atol, INTEGRATOR_FLOOR)) if Phi.provenance == "integrated" else policy
    rows = []
    for eta in eta_samples:
        eta = as_net(eta) if isinstance(eta, str) else eta
        if not isinstance(eta, ScalarNet):
            Phi.check_eta(float(eta))
        T = lambda e, X, eta=eta: Phi(e, eta_at(eta, e), X)
        rows.append(dict(_check(_moved_residual(f, T, f"f(Phi({eta_label(eta)}, x)) - f(x)"), Ks, grid, pol),
                         eta=eta_label(eta)))
    sub = {"action": _summary(rows)}
    return InvarianceReport("action", sub, sub["action"]["passed"], diagnostics={"boxes": _box_notes(Ks),
                                                                                   "atol": pol.atol})


def infinitesimal_invariance(
    f: GFunc,
    xi: GVectorField,
    Ks: Sequence[CompactBox],
    grid: EpsilonGrid = DEFAULT_GRID,
    policy: Policy = DEFAULT_POLICY,
    flow: GroupAction | None = None,
    eta_samples=(-1.0, -0.5, 0.5, 1.0),
) -> InvarianceReport:
    """xi(f) = 0 in G on Ks; with ``flow`` also runs the action test and records agreement."""
    pol = policy if f.symbolic else policy.with_atol(max(policy.atol, INTEGRATOR_FLOOR))
    row = _check(xi.apply(f), Ks, grid, pol)
    sub = {"infinitesimal": _summary([row])}
    agree = True
    if flow is not None:
        act = action_invariance(f, flow, Ks, eta_samples, grid, policy)
        sub["action"] = act.subverdicts["action"]
        agree = sub["action"]["passed"] == row["passed"]
    overall = all(s["passed"] for s in sub.values())
    return InvarianceReport("infinitesimal", sub, overall, agree, diagnostics={"boxes": _box_notes(Ks)})


# ---------------------------------------------------------------------------
# translations


def _partial_gfunc(u: GFunc, axis: int) -> GFunc:
    alpha = [0] * u.domain.dim
    alpha[axis] = 1
    if isinstance(u, ExprGFunc):
        return ExprGFunc(u.domain, u.partial_exprs(alpha), u.names, label=f"d_{axis} {u.label}")
    return ProcGFunc(u.domain, u.dim_out, lambda e, X: u.partial(e, X, alpha, 1e-3), label=f"d_{axis} {u.label}")


def translation_invariance(
    u: GFunc,
    axis: int,
    Ks: Sequence[CompactBox],
    grid: EpsilonGrid = DEFAULT_GRID,
    policy: Policy = DEFAULT_POLICY,
    standard_shifts: Sequence[float] = STANDARD_SHIFTS,
    net_shifts: Sequence = NET_SHIFTS,
) -> InvarianceReport:
    """Three characterizations of invariance under x -> x + eta e_axis.

    ``standard``: classical shifts; ``generalized``: net-valued shifts;
    ``infinitesimal``: d_axis u = 0 in G.
    """
    n = u.domain.dim
    if not 0 <= axis < n:
        raise InvarianceError(f"axis {axis} outside 0..{n - 1}")
    e_i = np.zeros(n)
    e_i[axis] = 1.0

    def shift(eta):
        return lambda e, X: X + eta_at(eta, e) * e_i

    std = [dict(_check(_moved_residual(u, shift(t), f"u(x + {t} e_{axis}) - u(x)"), Ks, grid, policy), eta=float(t))
           for t in standard_shifts]
    gen = []
    for t in net_shifts:
        t = as_net(t)
        gen.append(dict(_check(_moved_residual(u, shift(t), f"u(x + [{t.label}] e_{axis}) - u(x)"), Ks, grid, policy),
                        eta=t.label))
    pol = policy if u.symbolic else policy.with_atol(max(policy.atol, INTEGRATOR_FLOOR))
    inf = [_check(_partial_gfunc(u, axis), Ks, grid, pol)]
    sub = {"standard": _summary(std), "generalized": _summary(gen), "infinitesimal": _summary(inf)}
    flags = [s["passed"] for s in sub.values()]
    return InvarianceReport("translation", sub, all(flags), len(set(flags)) == 1,
                            diagnostics={"axis": axis, "boxes": _box_notes(Ks)})


# ---------------------------------------------------------------------------
# rotations


def rotation_generators(n: int, names: Sequence[str] | None = None) -> list[GVectorField]:
    """x_i d_j - x_j d_i for i < j."""
    names = tuple(names) if names else tuple(f"x{k + 1}" for k in range(n))
    out = []
    for i, j in itertools.combinations(range(n), 2):
        comps = ["0"] * n
        comps[j] = names[i]
        comps[i] = f"-{names[j]}"
        out.append(GVectorField.from_exprs(comps, names, label=f"{names[i]} d_{names[j]} - {names[j]} d_{names[i]}"))
    return out


def polar_profile(
    u: GFunc,
    grid: EpsilonGrid = DEFAULT_GRID,
    radii: Sequence[float] = (0.25, 0.5, 1.0),
    eps_radii: Sequence[float] = (1.0, 2.0),
    n_theta: int = 128,
    policy: Policy = DEFAULT_POLICY,
) -> dict:
    """Angular oscillation of v_eps(theta) = u_eps(r cos theta, r sin theta) per radius.

    Fixed radii are used as given; ``eps_radii`` give radii c * eps.  A
    rotationally invariant net has a negligible oscillation at every radius.
    """
    if u.domain.dim != 2:
        raise InvarianceError("the polar profile is defined for n = 2")
    eps = grid.values
    theta = np.linspace(0.0, 2 * math.pi, n_theta, endpoint=False)
    circle = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    rows = []
    specs = [("fixed", r) for r in radii] + [("eps-scaled", c) for c in eps_radii]
    for kind, r in specs:
        osc, scale = [], []
        for e in eps:
            rr = r * e if kind == "eps-scaled" else r
            v, s = u.eval_scaled(float(e), rr * circle)
            s = np.abs(v) if s is None else s
            osc.append(float(np.ptp(v[:, 0])))
            scale.append(float(2 * np.max(s[:, 0])))
        verdict = classify_samples(eps, np.array(osc), grid, policy, policy.rtol * np.array(scale))
        rows.append({"radius": r, "kind": kind, "constant": verdict.negligible, "verdict": verdict.as_dict()})
    return {"profiles": rows, "all_constant": all(r["constant"] for r in rows), "n_theta": n_theta}


def angular_average(u: GFunc, n_angles: int = 64) -> GFunc:
    """Per-eps average of u over n_angles rotations (heuristic invariant representative, n = 2)."""
    if u.domain.dim != 2:
        raise InvarianceError("angular averaging is implemented for n = 2")
    theta = np.linspace(0.0, 2 * math.pi, n_angles, endpoint=False)
    Rs = _plane_rotation(2, 0, 1, theta)

    def both(e, X):
        vals, mags = [], []
        for R in Rs:
            v, s = u.eval_scaled(e, X @ R.T)
            vals.append(v)
            mags.append(np.abs(v) if s is None else s)
        return np.mean(vals, axis=0), np.mean(mags, axis=0)

    return ProcGFunc(u.domain, u.dim_out, label=f"avg({u.label})", scaled_fn=both)


def rotation_invariance(
    u: GFunc,
    Ks: Sequence[CompactBox],
    grid: EpsilonGrid = DEFAULT_GRID,
    policy: Policy = DEFAULT_POLICY,
    sampled_rotations: Sequence[GRotation] | None = None,
    seed: int = 0,
    fixed_angles: int = 8,
    random_angles: int = 5,
    diagnostics: bool = True,
) -> InvarianceReport:
    """Three characterizations of rotational invariance on R^n.

    ``standard``: classical rotations on every coordinate plane (fixed plus seeded
    angles); ``generalized``: rotations with net-valued angles; ``infinitesimal``:
    x_i d_j u - x_j d_i u = 0 in G for all i < j.
    """
    n = u.domain.dim
    if n < 2:
        raise InvarianceError("rotation invariance needs n >= 2")
    std_rots = standard_rotations(n, fixed_angles, random_angles, seed)
    std = [dict(_check(_moved_residual(u, R, f"u({R.label} x) - u(x)"), Ks, grid, policy), rotation=R.label)
           for R in std_rots]
    if sampled_rotations is None:
        sampled_rotations = [make_generalized_rotation(n, [a] * len(planes), planes, grid, policy)
                             for a in NET_ANGLES
                             for planes in [list(itertools.combinations(range(n), 2))]]
    gen = []
    for R in sampled_rotations:
        if R.n != n:
            raise InvarianceError(f"rotation {R.label} acts on R^{R.n}, function on R^{n}")
        gen.append(dict(_check(_moved_residual(u, R, f"u({R.label} x) - u(x)"), Ks, grid, policy), rotation=R.label,
                        orthogonal=None if R.verification is None else R.verification["passed"]))
    names = u.names if isinstance(u, ExprGFunc) else None
    pol = policy if u.symbolic else policy.with_atol(max(policy.atol, INTEGRATOR_FLOOR))
    inf = [dict(_check(g.apply(u), Ks, grid, pol), generator=g.label) for g in rotation_generators(n, names)]
    sub = {"standard": _summary(std), "generalized": _summary(gen), "infinitesimal": _summary(inf)}
    flags = [s["passed"] for s in sub.values()]
    diag = {"seed": seed, "fixed_angles": fixed_angles, "random_angles": random_angles, "boxes": _box_notes(Ks)}
    rep = None
    if diagnostics and n == 2:
        diag["polar_profile"] = polar_profile(u, grid, policy=policy)
        avg = angular_average(u)
        ok, vs = is_negligible_on(avg - u, Ks, grid, policy)
        rep = {"method": "angular average over 64 rotations per eps (heuristic)", "equals_u": ok,
               "verdicts": [v.as_dict() for v in vs]}
    return InvarianceReport("rotation", sub, all(flags), len(set(flags)) == 1, rep, diag)
