"""Generalized vector fields, their per-eps flows, and group-action checks."""
from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import expr as ex
from .chart import GChart
from .gfunc import (
    CompactBox,
    Domain,
    ExprGFunc,
    GFunc,
    GFuncDomainError,
    GFuncError,
    ProcGFunc,
    equals_in_G,
    fd_weights,
    from_exprs,
    is_negligible_on,
    sup_seminorm,
)
from .net import (
    DEFAULT_GRID,
    DEFAULT_POLICY,
    INTEGRATOR_FLOOR,
    EpsilonGrid,
    NotStrictlyNonzeroError,
    Policy,
    ScalarNet,
    as_net,
    classify_samples,
    is_strictly_nonzero,
)


class FlowError(Exception):
    pass


class IntegrationError(FlowError):
    def __init__(self, message, eps=None, x=None, eta=None):
        super().__init__(f"{message} (eps={eps!r}, x={None if x is None else np.asarray(x).tolist()!r}, eta={eta!r})")
        self.eps, self.x, self.eta = eps, x, eta


class ActionRangeError(FlowError):
    pass


class SingularJacobianError(FlowError):
    def __init__(self, message, eps=None, x=None):
        super().__init__(f"{message} (eps={eps!r}, x={None if x is None else np.asarray(x).tolist()!r})")
        self.eps, self.x = eps, x


def eta_at(eta, eps: float) -> float:
    """Classical eta or a ScalarNet-valued one, evaluated at eps."""
    return float(eta(eps)) if isinstance(eta, ScalarNet) else float(eta)


def eta_label(eta) -> str:
    return eta.label if isinstance(eta, ScalarNet) else repr(float(eta))


# ---------------------------------------------------------------------------
# vector fields


class GVectorField:
    """Net of vector fields xi_eps = sum_i xi_i d/dx_i on a box."""

    def __init__(self, components: GFunc, label: str | None = None):
        if components.dim_out != components.domain.dim:
            raise FlowError("a vector field needs one component per coordinate")
        self.components = components
        self.domain = components.domain
        self.label = label or components.label

    @classmethod
    def from_exprs(cls, exprs: Sequence[str | ex.Expr], names: Sequence[str], domain: Domain | None = None, label=None):
        return cls(from_exprs(exprs, names, domain), label)

    @property
    def dim(self) -> int:
        return self.domain.dim

    def __call__(self, eps, X):
        return self.components(eps, X)

    def jacobian(self, eps, X, h: float = 1e-3):
        return self.components.jacobian(eps, X, h)

    def apply(self, f: GFunc, h: float = 1e-3) -> GFunc:
        """Lie derivative xi(f) = sum_i xi_i d_i f, carrying the term magnitudes as scale."""
        if f.domain.dim != self.dim:
            raise FlowError(f"{f.label} and {self.label} live on different dimensions")

        def terms(eps, X):
            xi = self.components(eps, X)  # (N, m)
            J = f.jacobian(eps, X, h)  # (N, l, m)
            return xi[:, None, :] * J

        fn = lambda e, X: terms(e, X).sum(axis=-1)
        sc = lambda e, X: np.abs(terms(e, X)).sum(axis=-1)
        partial_fn = None
        if isinstance(f, ExprGFunc) and isinstance(self.components, ExprGFunc) and f.names == self.components.names:
            sym = ExprGFunc(
                f.domain,
                [
                    _sum([ex.mul(xi, ex.differentiate(fe, n)) for xi, n in zip(self.components.exprs, f.names)])
                    for fe in f.exprs
                ],
                f.names,
            )
            partial_fn = lambda e, X, a, hh: sym.partial(e, X, a, hh)
        return ProcGFunc(f.domain, f.dim_out, fn, label=f"{self.label}({f.label})", scale_fn=sc, partial_fn=partial_fn)

    def scaled(self, a) -> "GVectorField":
        a = as_net(a)
        c = self.components
        return GVectorField(
            ProcGFunc(self.domain, self.dim, lambda e, X: a(e) * c(e, X), label=f"{a.label}*{c.label}",
                      partial_fn=lambda e, X, al, h: a(e) * c.partial(e, X, al, h)),
            label=f"{a.label}*({self.label})",
        )

    def __add__(self, other: "GVectorField") -> "GVectorField":
        c1, c2 = self.components, other.components
        return GVectorField(
            ProcGFunc(self.domain, self.dim, lambda e, X: c1(e, X) + c2(e, X), label=f"{c1.label}+{c2.label}",
                      partial_fn=lambda e, X, a, h: c1.partial(e, X, a, h) + c2.partial(e, X, a, h)),
            label=f"({self.label} + {other.label})",
        )

    def __repr__(self):
        return f"GVectorField({self.label})"


def _sum(items):
    out = ex.ZERO
    for t in items:
        out = ex.add(out, t)
    return out


# ---------------------------------------------------------------------------
# group actions


@dataclass
class FlowConfig:
    steps_per_unit: int = 256
    escape_box: CompactBox | None = None
    grid: EpsilonGrid = DEFAULT_GRID

    def __post_init__(self):
        if self.steps_per_unit <= 0:
            raise FlowError("steps_per_unit must be positive")


@dataclass
class IntegratorLog:
    calls: int = 0
    steps: int = 0
    escapes: list = field(default_factory=list)
    max_escapes: int = 200

    def record_escape(self, eps, x0, eta):
        if len(self.escapes) < self.max_escapes:
            self.escapes.append({"eps": float(eps), "x0": [float(v) for v in x0], "eta": float(eta)})

    def as_dict(self) -> dict:
        return {"calls": self.calls, "steps": self.steps, "escape_events": len(self.escapes), "escapes": self.escapes[:10]}


class GroupAction:
    """Net of maps Phi_eps(eta, x) on a box, valid for eta in ``eta_range``."""

    def __init__(
        self,
        domain: Domain,
        fn: Callable[[float, float, np.ndarray], np.ndarray],
        eta_range: tuple[float, float] = (-math.inf, math.inf),
        provenance: str = "closed-form",
        label: str = "Phi",
        eta_step: float = 1e-3,
        log: IntegratorLog | None = None,
    ):
        self.domain = domain
        self._fn = fn
        self.eta_range = (float(eta_range[0]), float(eta_range[1]))
        self.provenance = provenance
        self.label = label
        self.eta_step = eta_step
        self.log = log or IntegratorLog()
        self._batch: Callable | None = None

    @classmethod
    def from_exprs(cls, exprs, names: Sequence[str], eta_name: str = "eta", domain: Domain | None = None,
                   eta_range=(-math.inf, math.inf), label=None):
        """Closed-form action; ``exprs`` use ``names`` plus the group parameter ``eta_name``."""
        names = tuple(names)
        domain = domain or Domain.whole(len(names))
        table = names + (eta_name,)
        parsed = [ex.parse(e, table) if isinstance(e, str) else e for e in exprs]
        if len(parsed) != len(names):
            raise FlowError("a group action needs one expression per coordinate")

        def fn(eps, eta, X):
            Y = np.concatenate([X, np.full((len(X), 1), eta)], axis=1)
            return np.stack([ex.eval_points(e, eps, Y, table) for e in parsed], axis=-1)

        act = cls(domain, fn, eta_range, "closed-form", label or "[" + ", ".join(ex.to_text(e) for e in parsed) + "]")
        act.exprs = parsed
        act.names = names
        act.eta_name = eta_name
        return act

    def check_eta(self, eta: float):
        lo, hi = self.eta_range
        if not lo <= eta <= hi:
            raise ActionRangeError(f"eta={eta} outside the validity range [{lo}, {hi}] of {self.label}")

    def __call__(self, eps: float, eta, X: np.ndarray) -> np.ndarray:
        e = eta_at(eta, eps)
        self.check_eta(e)
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.asarray(self._fn(float(eps), e, X), dtype=float).reshape(X.shape)

    def batch(self, eps: np.ndarray, etas: np.ndarray, X: np.ndarray) -> np.ndarray:
        """Phi_{eps[e]}(etas[e], X[e]) for X of shape (E, N, m)."""
        eps = np.asarray(eps, dtype=float)
        etas = np.asarray(etas, dtype=float)
        for t in np.unique(etas):
            self.check_eta(float(t))
        X = np.asarray(X, dtype=float)
        if self._batch is not None:
            return np.asarray(self._batch(eps, etas, X), dtype=float).reshape(X.shape)
        return np.stack([self(float(e), float(t), Xe) for e, t, Xe in zip(eps, etas, X)])

    def eta_derivative(self, eps: float, eta: float, X: np.ndarray) -> np.ndarray:
        """d/deta Phi by a five-point central stencil."""
        offs, w = fd_weights(1, 4)
        d = self.eta_step
        return sum(wi * self(eps, eta + o * d, X) for o, wi in zip(offs, w) if wi != 0.0) / d

    def as_gfunc(self) -> GFunc:
        """Phi as a generalized map on R x M (first coordinate is eta)."""
        # the closed validity range must sit inside the open domain
        lo = (self.eta_range[0] - 1e-9,) + self.domain.lo
        hi = (self.eta_range[1] + 1e-9,) + self.domain.hi
        dom = Domain(lo, hi)

        def fn(eps, Z):
            out = np.empty((len(Z), self.domain.dim))
            for eta in np.unique(Z[:, 0]):
                rows = Z[:, 0] == eta
                out[rows] = self(eps, float(eta), Z[rows, 1:])
            return out

        return ProcGFunc(dom, self.domain.dim, fn, label=f"{self.label}(eta, x)")

    def trajectory(self, eps: float, X0: np.ndarray, etas: Sequence[float]) -> np.ndarray:
        return np.stack([self(eps, float(t), X0) for t in etas])

    def __repr__(self):
        return f"GroupAction({self.label}, {self.provenance})"


def identity_action(domain: Domain) -> GroupAction:
    return GroupAction(domain, lambda eps, eta, X: np.array(X, dtype=float), label="id")


def _rk4(field: GVectorField, eps: float, X: np.ndarray, eta: float, n_steps: int, box, log: IntegratorLog):
    h = eta / n_steps
    Y = np.array(X, dtype=float)
    escaped = np.zeros(len(Y), dtype=bool)
    lo = hi = None
    if box is not None:
        lo, hi = np.asarray(box.lo), np.asarray(box.hi)
    for step in range(n_steps):
        try:
            k1 = field(eps, Y)
            k2 = field(eps, Y + 0.5 * h * k1)
            k3 = field(eps, Y + 0.5 * h * k2)
            k4 = field(eps, Y + h * k3)
        except (GFuncDomainError, ex.ExprDomainError) as err:
            raise IntegrationError(f"field evaluation failed: {err}", eps, X[0], (step + 1) * h) from None
        Y = Y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(Y)):
            bad = np.argwhere(~np.all(np.isfinite(Y), axis=1))[0][0]
            raise IntegrationError("trajectory blew up", eps, X[bad], (step + 1) * h)
        if lo is not None:
            out = np.any((Y < lo) | (Y > hi), axis=1) & ~escaped
            for i in np.flatnonzero(out):
                log.record_escape(eps, X[i], (step + 1) * h)
            escaped |= out
    log.steps += n_steps
    return Y


def _rk4_batch(field: GVectorField, eps: np.ndarray, X: np.ndarray, etas: np.ndarray, n_steps: int, box,
               log: IntegratorLog):
    """RK4 for all eps at once: X has shape (E, N, m), step etas[e] / n_steps per slice."""
    h = (etas / n_steps)[:, None, None]
    Y = np.array(X, dtype=float)
    comp = field.components
    escaped = np.zeros(Y.shape[:2], dtype=bool)
    for step in range(n_steps):
        try:
            k1 = comp.eval_many(eps, Y)
            k2 = comp.eval_many(eps, Y + 0.5 * h * k1)
            k3 = comp.eval_many(eps, Y + 0.5 * h * k2)
            k4 = comp.eval_many(eps, Y + h * k3)
        except (GFuncDomainError, ex.ExprDomainError) as err:
            raise IntegrationError(f"field evaluation failed: {err}") from None
        Y = Y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(Y)):
            e, i = np.argwhere(~np.all(np.isfinite(Y), axis=-1))[0]
            raise IntegrationError("trajectory blew up", eps[e], X[e, i], (step + 1) * float(h[e, 0, 0]))
        if box is not None:
            out = np.any((Y < np.asarray(box.lo)) | (Y > np.asarray(box.hi)), axis=-1) & ~escaped
            for e, i in np.argwhere(out):
                log.record_escape(eps[e], X[e, i], (step + 1) * float(h[e, 0, 0]))
            escaped |= out
    log.steps += n_steps
    return Y


_CACHE_SIZE = 4096


def integrate_flow(xi: GVectorField, cfg: FlowConfig | None = None, eta_range=(-2.0, 2.0)) -> GroupAction:
    """Per-eps flow of xi by classical RK4 with ``cfg.steps_per_unit`` steps per unit eta.

    Phi(0, .) is the identity exactly (zero steps).  Exits from the escape box
    are logged, not fatal.
    """
    cfg = cfg or FlowConfig()
    lo, hi = float(eta_range[0]), float(eta_range[1])
    if not (math.isfinite(lo) and math.isfinite(hi) and lo <= 0.0 <= hi):
        raise FlowError(f"eta range must be a finite interval containing 0, got {eta_range}")
    log = IntegratorLog()
    cache: OrderedDict = OrderedDict()
    eps_free = xi.components.eps_free

    def fn(eps, eta, X):
        log.calls += 1
        if eta == 0.0:
            return np.array(X, dtype=float)
        # an eps-independent field has the same flow for every eps
        key = (None if eps_free else eps, eta, X.shape, X.tobytes())
        hit = cache.get(key)
        if hit is not None:
            cache.move_to_end(key)
            return hit.copy()
        n = max(1, int(math.ceil(abs(eta) * cfg.steps_per_unit - 1e-9)))
        out = _rk4(xi, eps, X, eta, n, cfg.escape_box, log)
        cache[key] = out
        if len(cache) > _CACHE_SIZE:
            cache.popitem(last=False)
        return out.copy()

    def batch(eps, etas, X):
        log.calls += 1
        n = max(1, int(math.ceil(float(np.max(np.abs(etas))) * cfg.steps_per_unit - 1e-9)))
        return _rk4_batch(xi, eps, X, etas, n, cfg.escape_box, log)

    act = GroupAction(xi.domain, fn, (lo, hi), "integrated", label=f"flow({xi.label})",
                      eta_step=4.0 / cfg.steps_per_unit, log=log)
    act._batch = batch
    act.field = xi
    act.config = cfg
    return act


# ---------------------------------------------------------------------------
# checks


def _policy_for(action: GroupAction, policy: Policy) -> Policy:
    if action.provenance == "integrated" and policy.atol < INTEGRATOR_FLOOR:
        return policy.with_atol(INTEGRATOR_FLOOR)
    return policy


def _pairs(eta_samples):
    """Accept a list of (eta1, eta2) pairs or a flat list (all ordered pairs are used)."""
    eta_samples = list(eta_samples)
    if eta_samples and isinstance(eta_samples[0], (tuple, list)):
        return [tuple(p) for p in eta_samples]
    return [(a, b) for a in eta_samples for b in eta_samples]


def _residual(domain, dim, fn, label):
    """GFunc a - b for ``fn(e, X) -> (a, b)``, scale |a| + |b|."""

    def both(e, X):
        a, b = fn(e, X)
        return a - b, np.abs(a) + np.abs(b)

    return ProcGFunc(domain, dim, label=label, scaled_fn=both)


def verify_group_action(
    Phi: GroupAction,
    Ks: Sequence[CompactBox],
    grid: EpsilonGrid = DEFAULT_GRID,
    eta_samples=(-1.0, -0.5, 0.5, 1.0),
    policy: Policy = DEFAULT_POLICY,
) -> dict:
    """Identity and composition laws, each tested as a negligible residual on Ks."""
    pol = _policy_for(Phi, policy)
    m = Phi.domain.dim
    r0 = _residual(Phi.domain, m, lambda e, X: (Phi(e, 0.0, X), X), "Phi(0,x) - x")
    ok0, v0 = is_negligible_on(r0, Ks, grid, pol)
    comp = []
    ok2 = True
    for a, b in _pairs(eta_samples):
        for t in (a, b):
            if not isinstance(t, ScalarNet):
                Phi.check_eta(float(t))
        if not isinstance(a, ScalarNet) and not isinstance(b, ScalarNet):
            Phi.check_eta(float(a) + float(b))

        def both(e, X, a=a, b=b):
            ea, eb = eta_at(a, e), eta_at(b, e)
            return Phi(e, ea + eb, X), Phi(e, ea, Phi(e, eb, X))

        r = _residual(Phi.domain, m, both, f"Phi({eta_label(a)}+{eta_label(b)}) - Phi({eta_label(a)})Phi({eta_label(b)})")
        ok, vs = is_negligible_on(r, Ks, grid, pol)
        ok2 &= ok
        comp.append({"eta1": eta_label(a), "eta2": eta_label(b), "passed": ok, "verdicts": [v.as_dict() for v in vs],
                     "max_residual": _max_residual(vs)})
    return {
        "action": Phi.label,
        "provenance": Phi.provenance,
        "identity": {"passed": ok0, "verdicts": [v.as_dict() for v in v0], "max_residual": _max_residual(v0)},
        "composition": comp,
        "floor": pol.atol,
        "passed": bool(ok0 and ok2),
    }


def _max_residual(verdicts) -> float:
    return max((v.max_sample for v in verdicts), default=0.0)


def generator_residual(
    Phi: GroupAction,
    xi: GVectorField,
    Ks: Sequence[CompactBox],
    grid: EpsilonGrid = DEFAULT_GRID,
    eta_samples=(-1.0, -0.5, 0.0, 0.5, 1.0),
    policy: Policy = DEFAULT_POLICY,
) -> dict:
    """dPhi/deta - xi(Phi) on Ks x eta samples; numeric eta-derivative, so the 1e-7 floor applies."""
    pol = policy if policy.atol >= INTEGRATOR_FLOOR else policy.with_atol(INTEGRATOR_FLOOR)
    rows = []
    ok_all = True
    for eta in eta_samples:
        def pair(e, X, eta=eta):
            t = eta_at(eta, e)
            return Phi.eta_derivative(e, t, X), xi(e, Phi(e, t, X))

        r = _residual(Phi.domain, Phi.domain.dim, pair, f"dPhi/deta - xi(Phi) at eta={eta_label(eta)}")
        ok, vs = is_negligible_on(r, Ks, grid, pol)
        ok_all &= ok
        rows.append({"eta": eta_label(eta), "passed": ok, "max_residual": _max_residual(vs),
                     "verdicts": [v.as_dict() for v in vs]})
    return {"action": Phi.label, "field": xi.label, "rows": rows, "floor": pol.atol, "passed": bool(ok_all),
            "max_residual": max(r["max_residual"] for r in rows) if rows else 0.0}


# ---------------------------------------------------------------------------
# pullbacks


def pullback_field(psi: GChart, xi: GVectorField) -> GVectorField:
    """psi^* xi = (D psi)^{-1} . (xi o psi), per eps."""
    fwd = psi.forward
    if xi.dim != fwd.dim_out:
        raise FlowError("field and chart target dimensions differ")

    def both(eps, X):
        J = fwd.jacobian(eps, X)
        v = xi(eps, fwd(eps, X))
        det = np.linalg.det(J)
        size = np.maximum(1.0, np.abs(J).max(axis=(1, 2))) ** J.shape[-1]
        bad = np.flatnonzero(~np.isfinite(det) | (np.abs(det) <= 1e-14 * size))
        if len(bad):
            raise SingularJacobianError("chart Jacobian is singular", eps, X[bad[0]])
        Jinv = np.linalg.inv(J)
        out = np.einsum("nij,nj->ni", Jinv, v)
        return out, np.einsum("nij,nj->ni", np.abs(Jinv), np.abs(v))

    comp = ProcGFunc(psi.source, xi.dim, label=f"pullback({xi.label})", scaled_fn=both,
                     eps_free=fwd.eps_free and xi.components.eps_free)
    return GVectorField(comp, label=f"psi*({xi.label})")


def pullback_action(psi: GChart, Phi: GroupAction) -> GroupAction:
    """x -> psi^{-1}(Phi(eta, psi(x)))."""
    if psi.inverse is None:
        raise FlowError("pulling back an action needs the chart inverse")

    def fn(eps, eta, X):
        return psi.inverse(eps, Phi(eps, eta, psi.forward(eps, X)))

    return GroupAction(psi.source, fn, Phi.eta_range, Phi.provenance, label=f"psi*({Phi.label})", eta_step=Phi.eta_step,
                       log=Phi.log)


def _net_expr(a: ScalarNet):
    return getattr(a, "expr", None)


def polar_chart(a) -> GChart:
    """(r, theta) -> (r cos(a theta), r sin(a theta)); expression-backed when ``a`` is."""
    a = as_net(a)
    source = Domain([0.0, 0.0], [math.inf, 2 * math.pi])
    target = Domain.whole(2)
    names = ("r", "theta")
    ae = _net_expr(a)
    if ae is not None:
        r, th = ex.Sym("r"), ex.Sym("theta")
        arg = ex.mul(ae, th)
        fwd = ExprGFunc(source, [ex.mul(r, ex.call("cos", arg)), ex.mul(r, ex.call("sin", arg))], names,
                        label=f"polar[{a.label}]")
    else:
        def fn(eps, X):
            av = a(eps)
            return np.stack([X[:, 0] * np.cos(av * X[:, 1]), X[:, 0] * np.sin(av * X[:, 1])], axis=1)

        fwd = ProcGFunc(source, 2, fn, label=f"polar[{a.label}]")
    return GChart(fwd, None, source, target, tag="polar",
                  note="angle scaling by a may wrap past 2*pi; only the forward net is used")


def straighten_polar(
    a,
    Ks: Sequence[CompactBox] = (CompactBox([0.5, 0.5], [2.0, 5.0]),),
    grid: EpsilonGrid = DEFAULT_GRID,
    policy: Policy = DEFAULT_POLICY,
    clockwise: bool = True,
) -> tuple[GChart, dict]:
    """Pull back xi = a (y d_x - x d_y) (or its counterclockwise negative) under the polar chart.

    With ``clockwise=True`` the pulled-back field is -d_theta; with ``clockwise=False``
    the field a (x d_y - y d_x) straightens to +d_theta.  Both comparisons are reported.
    """
    a = as_net(a)
    if not is_strictly_nonzero(a, grid, policy):
        raise NotStrictlyNonzeroError(f"{a.label} is not strictly nonzero; polar straightening refused")
    psi = polar_chart(a)
    names = ("x", "y")
    base = ["y", "-x"] if clockwise else ["-y", "x"]
    xi = GVectorField.from_exprs(base, names).scaled(a)
    pulled = pullback_field(psi, xi)
    src = psi.source
    d_theta = from_exprs(["0", "1"], ("r", "theta"), src)
    minus_d_theta = from_exprs(["0", "-1"], ("r", "theta"), src)
    pol = policy if psi.forward.symbolic else policy.with_atol(max(policy.atol, INTEGRATOR_FLOOR))
    ok_plus, v_plus = equals_in_G(pulled.components, d_theta, Ks, grid, pol)
    ok_minus, v_minus = equals_in_G(pulled.components, minus_d_theta, Ks, grid, pol)
    expected_plus = not clockwise
    report = {
        "a": a.label,
        "field": ("a*(y*d_x - x*d_y)" if clockwise else "a*(x*d_y - y*d_x)"),
        "equals_d_theta": ok_plus,
        "equals_minus_d_theta": ok_minus,
        "expected": "d_theta" if expected_plus else "-d_theta",
        "verdicts_d_theta": [v.as_dict() for v in v_plus],
        "verdicts_minus_d_theta": [v.as_dict() for v in v_minus],
        "passed": ok_plus if expected_plus else ok_minus,
    }
    return psi, report


# ---------------------------------------------------------------------------
# completeness diagnostics


def _bounded_along_grid(samples: np.ndarray, eps: np.ndarray, policy: Policy) -> tuple[bool, float]:
    half = len(eps) // 2
    s = np.abs(samples[half:])
    if np.any(~np.isfinite(s)):
        return False, -math.inf
    nz = s > 0
    if np.sum(nz) < 2:
        return True, math.inf
    slope = float(np.polyfit(np.log(eps[half:][nz]), np.log(s[nz]), 1)[0])
    return slope >= -policy.slope_tol, slope


def completeness_diagnostics(
    xi: GVectorField, Ks: Sequence[CompactBox], grid: EpsilonGrid = DEFAULT_GRID, policy: Policy = DEFAULT_POLICY
) -> dict:
    """Numerical evidence for the sufficient completeness conditions.

    ``global_bound``: sup |xi_eps| stays bounded along the grid;
    ``log_type``: sup |D xi_eps| / |log eps| stays bounded along the grid.
    """
    eps = grid.values
    rows = []
    gb_all = lt_all = True
    for K in Ks:
        s0 = sup_seminorm(xi.components, K, 0, grid).sample(eps)
        s1 = sup_seminorm(xi.components, K, 1, grid).sample(eps)
        gb, gslope = _bounded_along_grid(s0, eps, policy)
        lt, lslope = _bounded_along_grid(s1 / np.abs(np.log(eps)), eps, policy)
        db, dslope = _bounded_along_grid(s1, eps, policy)
        gb_all &= gb
        lt_all &= lt
        rows.append({
            "box": K.as_dict(),
            "sup_field": s0.tolist(),
            "sup_derivative": s1.tolist(),
            "global_bound": gb,
            "global_bound_slope": _fin(gslope),
            "log_type": lt,
            "log_type_slope": _fin(lslope),
            "derivative_bounded": db,
        })
    return {"field": xi.label, "global_bound": gb_all, "log_type": lt_all, "boxes": rows,
            "grid": grid.as_dict(), "slope_tol": policy.slope_tol}


def _fin(x):
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")
