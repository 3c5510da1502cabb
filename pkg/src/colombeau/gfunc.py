"""Generalized functions on open boxes.

A :class:`GFunc` is a net of smooth maps ``u_eps: M -> R^l``.  Suprema over
compact boxes are taken on a uniform lattice, optionally augmented by
eps-scaled "zoom" lattices around declared centers so that nets whose
support shrinks with eps (``phi(x/eps)``) stay visible to the sup.

Residual objects (differences, Lie derivatives, ...) carry a pointwise
``scale``: the sum of magnitudes of the terms that cancelled.  A residual
sample smaller than ``rtol * scale`` is below double-precision resolution
and is counted as zero.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import expr as ex
from .net import (
    DEFAULT_GRID,
    DEFAULT_POLICY,
    AsymptoticVerdict,
    EpsilonGrid,
    EpsSet,
    GPoint,
    NetError,
    Policy,
    ScalarNet,
    classify_samples,
)


class GFuncError(Exception):
    pass


class CBoundednessError(GFuncError):
    pass


class GFuncDomainError(GFuncError, ArithmeticError):
    def __init__(self, message: str, eps: float | None = None, x=None):
        where = ""
        if eps is not None:
            where = f" (eps={eps!r}" + (f", x={np.asarray(x).tolist()!r}" if x is not None else "") + ")"
        super().__init__(message + where)
        self.eps = eps
        self.x = x


# ---------------------------------------------------------------------------
# domains and compact boxes


@dataclass(frozen=True)
class Domain:
    """Product of open intervals; endpoints may be infinite."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __init__(self, lo: Sequence[float], hi: Sequence[float]):
        lo = tuple(float(v) for v in lo)
        hi = tuple(float(v) for v in hi)
        if len(lo) != len(hi) or not lo:
            raise GFuncError("domain bounds must be nonempty and of equal length")
        if any(a >= b for a, b in zip(lo, hi)):
            raise GFuncError(f"empty domain {lo} x {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def whole(cls, dim: int) -> "Domain":
        return cls([-math.inf] * dim, [math.inf] * dim)

    @property
    def dim(self) -> int:
        return len(self.lo)

    def contains_closed(self, lo, hi) -> bool:
        """Is the closed box [lo, hi] inside this open box?"""
        return bool(np.all(np.asarray(lo) > np.asarray(self.lo)) and np.all(np.asarray(hi) < np.asarray(self.hi)))

    def contains_points(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X)
        return np.all((X > np.asarray(self.lo)) & (X < np.asarray(self.hi)), axis=-1)

    def as_dict(self) -> dict:
        return {"lo": [_enc(v) for v in self.lo], "hi": [_enc(v) for v in self.hi]}


def _enc(v: float):
    return v if math.isfinite(v) else ("inf" if v > 0 else "-inf")


@dataclass(frozen=True)
class CompactBox:
    lo: tuple[float, ...]
    hi: tuple[float, ...]
    resolution: int = 33
    zoom: tuple[tuple[float, ...], ...] = ()
    zoom_radius: float = 2.0
    zoom_resolution: int = 17

    def __init__(self, lo, hi, resolution: int = 33, zoom=(), zoom_radius: float = 2.0, zoom_resolution: int = 17):
        lo = tuple(float(v) for v in np.atleast_1d(lo))
        hi = tuple(float(v) for v in np.atleast_1d(hi))
        if len(lo) != len(hi):
            raise GFuncError("box bounds disagree in dimension")
        if any(not (math.isfinite(a) and math.isfinite(b)) or a > b for a, b in zip(lo, hi)):
            raise GFuncError(f"compact box needs finite ordered bounds, got {lo} x {hi}")
        zoom = tuple(tuple(float(c) for c in z) for z in zoom)
        if any(len(z) != len(lo) for z in zoom):
            raise GFuncError("zoom centers must match the box dimension")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "resolution", int(resolution))
        object.__setattr__(self, "zoom", zoom)
        object.__setattr__(self, "zoom_radius", float(zoom_radius))
        object.__setattr__(self, "zoom_resolution", int(zoom_resolution))

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def spacing(self) -> float:
        widths = np.asarray(self.hi) - np.asarray(self.lo)
        return float(np.max(widths) / max(self.resolution - 1, 1))

    def refined(self, factor: int = 2) -> "CompactBox":
        return CompactBox(
            self.lo,
            self.hi,
            (self.resolution - 1) * factor + 1,
            self.zoom,
            self.zoom_radius,
            (self.zoom_resolution - 1) * factor + 1,
        )

    def lattice(self, eps: float | None = None) -> np.ndarray:
        pts = _lattice(self.lo, self.hi, self.resolution)
        if eps is None or not self.zoom:
            return pts
        ref = _lattice((-self.zoom_radius,) * self.dim, (self.zoom_radius,) * self.dim, self.zoom_resolution)
        extra = np.concatenate([np.asarray(c) + eps * ref for c in self.zoom])
        inside = np.all((extra >= np.asarray(self.lo)) & (extra <= np.asarray(self.hi)), axis=1)
        return np.concatenate([pts, extra[inside]])

    def contains(self, other: "CompactBox") -> bool:
        return bool(np.all(np.asarray(other.lo) >= self.lo) and np.all(np.asarray(other.hi) <= self.hi))

    def as_dict(self) -> dict:
        d = {"lo": list(self.lo), "hi": list(self.hi), "resolution": self.resolution}
        if self.zoom:
            d["zoom"] = [list(z) for z in self.zoom]
            d["zoom_radius"] = self.zoom_radius
            d["zoom_resolution"] = self.zoom_resolution
        return d


@lru_cache(maxsize=256)
def _lattice(lo, hi, n) -> np.ndarray:
    axes = [np.linspace(a, b, n) if b > a else np.array([a]) for a, b in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    out = np.stack([m.reshape(-1) for m in mesh], axis=1)
    out.setflags(write=False)
    return out


# ---------------------------------------------------------------------------
# finite differences


@lru_cache(maxsize=64)
def fd_weights(order: int, accuracy: int = 4) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference offsets and weights for the ``order``-th derivative."""
    if order == 0:
        return np.array([0.0]), np.array([1.0])
    r = (order + 1) // 2 - 1 + accuracy // 2
    offsets = np.arange(-r, r + 1, dtype=float)
    n = len(offsets)
    V = np.vander(offsets, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[order] = math.factorial(order)
    w = np.linalg.solve(V, rhs)
    return offsets, w


def fd_partial(fn: Callable[[np.ndarray], np.ndarray], X: np.ndarray, alpha: Sequence[int], h: float, accuracy: int = 4):
    """Mixed partial ``d^alpha fn`` at the rows of ``X`` by tensor-product central stencils.

    ``fn`` maps (N, m) points to (N, l) values.
    """
    X = np.asarray(X, dtype=float)
    stencils = [fd_weights(a, accuracy) for a in alpha]
    shifts, weights = [], []
    for combo in itertools.product(*[range(len(s[0])) for s in stencils]):
        weight = np.prod([stencils[i][1][j] for i, j in enumerate(combo)])
        if weight != 0.0:
            shifts.append([stencils[i][0][j] * h for i, j in enumerate(combo)])
            weights.append(weight)
    # one call on the stacked stencil points
    pts = (X[None, :, :] + np.array(shifts)[:, None, :]).reshape(-1, X.shape[-1])
    vals = np.asarray(fn(pts), dtype=float).reshape(len(shifts), len(X), -1)
    return np.tensordot(np.array(weights), vals, axes=1) / h ** sum(alpha)


def multi_indices(m: int, order: int) -> list[tuple[int, ...]]:
    """All exponent tuples of length m with total degree ``order``."""
    if order == 0:
        return [(0,) * m]
    out = []
    for combo in itertools.combinations_with_replacement(range(m), order):
        alpha = [0] * m
        for i in combo:
            alpha[i] += 1
        out.append(tuple(alpha))
    return out


# ---------------------------------------------------------------------------
# generalized functions


class GFunc:
    """Net of smooth maps on ``domain`` with values in R^``dim_out``.

    Subclasses implement ``__call__(eps, X) -> (N, l)``.  ``partial`` defaults to
    central differences with step ``h``.
    """

    domain: Domain
    dim_out: int
    label: str = "u"
    symbolic = False

    def __call__(self, eps: float, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    # True when u_eps does not depend on eps (lets flows reuse one integration)
    eps_free = False

    def scale(self, eps: float, X: np.ndarray) -> np.ndarray | None:
        return None

    def eval_scaled(self, eps: float, X: np.ndarray):
        """Values together with the cancellation scale (None for plain functions)."""
        return self(eps, X), self.scale(eps, X)

    def eval_many(self, eps: np.ndarray, X: np.ndarray) -> np.ndarray:
        """``X`` of shape (E, N, m) evaluated at eps[e] for slice e."""
        return np.stack([self(float(e), Xe) for e, Xe in zip(eps, X)])

    def partial(self, eps: float, X: np.ndarray, alpha: Sequence[int], h: float = 1e-3) -> np.ndarray:
        if sum(alpha) == 0:
            return self(eps, X)
        return fd_partial(lambda Y: self(eps, Y), X, alpha, h)

    def jacobian(self, eps: float, X: np.ndarray, h: float = 1e-3) -> np.ndarray:
        """(N, l, m) array of first partials."""
        m = self.domain.dim
        cols = []
        for i in range(m):
            alpha = [0] * m
            alpha[i] = 1
            cols.append(self.partial(eps, X, alpha, h))
        return np.stack(cols, axis=-1)

    def _check_point_shape(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[-1] != self.domain.dim:
            raise GFuncError(f"{self.label}: points have {X.shape[-1]} coordinates, domain has {self.domain.dim}")
        return X

    def component(self, i: int) -> "GFunc":
        return ProcGFunc(
            self.domain,
            1,
            lambda e, X: self(e, X)[:, i : i + 1],
            label=f"{self.label}[{i}]",
            partial_fn=lambda e, X, a, h: self.partial(e, X, a, h)[:, i : i + 1],
        )

    def __sub__(self, other: "GFunc") -> "GFunc":
        return difference(self, other)

    def __repr__(self):
        return f"{type(self).__name__}({self.label})"


class ExprGFunc(GFunc):
    """Expression-backed net: one Expr per component over ``names`` (and ``eps``)."""

    symbolic = True

    def __init__(self, domain: Domain, exprs: Sequence[ex.Expr | str], names: Sequence[str], label: str | None = None):
        self.domain = domain
        self.names = tuple(names)
        if len(self.names) != domain.dim:
            raise GFuncError(f"{len(self.names)} variable names for a {domain.dim}-dimensional domain")
        self.exprs = tuple(ex.parse(e, self.names) if isinstance(e, str) else e for e in exprs)
        unknown = set().union(*(ex.free_symbols(e) for e in self.exprs)) - set(self.names) - {ex.EPS}
        if unknown:
            raise ex.UnknownSymbolError(sorted(unknown)[0])
        self.dim_out = len(self.exprs)
        self.eps_free = not any(ex.depends_on(e, ex.EPS) for e in self.exprs)
        self.label = label or "[" + ", ".join(ex.to_text(e) for e in self.exprs) + "]"
        self._partials: dict[tuple[int, ...], tuple[ex.Expr, ...]] = {}

    def _eval(self, exprs, eps, X):
        X = self._check_point_shape(X)
        try:
            cols = [ex.eval_points(e, eps, X, self.names) for e in exprs]
        except ex.ExprDomainError as err:
            raise GFuncDomainError(f"{self.label}: {err}", eps) from None
        return np.stack(cols, axis=-1)

    def __call__(self, eps, X):
        return self._eval(self.exprs, eps, X)

    def eval_scaled(self, eps, X):
        X = self._check_point_shape(X)
        env = {name: X[:, i] for i, name in enumerate(self.names)}
        env[ex.EPS] = eps
        vals, mags = [], []
        try:
            for e in self.exprs:
                v, m = ex.eval_magnitude(e, env)
                vals.append(np.broadcast_to(v, (len(X),)))
                mags.append(np.broadcast_to(m, (len(X),)))
        except ex.ExprDomainError as err:
            raise GFuncDomainError(f"{self.label}: {err}", eps) from None
        return np.stack(vals, axis=-1).astype(float), np.stack(mags, axis=-1).astype(float)

    def scale(self, eps, X):
        return self.eval_scaled(eps, X)[1]

    def eval_many(self, eps, X):
        X = np.asarray(X, dtype=float)
        e = np.asarray(eps, dtype=float).reshape((-1,) + (1,) * (X.ndim - 2))
        try:
            cols = [ex.eval_points(ex_, e, X, self.names) for ex_ in self.exprs]
        except ex.ExprDomainError as err:
            raise GFuncDomainError(f"{self.label}: {err}") from None
        return np.stack(cols, axis=-1)

    def partial_exprs(self, alpha: Sequence[int]) -> tuple[ex.Expr, ...]:
        alpha = tuple(alpha)
        if alpha not in self._partials:
            out = []
            for e in self.exprs:
                for i, k in enumerate(alpha):
                    for _ in range(k):
                        e = ex.differentiate(e, self.names[i])
                out.append(e)
            self._partials[alpha] = tuple(out)
        return self._partials[alpha]

    def partial(self, eps, X, alpha, h=1e-3):
        return self._eval(self.partial_exprs(alpha), eps, X)


class PiecewiseGFunc(GFunc):
    """Selects ``inside`` for eps in ``where`` and ``outside`` otherwise."""

    def __init__(self, where: EpsSet, inside: GFunc, outside: GFunc, label: str | None = None):
        if inside.domain != outside.domain or inside.dim_out != outside.dim_out:
            raise GFuncError("piecewise branches must share domain and target dimension")
        self.where, self.inside, self.outside = where, inside, outside
        self.domain = inside.domain
        self.dim_out = inside.dim_out
        self.symbolic = inside.symbolic and outside.symbolic
        self.label = label or f"piecewise({inside.label} | {outside.label})"

    def _branch(self, eps) -> GFunc:
        return self.inside if self.where.contains(float(eps)) else self.outside

    def __call__(self, eps, X):
        return self._branch(eps)(eps, X)

    def scale(self, eps, X):
        return self._branch(eps).scale(eps, X)

    def eval_scaled(self, eps, X):
        return self._branch(eps).eval_scaled(eps, X)

    def partial(self, eps, X, alpha, h=1e-3):
        return self._branch(eps).partial(eps, X, alpha, h)


class ProcGFunc(GFunc):
    """Procedure-backed net ``(eps, X) -> (N, l)``.

    ``scaled_fn`` may return ``(values, scale)`` in one pass; derivatives are
    central differences unless ``partial_fn`` is supplied.
    """

    def __init__(
        self,
        domain: Domain,
        dim_out: int,
        fn: Callable[[float, np.ndarray], np.ndarray] | None = None,
        label: str = "proc",
        scale_fn: Callable | None = None,
        partial_fn: Callable | None = None,
        scaled_fn: Callable | None = None,
        eps_free: bool = False,
    ):
        if fn is None and scaled_fn is None:
            raise GFuncError("a procedure-backed net needs fn or scaled_fn")
        self.domain = domain
        self.dim_out = int(dim_out)
        self._fn = fn
        self._scale = scale_fn
        self._scaled = scaled_fn
        self._partial = partial_fn
        self.label = label
        self.eps_free = eps_free

    def _shape(self, X, out):
        return np.asarray(out, dtype=float).reshape(X.shape[0], self.dim_out)

    def __call__(self, eps, X):
        X = self._check_point_shape(X)
        if self._fn is None:
            return self._shape(X, self._scaled(eps, X)[0])
        return self._shape(X, self._fn(eps, X))

    def scale(self, eps, X):
        X = self._check_point_shape(X)
        if self._scaled is not None:
            return self._shape(X, self._scaled(eps, X)[1])
        if self._scale is None:
            return None
        return self._shape(X, self._scale(eps, X))

    def eval_scaled(self, eps, X):
        X = self._check_point_shape(X)
        if self._scaled is not None:
            v, s = self._scaled(eps, X)
            return self._shape(X, v), (None if s is None else self._shape(X, s))
        return self(eps, X), self.scale(eps, X)

    def partial(self, eps, X, alpha, h=1e-3):
        if self._partial is not None:
            return self._partial(eps, self._check_point_shape(X), alpha, h)
        return super().partial(eps, X, alpha, h)


def from_exprs(exprs, names, domain: Domain | None = None, label: str | None = None) -> ExprGFunc:
    domain = domain or Domain.whole(len(names))
    return ExprGFunc(domain, exprs, names, label)


def zero(domain: Domain, dim_out: int = 1) -> GFunc:
    return ProcGFunc(domain, dim_out, lambda e, X: np.zeros((len(X), dim_out)), label="0",
                     partial_fn=lambda e, X, a, h: np.zeros((len(X), dim_out)))


def identity(domain: Domain) -> GFunc:
    m = domain.dim

    def part(e, X, alpha, h):
        out = np.zeros((len(X), m))
        if sum(alpha) == 1:
            out[:, list(alpha).index(1)] = 1.0
        elif sum(alpha) == 0:
            return np.array(X, dtype=float)
        return out

    return ProcGFunc(domain, m, lambda e, X: np.array(X, dtype=float), label="id", partial_fn=part)


def difference(u: GFunc, v: GFunc) -> GFunc:
    """u - v with scale |u| + |v| (or the operands' own scales)."""
    if u.domain.dim != v.domain.dim or u.dim_out != v.dim_out:
        raise GFuncError(f"shape mismatch: {u.label} vs {v.label}")

    def both(e, X):
        a, sa = u.eval_scaled(e, X)
        b, sb = v.eval_scaled(e, X)
        sa = np.abs(a) if sa is None else sa
        sb = np.abs(b) if sb is None else sb
        return a - b, sa + sb

    return ProcGFunc(
        u.domain,
        u.dim_out,
        label=f"({u.label} - {v.label})",
        scaled_fn=both,
        partial_fn=lambda e, X, a, h: u.partial(e, X, a, h) - v.partial(e, X, a, h),
        eps_free=u.eps_free and v.eps_free,
    )


def product(u: GFunc, w: GFunc) -> GFunc:
    """Componentwise product (w may be scalar-valued)."""
    if isinstance(u, ExprGFunc) and isinstance(w, ExprGFunc) and u.names == w.names:
        ws = w.exprs if w.dim_out == u.dim_out else w.exprs * u.dim_out
        return ExprGFunc(u.domain, [ex.mul(a, b) for a, b in zip(u.exprs, ws)], u.names)
    return ProcGFunc(u.domain, u.dim_out, lambda e, X: u(e, X) * w(e, X), label=f"({u.label} * {w.label})")


# ---------------------------------------------------------------------------
# seminorms and negligibility


def _grid_eps(grid) -> np.ndarray:
    return grid.values if isinstance(grid, EpsilonGrid) else np.asarray(grid, dtype=float)


def fd_step(K: CompactBox) -> float:
    return max(1e-5, K.spacing / 8.0)


def _sup_at(u: GFunc, K: CompactBox, order: int, eps: float, rtol: float = 0.0) -> float:
    X = K.lattice(eps)
    h = fd_step(K)
    best = 0.0
    for alpha in multi_indices(K.dim, order):
        sc = None
        try:
            if order:
                vals = u.partial(eps, X, alpha, h)
            elif rtol > 0:
                vals, sc = u.eval_scaled(eps, X)
            else:
                vals = u(eps, X)
        except ex.ExprDomainError as err:
            raise GFuncDomainError(str(err), eps) from None
        vals = np.asarray(vals, dtype=float)
        if np.any(np.isnan(vals)):
            bad = np.argwhere(np.isnan(vals))[0][0]
            raise GFuncDomainError(f"{u.label}: NaN", eps, X[bad])
        if sc is not None:
            vals = np.where(np.abs(vals) <= rtol * sc, 0.0, vals)
        if vals.size:
            best = max(best, float(np.max(np.abs(vals))))
    return best


def sup_seminorm(u: GFunc, K: CompactBox, deriv_order: int = 0, grid: EpsilonGrid = DEFAULT_GRID) -> ScalarNet:
    """Net eps -> max over the K lattice of all partials of total order ``deriv_order``."""
    if deriv_order < 0:
        raise GFuncError("derivative order must be nonnegative")
    if K.dim != u.domain.dim:
        raise GFuncError("box dimension does not match the domain")
    if not u.domain.contains_closed(K.lo, K.hi):
        raise GFuncError(f"box {K.lo}..{K.hi} is not inside the domain of {u.label}")

    def fn(eps):
        return np.array([_sup_at(u, K, deriv_order, float(e)) for e in np.atleast_1d(eps)])

    return ScalarNet(fn, label=f"sup|D^{deriv_order} {u.label}|")


def residual_verdict(u: GFunc, K: CompactBox, grid: EpsilonGrid = DEFAULT_GRID, policy: Policy = DEFAULT_POLICY) -> AsymptoticVerdict:
    """Order-0 sup of ``u`` on K with roundoff floors applied, classified."""
    eps = _grid_eps(grid)
    sups = np.array([_sup_at(u, K, 0, float(e), policy.rtol) for e in eps])
    return classify_samples(eps, sups, grid if isinstance(grid, EpsilonGrid) else DEFAULT_GRID, policy)


def is_negligible_on(
    u: GFunc, Ks: Sequence[CompactBox], grid: EpsilonGrid = DEFAULT_GRID, policy: Policy = DEFAULT_POLICY
) -> tuple[bool, list[AsymptoticVerdict]]:
    """Negligibility from order-0 estimates on every box (derivative bounds follow for moderate nets)."""
    if not Ks:
        raise GFuncError("at least one compact box is required")
    verdicts = [residual_verdict(u, K, grid, policy) for K in Ks]
    return all(v.negligible for v in verdicts), verdicts


def equals_in_G(
    u: GFunc, v: GFunc, Ks: Sequence[CompactBox], grid: EpsilonGrid = DEFAULT_GRID, policy: Policy = DEFAULT_POLICY
) -> tuple[bool, list[AsymptoticVerdict]]:
    if u.domain.dim != v.domain.dim or u.dim_out != v.dim_out:
        raise GFuncError(f"shape mismatch: {u.label} vs {v.label}")
    return is_negligible_on(difference(u, v), Ks, grid, policy)


# ---------------------------------------------------------------------------
# c-boundedness and composition


def image_bounds(u: GFunc, K: CompactBox, grid: EpsilonGrid = DEFAULT_GRID) -> tuple[np.ndarray, np.ndarray]:
    """Per-eps componentwise min and max of u over the K lattice, shape (E, l)."""
    eps = _grid_eps(grid)
    los, his = [], []
    for e in eps:
        vals = u(float(e), K.lattice(float(e)))
        los.append(vals.min(axis=0))
        his.append(vals.max(axis=0))
    return np.array(los), np.array(his)


def c_bounded_witness(
    u: GFunc, K: CompactBox, grid: EpsilonGrid = DEFAULT_GRID, policy: Policy = DEFAULT_POLICY
) -> CompactBox | None:
    """Box containing u_eps(K) for every grid eps, padded 5%, or None when the images diverge."""
    eps = _grid_eps(grid)
    los, his = image_bounds(u, K, eps)
    if not (np.all(np.isfinite(los)) and np.all(np.isfinite(his))):
        return None
    radius = np.max(np.maximum(np.abs(los), np.abs(his)), axis=1)
    half = len(eps) // 2
    tail_eps, tail_r = eps[half:], radius[half:]
    if np.any(tail_r > 0) and len(eps) >= 6:
        nz = tail_r > 0
        if np.sum(nz) >= 2:
            slope = np.polyfit(np.log(tail_eps[nz]), np.log(tail_r[nz]), 1)[0]
            if slope < -policy.slope_tol:
                return None
    lo, hi = los.min(axis=0), his.max(axis=0)
    width = hi - lo
    pad = np.where(width > 0, 0.05 * width, 0.05 * np.maximum(1.0, np.abs(lo)))
    return CompactBox(lo - pad, hi + pad, K.resolution)


def compose(
    v: GFunc, u: GFunc, Ks: Sequence[CompactBox], grid: EpsilonGrid = DEFAULT_GRID, policy: Policy = DEFAULT_POLICY
) -> GFunc:
    """v o u, refused unless u has a c-bounded witness inside v's domain for every K."""
    if u.dim_out != v.domain.dim:
        raise GFuncError(f"cannot compose: {u.label} has {u.dim_out} outputs, {v.label} takes {v.domain.dim}")
    for K in Ks:
        w = c_bounded_witness(u, K, grid, policy)
        if w is None:
            raise CBoundednessError(f"{u.label} is not c-bounded on {K.lo}..{K.hi}; composition refused")
        if not v.domain.contains_closed(w.lo, w.hi):
            raise CBoundednessError(f"image box {w.lo}..{w.hi} of {u.label} leaves the domain of {v.label}")
    if isinstance(u, ExprGFunc) and isinstance(v, ExprGFunc):
        mapping = dict(zip(v.names, u.exprs))
        return ExprGFunc(u.domain, [ex.substitute(e, mapping) for e in v.exprs], u.names, label=f"{v.label}o{u.label}")
    return ProcGFunc(u.domain, v.dim_out, lambda e, X: v(e, u(e, X)), label=f"{v.label}o{u.label}", scaled_fn=lambda e, X: v.eval_scaled(e, u(e, X)),
                     eps_free=u.eps_free and v.eps_free)


def value_at(u: GFunc, x: GPoint, grid: EpsilonGrid = DEFAULT_GRID) -> list[ScalarNet]:
    """Nets eps -> u_eps(x_eps), one per component of u."""
    if x.dim != u.domain.dim:
        raise GFuncError(f"point dimension {x.dim} does not match domain dimension {u.domain.dim}")
    if not u.domain.contains_closed(x.box_lo, x.box_hi):
        raise GFuncError(f"containment box of {x.label} is not inside the domain of {u.label}")
    if not x.check_containment(grid):
        raise GFuncError(f"{x.label} leaves its declared containment box on the grid tail")

    def values(eps):
        eps = np.atleast_1d(eps)
        pts = x(eps)
        return np.concatenate([u(float(e), p[None, :]) for e, p in zip(eps, pts)])

    def scales(eps):
        eps = np.atleast_1d(eps)
        pts = x(eps)
        rows = []
        for e, p in zip(eps, pts):
            s = u.scale(float(e), p[None, :])
            rows.append(np.abs(u(float(e), p[None, :])) if s is None else s)
        return np.concatenate(rows)

    nets = []
    for i in range(u.dim_out):
        n = ScalarNet(lambda e, i=i: values(e)[:, i], label=f"{u.label}[{i}]({x.label})")
        n.scale = ScalarNet(lambda e, i=i: scales(e)[:, i], label="scale")
        nets.append(n)
    return nets
