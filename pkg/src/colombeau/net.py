"""Epsilon grids, nets of reals, asymptotic classification and generalized points.

A net is a map ``eps -> value`` on (0, 1].  Its class in the ring of
generalized numbers is decided from samples on a geometric grid
``eps_k = q**k`` by a least-squares fit of ``log|n|`` against ``log eps`` over
the tail half of the grid (the smallest eps values).  The verdict always
carries the grid and the cutoffs it was decided with.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import expr as ex


class NetError(Exception):
    pass


class NotStrictlyNonzeroError(NetError, ZeroDivisionError):
    pass


# ---------------------------------------------------------------------------
# grids


@dataclass(frozen=True)
class EpsilonGrid:
    q: float = 0.5
    k_min: int = 1
    k_max: int = 20

    def __post_init__(self):
        if not 0.0 < self.q < 1.0:
            raise NetError(f"grid base must lie in (0, 1), got {self.q}")
        if self.k_min < 0 or self.k_max < self.k_min:
            raise NetError(f"bad grid index range {self.k_min}..{self.k_max}")

    @property
    def values(self) -> np.ndarray:
        return self.q ** np.arange(self.k_min, self.k_max + 1, dtype=float)

    def __len__(self) -> int:
        return self.k_max - self.k_min + 1

    def tail(self) -> np.ndarray:
        """Smallest half of the grid (at least three points)."""
        v = self.values
        return v[len(v) // 2 :] if len(v) >= 6 else v

    def as_dict(self) -> dict:
        return {"q": self.q, "k_min": self.k_min, "k_max": self.k_max}

    @classmethod
    def parse(cls, text: str) -> "EpsilonGrid":
        """``k_min:k_max[:q]``"""
        parts = text.split(":")
        if len(parts) not in (2, 3):
            raise NetError(f"grid spec must be k_min:k_max[:q], got {text!r}")
        q = float(parts[2]) if len(parts) == 3 else 0.5
        return cls(q=q, k_min=int(parts[0]), k_max=int(parts[1]))


DEFAULT_GRID = EpsilonGrid()


# ---------------------------------------------------------------------------
# eps predicates


class EpsSet:
    """Decidable subset of (0, 1]."""

    def contains(self, eps: float) -> bool:
        raise NotImplementedError

    def mask(self, eps) -> np.ndarray:
        eps = np.asarray(eps, dtype=float)
        return np.vectorize(self.contains, otypes=[bool])(eps)

    def describe(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class AlternatingHarmonicSet(EpsSet):
    """Union of (1/(2n+1), 1/(2n)] over n >= 1, or its complement half (odd=True).

    Membership is decided exactly: eps lies in the set iff floor(1/eps) is even
    (resp. odd), computed on the exact rational value of the float.
    """

    odd: bool = False

    def contains(self, eps: float) -> bool:
        if not 0.0 < eps <= 1.0:
            return False
        inv = Fraction(1) / Fraction(float(eps))
        n = inv.numerator // inv.denominator
        if n < 2 and not self.odd:
            return False
        return (n % 2 == 1) if self.odd else (n % 2 == 0)

    def describe(self) -> dict:
        return {"alternating_harmonic": True, "odd": self.odd}


@dataclass(frozen=True)
class IntervalUnion(EpsSet):
    """Finite union of half-open intervals (lo, hi]."""

    intervals: tuple[tuple[float, float], ...]

    def contains(self, eps: float) -> bool:
        e = Fraction(float(eps))
        return any(Fraction(lo) < e <= Fraction(hi) for lo, hi in self.intervals)

    def describe(self) -> dict:
        return {"intervals": [list(iv) for iv in self.intervals]}


# ---------------------------------------------------------------------------
# scalar nets


class ScalarNet:
    """A net ``eps -> float``.

    ``fn`` takes a 1-d array of eps values and returns an array of the same
    shape; ``scalar=True`` marks evaluators that only accept one float.
    """

    def __init__(self, fn: Callable, label: str = "net", scalar: bool = False):
        self._fn = fn
        self.label = label
        self._scalar = scalar
        self._cache: dict[bytes, np.ndarray] = {}
        # magnitude of the terms that cancelled to produce this net, if any
        self.scale: ScalarNet | None = None
        # symbolic form in eps when the net came from an expression
        self.expr: ex.Expr | None = None

    def __call__(self, eps):
        arr = np.atleast_1d(np.asarray(eps, dtype=float))
        if np.any(arr <= 0) or np.any(arr > 1):
            raise NetError("nets are indexed by eps in (0, 1]")
        if self._scalar:
            out = np.array([float(self._fn(float(e))) for e in arr])
        else:
            out = np.asarray(self._fn(arr), dtype=float)
            out = np.broadcast_to(out, arr.shape).copy()
        return out if np.ndim(eps) else float(out[0])

    def sample(self, grid: EpsilonGrid | np.ndarray) -> np.ndarray:
        eps = grid.values if isinstance(grid, EpsilonGrid) else np.asarray(grid, dtype=float)
        key = eps.tobytes()
        if key not in self._cache:
            self._cache[key] = self(eps)
        return self._cache[key]

    def __repr__(self):
        return f"ScalarNet({self.label})"

    # constructors

    @classmethod
    def constant(cls, c: float) -> "ScalarNet":
        c = float(c)
        net = cls(lambda e: np.full(np.shape(e), c), label=repr(c))
        net.expr = ex.Const(c)
        return net

    @classmethod
    def from_expr(cls, e: ex.Expr | str) -> "ScalarNet":
        if isinstance(e, str):
            e = ex.parse(e)
        if ex.free_symbols(e) - {ex.EPS}:
            raise NetError(f"net expression may only depend on eps: {ex.to_text(e)}")
        net = cls(lambda eps: ex.eval_env(e, {ex.EPS: eps}), label=ex.to_text(e))
        net.expr = e
        return net

    @classmethod
    def piecewise(cls, where: EpsSet, inside: "ScalarNet", outside: "ScalarNet") -> "ScalarNet":
        def fn(eps):
            m = where.mask(eps)
            out = np.empty(np.shape(eps))
            if np.any(m):
                out[m] = inside(eps[m])
            if np.any(~m):
                out[~m] = outside(eps[~m])
            return out

        return cls(fn, label=f"piecewise({inside.label} | {outside.label})")

    # ring operations

    def _binary(self, other, op, sym):
        other = other if isinstance(other, ScalarNet) else ScalarNet.constant(other)
        return ScalarNet(lambda e: op(self(e), other(e)), label=f"({self.label} {sym} {other.label})")

    def __add__(self, other):
        return self._binary(other, np.add, "+")

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract, "-")

    def __rsub__(self, other):
        return ScalarNet.constant(other) - self

    def __mul__(self, other):
        return self._binary(other, np.multiply, "*")

    __rmul__ = __mul__

    def __neg__(self):
        return ScalarNet(lambda e: -self(e), label=f"(-{self.label})")

    def map(self, fn: Callable[[np.ndarray], np.ndarray], label: str) -> "ScalarNet":
        return ScalarNet(lambda e: fn(self(e)), label=label)


def as_net(value) -> ScalarNet:
    if isinstance(value, ScalarNet):
        return value
    if isinstance(value, str):
        return ScalarNet.from_expr(value)
    return ScalarNet.constant(value)


# ---------------------------------------------------------------------------
# asymptotic classification


NEGLIGIBLE = "Negligible"
MODERATE = "Moderate"
NOT_MODERATE = "NotModerate"


@dataclass(frozen=True)
class Policy:
    """Cutoffs shared by every negligibility decision.

    ``atol`` is an absolute floor and ``rtol`` a floor relative to the
    pointwise magnitude of the terms whose cancellation produced a residual;
    samples under ``max(eps**m_test, atol)`` or ``rtol*scale`` count as zero.
    ``atol`` is 0 for symbolic objects and 1e-7 for integrated ones.
    """

    m_test: int = 5
    p_max: float = 40.0
    atol: float = 0.0
    rtol: float = 1e-12
    slope_tol: float = 0.05
    divergence_jump: float = 1.0

    def with_atol(self, atol: float) -> "Policy":
        return Policy(self.m_test, self.p_max, atol, self.rtol, self.slope_tol, self.divergence_jump)

    def as_dict(self) -> dict:
        return {
            "m_test": self.m_test,
            "p_max": self.p_max,
            "atol": self.atol,
            "rtol": self.rtol,
            "slope_tol": self.slope_tol,
        }


DEFAULT_POLICY = Policy()
INTEGRATOR_FLOOR = 1e-7


@dataclass(frozen=True)
class AsymptoticVerdict:
    cls: str
    p: int | None
    slope: float
    residual: float
    grid: EpsilonGrid
    policy: Policy
    note: str = ""
    samples: tuple[float, ...] = ()

    def with_samples(self, samples) -> "AsymptoticVerdict":
        return AsymptoticVerdict(self.cls, self.p, self.slope, self.residual, self.grid, self.policy, self.note,
                                 tuple(float(v) for v in samples))

    @property
    def max_sample(self) -> float:
        return max(self.samples) if self.samples else math.nan

    @property
    def negligible(self) -> bool:
        return self.cls == NEGLIGIBLE

    @property
    def moderate(self) -> bool:
        return self.cls in (NEGLIGIBLE, MODERATE)

    def as_dict(self) -> dict:
        return {
            "class": self.cls,
            "p": self.p,
            "slope": _finite(self.slope),
            "residual": _finite(self.residual),
            "grid": self.grid.as_dict(),
            "m_test": self.policy.m_test,
            "p_max": self.policy.p_max,
            "atol": self.policy.atol,
            "rtol": self.policy.rtol,
            "note": self.note,
            "samples": [_finite(v) for v in self.samples],
        }

    def __str__(self):
        p = f"({self.p})" if self.cls == MODERATE else ""
        return f"{self.cls}{p} slope={self.slope:.4g}"


def _finite(x: float):
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(x)


def _lsq_slope(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    if len(x) == 1:
        # single nonzero sample: envelope through the unit constant
        return float(y[0] / x[0]), 0.0
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    fit = A @ coef
    return float(coef[0]), float(np.sqrt(np.mean((y - fit) ** 2)))


def classify_samples(
    eps: np.ndarray,
    values: np.ndarray,
    grid: EpsilonGrid,
    policy: Policy = DEFAULT_POLICY,
    floor: np.ndarray | None = None,
) -> AsymptoticVerdict:
    """Classify sampled magnitudes ``values`` taken at ``eps`` (ordered along the grid).

    ``floor`` is an optional per-sample threshold below which a sample counts as zero.
    """
    eps = np.asarray(eps, dtype=float)
    mags = np.abs(np.asarray(values, dtype=float))
    if len(eps) < 6:
        raise NetError(f"grid too short for a fit ({len(eps)} < 6 points)")
    if np.any(np.isnan(mags)):
        raise NetError("net samples contain NaN")
    thresh = np.maximum(eps**policy.m_test, policy.atol) if policy.atol > 0 else np.zeros_like(eps)
    if floor is not None:
        thresh = np.maximum(thresh, floor)
    mags = np.where(mags <= thresh, 0.0, mags)
    return _classify(eps, mags, grid, policy).with_samples(mags)


def _classify(eps: np.ndarray, mags: np.ndarray, grid: EpsilonGrid, policy: Policy) -> AsymptoticVerdict:
    half = len(eps) // 2
    t_eps, t_mag = eps[half:], mags[half:]
    if np.any(np.isinf(t_mag)):
        return AsymptoticVerdict(NOT_MODERATE, None, -math.inf, math.nan, grid, policy, "overflow on tail")
    nz = t_mag > 0
    if not np.any(nz):
        return AsymptoticVerdict(NEGLIGIBLE, None, math.inf, 0.0, grid, policy, "tail identically zero")
    lx, ly = np.log(t_eps[nz]), np.log(t_mag[nz])
    slope, resid = _lsq_slope(lx, ly)
    note = "" if np.all(nz) else f"{int(np.sum(~nz))} zero tail samples"

    if slope < -policy.p_max:
        return AsymptoticVerdict(NOT_MODERATE, None, slope, resid, grid, policy, "growth beyond p_max")
    # super-polynomial growth: the local slope keeps steepening across tail windows
    if np.sum(nz) >= 6 and slope < 0:
        k = len(lx) // 2
        early, _ = _lsq_slope(lx[:k], ly[:k])
        late, _ = _lsq_slope(lx[k:], ly[k:])
        if late < 0 and late - early < -max(policy.divergence_jump, 0.25 * abs(early)):
            return AsymptoticVerdict(NOT_MODERATE, None, slope, resid, grid, policy, "slope diverging across tail windows")
    # a rounding-level allowance so that exact eps^m_test is not lost to the fit
    if slope >= policy.m_test - 1e-9:
        return AsymptoticVerdict(NEGLIGIBLE, None, slope, resid, grid, policy, note)
    p = int(math.ceil(-slope - policy.slope_tol))
    return AsymptoticVerdict(MODERATE, p, slope, resid, grid, policy, note)


def classify_order(
    n: ScalarNet, grid: EpsilonGrid = DEFAULT_GRID, m_test: int | None = None, policy: Policy = DEFAULT_POLICY
) -> AsymptoticVerdict:
    """Decide Negligible / Moderate(p) / NotModerate for ``n`` from its grid samples."""
    if m_test is not None:
        policy = Policy(m_test, policy.p_max, policy.atol, policy.rtol, policy.slope_tol, policy.divergence_jump)
    if policy.m_test < 1:
        raise NetError("m_test must be at least 1")
    eps = grid.values
    floor = None
    if n.scale is not None and policy.rtol > 0:
        floor = policy.rtol * np.abs(n.scale.sample(eps))
    return classify_samples(eps, n.sample(eps), grid, policy, floor)


# ---------------------------------------------------------------------------
# generalized numbers


def gn_add(a: ScalarNet, b: ScalarNet) -> ScalarNet:
    return as_net(a) + as_net(b)


def gn_mul(a: ScalarNet, b: ScalarNet) -> ScalarNet:
    return as_net(a) * as_net(b)


def is_strictly_nonzero(a: ScalarNet, grid: EpsilonGrid = DEFAULT_GRID, policy: Policy = DEFAULT_POLICY) -> bool:
    """|a| >= eps^q on the tail for some q, tested as moderateness of 1/|a|."""
    a = as_net(a)
    samples = a.sample(grid)
    tail = samples[len(samples) // 2 :]
    if np.any(tail == 0) or np.any(~np.isfinite(tail)):
        return False
    verdict = classify_samples(grid.values, 1.0 / np.abs(samples), grid, policy)
    return verdict.moderate


def gn_invert(a: ScalarNet, grid: EpsilonGrid = DEFAULT_GRID, policy: Policy = DEFAULT_POLICY) -> ScalarNet:
    a = as_net(a)
    if not is_strictly_nonzero(a, grid, policy):
        raise NotStrictlyNonzeroError(f"{a.label} is not strictly nonzero on the grid tail")

    def inv(eps):
        v = a(eps)
        if np.any(v == 0):
            raise NotStrictlyNonzeroError(f"{a.label} vanishes at some eps")
        return 1.0 / v

    return ScalarNet(inv, label=f"1/{a.label}")


# ---------------------------------------------------------------------------
# generalized points


@dataclass
class GPoint:
    coords: list[ScalarNet]
    box_lo: np.ndarray
    box_hi: np.ndarray
    label: str = "point"

    def __post_init__(self):
        self.coords = [as_net(c) for c in self.coords]
        self.box_lo = np.asarray(self.box_lo, dtype=float).reshape(-1)
        self.box_hi = np.asarray(self.box_hi, dtype=float).reshape(-1)
        if not (len(self.coords) == len(self.box_lo) == len(self.box_hi)):
            raise NetError("GPoint coordinates and containment box disagree in dimension")
        if np.any(self.box_lo > self.box_hi):
            raise NetError("empty containment box")

    @property
    def dim(self) -> int:
        return len(self.coords)

    def __call__(self, eps) -> np.ndarray:
        """Coordinates at eps; shape (dim,) for scalar eps, (len(eps), dim) otherwise."""
        cols = [c(eps) for c in self.coords]
        return np.array(cols, dtype=float).T if np.ndim(eps) else np.array(cols, dtype=float)

    def check_containment(self, grid: EpsilonGrid = DEFAULT_GRID) -> bool:
        X = self(grid.tail())
        return bool(np.all((X >= self.box_lo) & (X <= self.box_hi)))

    @classmethod
    def constant(cls, x: Sequence[float], pad: float = 1.0, label: str | None = None) -> "GPoint":
        x = np.asarray(x, dtype=float)
        return cls([ScalarNet.constant(v) for v in x], x - pad, x + pad, label or f"const{tuple(x.tolist())}")


def _tail_probe(grid: EpsilonGrid, count: int = 257, log_floor: float = -690.0) -> np.ndarray:
    """Deep, off-grid eps samples below the grid tail.

    Exponents are not integer multiples of log q, so periodic eps-predicates
    (such as the alternating harmonic set, which contains every 2**-k) are seen
    on both sides.
    """
    start = math.log(grid.values[len(grid) // 2])
    logs = np.linspace(start, log_floor, count)
    # golden-ratio jitter keeps the probes away from any arithmetic progression in log eps
    frac = (np.arange(count) * 0.6180339887498949) % 1.0
    logs = logs + frac * (logs[0] - logs[1]) * 0.9
    logs = np.clip(logs, log_floor, start)
    return np.exp(logs)


def near_standard(x: GPoint, grid: EpsilonGrid = DEFAULT_GRID, tol: float = 1e-6) -> np.ndarray | None:
    """Classical limit of ``x`` if its tail is Cauchy within ``tol``, else None.

    The tail is probed on the grid's lower half extended by deep off-grid
    samples down to eps ~ 1e-300; the diameter test is applied to the last
    quarter of the probes and the limit is their mean.
    """
    probe = np.concatenate([grid.tail(), _tail_probe(grid)])
    probe = np.sort(probe)[::-1]
    try:
        X = x(probe)
    except (ex.ExprError, NetError, ArithmeticError):
        return None
    if not np.all(np.isfinite(X)):
        return None
    last = X[-(len(X) // 4) :]
    diam = float(np.max(np.linalg.norm(last[:, None, :] - last[None, :, :], axis=-1)))
    if diam >= tol:
        return None
    return last.mean(axis=0)


def distance_net(x: GPoint, y: GPoint) -> ScalarNet:
    if x.dim != y.dim:
        raise NetError(f"dimension mismatch: {x.dim} vs {y.dim}")

    def d(eps):
        return np.linalg.norm(np.atleast_2d(x(eps)) - np.atleast_2d(y(eps)), axis=-1)

    return ScalarNet(d, label=f"|{x.label} - {y.label}|")


def points_equivalent(
    x: GPoint, y: GPoint, grid: EpsilonGrid = DEFAULT_GRID, m_test: int | None = None, policy: Policy = DEFAULT_POLICY
) -> bool:
    return classify_order(distance_net(x, y), grid, m_test, policy).negligible
