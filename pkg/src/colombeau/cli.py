"""Scenario runner: ``colombeau run <file>`` and ``colombeau list-examples``.

A scenario is a YAML document declaring named objects (eps-sets, nets,
points, functions, fields, actions, boxes, charts, systems, jet data,
rotations) and an ordered list of steps.  The schema lives in docs/schema.md.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys
from importlib import resources
from pathlib import Path
from typing import Any, Callable

import numpy as np
import yaml

from . import __version__
from . import expr as ex
from . import flow as fl
from . import gfunc as gf
from . import invariance as inv
from . import jet as jt
from . import net as nt
from . import symmetry as sy
from .chart import GChart

KINDS = ("asymptotics", "flow", "algebraic-symmetry", "pde-symmetry", "invariance")
EXPECTATIONS = ("pass", "fail", "error")

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(Exception):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


# ---------------------------------------------------------------------------
# small schema helpers


def _req(d: dict, key: str, path: str):
    if key not in d:
        raise ConfigError(f"{path}.{key}", "required field missing")
    return d[key]


def _mapping(v, path: str) -> dict:
    if not isinstance(v, dict):
        raise ConfigError(path, f"expected a mapping, got {type(v).__name__}")
    return v


def _list(v, path: str) -> list:
    if not isinstance(v, list):
        raise ConfigError(path, f"expected a list, got {type(v).__name__}")
    return v


def _names(v, path: str) -> tuple[str, ...]:
    items = _list(v, path)
    for i, s in enumerate(items):
        if not isinstance(s, str) or not s.isidentifier():
            raise ConfigError(f"{path}[{i}]", f"not a variable name: {s!r}")
    return tuple(items)


def _float(v, path: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float, str)):
        raise ConfigError(path, f"expected a number, got {v!r}")
    try:
        return float(v)
    except ValueError:
        raise ConfigError(path, f"expected a number, got {v!r}") from None


def _floats(v, path: str) -> list[float]:
    return [_float(x, f"{path}[{i}]") for i, x in enumerate(_list(v, path))]


def _int(v, path: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(path, f"expected an integer, got {v!r}")
    return v


def _text(v, path: str) -> str:
    if isinstance(v, bool) or not isinstance(v, (str, int, float)):
        raise ConfigError(path, f"expected an expression, got {v!r}")
    return str(v)


def _unknown_keys(d: dict, allowed, path: str):
    extra = sorted(set(d) - set(allowed))
    if extra:
        raise ConfigError(f"{path}.{extra[0]}", f"unknown field (allowed: {', '.join(sorted(allowed))})")


# ---------------------------------------------------------------------------
# scenario model


class Lazy:
    """Object whose construction may raise library errors; built on first use by a step."""

    def __init__(self, build: Callable[[], Any]):
        self._build = build
        self._value = None
        self._error: Exception | None = None
        self._done = False

    def get(self):
        if not self._done:
            try:
                self._value = self._build()
            except Exception as err:  # surfaced with the owning step
                self._error = err
            self._done = True
        if self._error is not None:
            raise self._error
        return self._value


SECTIONS = (
    "name", "kind", "description", "seed", "grid", "policy", "sets", "nets", "points", "functions",
    "fields", "actions", "boxes", "charts", "systems", "jet", "jet_actions", "pdes", "rotations", "steps",
)


class Scenario:
    def __init__(self, raw, source: str = "<scenario>", grid_override: nt.EpsilonGrid | None = None,
                 seed_override: int | None = None):
        if raw is None:
            raise ConfigError("<root>", "scenario file is empty")
        raw = _mapping(raw, "<root>")
        _unknown_keys(raw, SECTIONS, "<root>")
        self.raw = raw
        self.source = source
        self.name = _text(_req(raw, "name", "<root>"), "name")
        self.kind = _req(raw, "kind", "<root>")
        if self.kind not in KINDS:
            raise ConfigError("kind", f"unknown kind {self.kind!r} (one of {', '.join(KINDS)})")
        self.description = str(raw.get("description", ""))
        self.seed = _int(raw.get("seed", 0), "seed") if seed_override is None else int(seed_override)
        self.grid = grid_override or self._grid(raw.get("grid"))
        self.policy = self._policy(raw.get("policy"))
        self.sets: dict[str, nt.EpsSet] = {}
        self.nets: dict[str, nt.ScalarNet] = {}
        self.points: dict[str, nt.GPoint] = {}
        self.functions: dict[str, gf.GFunc] = {}
        self.fields: dict[str, fl.GVectorField] = {}
        self.actions: dict[str, Any] = {}
        self.boxes: dict[str, gf.CompactBox] = {}
        self.charts: dict[str, Lazy] = {}
        self.systems: dict[str, Lazy] = {}
        self.jet: jt.JetSpec | None = None
        self.jet_actions: dict[str, Lazy] = {}
        self.pdes: dict[str, Lazy] = {}
        self.rotations: dict[str, Lazy] = {}
        self._build_objects()
        self.steps = self._steps(_req(raw, "steps", "<root>"))

    # -- grid and policy

    @staticmethod
    def _grid(v) -> nt.EpsilonGrid:
        if v is None:
            return nt.DEFAULT_GRID
        try:
            if isinstance(v, str):
                return nt.EpsilonGrid.parse(v)
            d = _mapping(v, "grid")
            _unknown_keys(d, ("q", "k_min", "k_max"), "grid")
            return nt.EpsilonGrid(q=_float(d.get("q", 0.5), "grid.q"), k_min=_int(d.get("k_min", 1), "grid.k_min"),
                                  k_max=_int(d.get("k_max", 20), "grid.k_max"))
        except nt.NetError as err:
            raise ConfigError("grid", str(err)) from None

    @staticmethod
    def _policy(v) -> nt.Policy:
        if v is None:
            return nt.DEFAULT_POLICY
        d = _mapping(v, "policy")
        fields = {f.name for f in dataclasses.fields(nt.Policy)}
        _unknown_keys(d, fields, "policy")
        kw = {k: (_int(x, f"policy.{k}") if k == "m_test" else _float(x, f"policy.{k}")) for k, x in d.items()}
        return nt.Policy(**kw)

    # -- expressions

    def _symbolic_nets(self) -> dict[str, ex.Expr]:
        return {k: n.expr for k, n in self.nets.items() if n.expr is not None}

    def expr(self, text, names, path: str) -> ex.Expr:
        text = _text(text, path)
        nets = {k: e for k, e in self._symbolic_nets().items() if k not in names}
        try:
            e = ex.parse(text, tuple(names) + tuple(nets))
        except ex.ExprError as err:
            raise ConfigError(path, str(err)) from None
        used = {k: v for k, v in nets.items() if ex.depends_on(e, k)}
        return ex.substitute(e, used) if used else e

    def net(self, v, path: str) -> nt.ScalarNet:
        if isinstance(v, str) and v in self.nets:
            return self.nets[v]
        e = self.expr(v, (), path)
        return nt.ScalarNet.from_expr(e)

    def eta(self, v, path: str):
        if isinstance(v, (int, float)) and not isinstance(v, bool):
            return float(v)
        n = self.net(v, path)
        return n

    def etas(self, v, path: str) -> list:
        out = []
        for i, x in enumerate(_list(v, path)):
            if isinstance(x, list):
                if len(x) != 2:
                    raise ConfigError(f"{path}[{i}]", "eta pairs have two entries")
                out.append(tuple(self.eta(y, f"{path}[{i}][{j}]") for j, y in enumerate(x)))
            else:
                out.append(self.eta(x, f"{path}[{i}]"))
        return out

    # -- named objects

    def _ref(self, table: dict, name, path: str, what: str):
        if not isinstance(name, str) or name not in table:
            raise ConfigError(path, f"unknown {what} {name!r}")
        return table[name]

    def _section(self, key: str) -> dict:
        v = self.raw.get(key) or {}
        return _mapping(v, key)

    def _build_objects(self):
        for name, v in self._section("sets").items():
            self.sets[name] = self._eps_set(v, f"sets.{name}")
        for name, v in self._section("nets").items():
            self.nets[name] = self._net_def(v, f"nets.{name}")
            self.nets[name].label = name if self.nets[name].expr is None else self.nets[name].label
        for name, v in self._section("boxes").items():
            self.boxes[name] = self._box(v, f"boxes.{name}")
        for name, v in self._section("points").items():
            self.points[name] = self._point(v, f"points.{name}", name)
        for name, v in self._section("functions").items():
            self.functions[name] = self._function(v, f"functions.{name}", name)
        for name, v in self._section("fields").items():
            self.fields[name] = self._field(v, f"fields.{name}", name)
        for name, v in self._section("actions").items():
            self.actions[name] = self._action(v, f"actions.{name}", name)
        for name, v in self._section("charts").items():
            self.charts[name] = self._chart(v, f"charts.{name}", name)
        for name, v in self._section("systems").items():
            self.systems[name] = self._system(v, f"systems.{name}", name)
        if self.raw.get("jet") is not None:
            self.jet = self._jet(self.raw["jet"])
        for name, v in self._section("jet_actions").items():
            self.jet_actions[name] = self._jet_action(v, f"jet_actions.{name}", name)
        for name, v in self._section("pdes").items():
            self.pdes[name] = self._pde(v, f"pdes.{name}", name)
        for name, v in self._section("rotations").items():
            self.rotations[name] = self._rotation(v, f"rotations.{name}", name)

    def _eps_set(self, v, path):
        d = _mapping(v, path)
        if "alternating_harmonic" in d:
            _unknown_keys(d, ("alternating_harmonic", "odd"), path)
            return nt.AlternatingHarmonicSet(odd=bool(d.get("odd", False)))
        if "intervals" in d:
            _unknown_keys(d, ("intervals",), path)
            ivs = []
            for i, iv in enumerate(_list(d["intervals"], f"{path}.intervals")):
                lo, hi = _floats(iv, f"{path}.intervals[{i}]") if len(iv) == 2 else (None, None)
                if lo is None or not 0.0 <= lo < hi <= 1.0:
                    raise ConfigError(f"{path}.intervals[{i}]", "expected [lo, hi] with 0 <= lo < hi <= 1")
                ivs.append((lo, hi))
            return nt.IntervalUnion(tuple(ivs))
        raise ConfigError(path, "an eps-set needs 'alternating_harmonic' or 'intervals'")

    def _net_def(self, v, path):
        if isinstance(v, dict):
            _unknown_keys(v, ("piecewise", "inside", "outside"), path)
            where = self._ref(self.sets, _req(v, "piecewise", path), f"{path}.piecewise", "eps-set")
            inside = self.net(_req(v, "inside", path), f"{path}.inside")
            outside = self.net(_req(v, "outside", path), f"{path}.outside")
            return nt.ScalarNet.piecewise(where, inside, outside)
        return self.net(v, path)

    def _box(self, v, path):
        d = _mapping(v, path)
        _unknown_keys(d, ("lo", "hi", "resolution", "zoom", "zoom_radius", "zoom_resolution"), path)
        lo, hi = _floats(_req(d, "lo", path), f"{path}.lo"), _floats(_req(d, "hi", path), f"{path}.hi")
        zoom = [_floats(z, f"{path}.zoom[{i}]") for i, z in enumerate(_list(d.get("zoom", []), f"{path}.zoom"))]
        try:
            return gf.CompactBox(lo, hi, _int(d.get("resolution", 33), f"{path}.resolution"), zoom,
                                 _float(d.get("zoom_radius", 2.0), f"{path}.zoom_radius"),
                                 _int(d.get("zoom_resolution", 17), f"{path}.zoom_resolution"))
        except gf.GFuncError as err:
            raise ConfigError(path, str(err)) from None

    def _bounds(self, v, path, dim):
        d = _mapping(v, path)
        lo, hi = _floats(_req(d, "lo", path), f"{path}.lo"), _floats(_req(d, "hi", path), f"{path}.hi")
        if len(lo) != dim or len(hi) != dim:
            raise ConfigError(path, f"bounds must have {dim} entries")
        return lo, hi

    def _point(self, v, path, name):
        d = _mapping(v, path)
        _unknown_keys(d, ("coords", "box", "pad"), path)
        coords = [self.net(c, f"{path}.coords[{i}]") for i, c in enumerate(_list(_req(d, "coords", path), f"{path}.coords"))]
        if "box" in d:
            lo, hi = self._bounds(d["box"], f"{path}.box", len(coords))
        else:
            pad = _float(d.get("pad", 1.0), f"{path}.pad")
            tail = np.array([c(self.grid.tail()) for c in coords])
            lo, hi = tail.min(axis=1) - pad, tail.max(axis=1) + pad
        try:
            return nt.GPoint(coords, lo, hi, name)
        except nt.NetError as err:
            raise ConfigError(path, str(err)) from None

    def _domain(self, d, path, dim):
        if "domain" not in d:
            return gf.Domain.whole(dim)
        lo, hi = self._bounds(d["domain"], f"{path}.domain", dim)
        try:
            return gf.Domain(lo, hi)
        except gf.GFuncError as err:
            raise ConfigError(f"{path}.domain", str(err)) from None

    def _exprs(self, d, path, names):
        if "exprs" in d:
            items = _list(d["exprs"], f"{path}.exprs")
            return [self.expr(e, names, f"{path}.exprs[{i}]") for i, e in enumerate(items)]
        return [self.expr(_req(d, "expr", path), names, f"{path}.expr")]

    def _function(self, v, path, name):
        d = _mapping(v, path)
        if "piecewise" in d:
            _unknown_keys(d, ("piecewise", "inside", "outside"), path)
            where = self._ref(self.sets, d["piecewise"], f"{path}.piecewise", "eps-set")
            a = self._ref(self.functions, _req(d, "inside", path), f"{path}.inside", "function")
            b = self._ref(self.functions, _req(d, "outside", path), f"{path}.outside", "function")
            try:
                return gf.PiecewiseGFunc(where, a, b, label=name)
            except gf.GFuncError as err:
                raise ConfigError(path, str(err)) from None
        _unknown_keys(d, ("vars", "exprs", "expr", "domain"), path)
        names = _names(_req(d, "vars", path), f"{path}.vars")
        return gf.ExprGFunc(self._domain(d, path, len(names)), self._exprs(d, path, names), names, label=name)

    def _field(self, v, path, name):
        d = _mapping(v, path)
        _unknown_keys(d, ("vars", "exprs", "domain"), path)
        names = _names(_req(d, "vars", path), f"{path}.vars")
        exprs = self._exprs(d, path, names)
        if len(exprs) != len(names):
            raise ConfigError(f"{path}.exprs", "a vector field needs one component per variable")
        return fl.GVectorField(gf.ExprGFunc(self._domain(d, path, len(names)), exprs, names, label=name), label=name)

    def _action(self, v, path, name):
        d = _mapping(v, path)
        if "flow" in d:
            _unknown_keys(d, ("flow", "eta_range", "steps_per_unit"), path)
            xi = self._ref(self.fields, d["flow"], f"{path}.flow", "field")
            rng = _floats(d.get("eta_range", [-2.0, 2.0]), f"{path}.eta_range")
            cfg = fl.FlowConfig(steps_per_unit=_int(d.get("steps_per_unit", 256), f"{path}.steps_per_unit"), grid=self.grid)
            act = fl.integrate_flow(xi, cfg, tuple(rng))
            act.label = name
            return act
        _unknown_keys(d, ("vars", "exprs", "eta", "domain", "eta_range"), path)
        names = _names(_req(d, "vars", path), f"{path}.vars")
        eta = d.get("eta", "eta")
        exprs = self._exprs(d, path, names + (eta,))
        if len(exprs) != len(names):
            raise ConfigError(f"{path}.exprs", "a group action needs one expression per variable")
        rng = tuple(_floats(d.get("eta_range", [-math.inf, math.inf]), f"{path}.eta_range"))
        return fl.GroupAction.from_exprs(exprs, names, eta, self._domain(d, path, len(names)), rng, label=name)

    def _box_list(self, v, path) -> list[gf.CompactBox]:
        return [self._ref(self.boxes, b, f"{path}[{i}]", "box") for i, b in enumerate(_list(v, path))]

    def _chart(self, v, path, name):
        d = _mapping(v, path)
        g, pol = self.grid, self.policy
        if "triangular" in d:
            _unknown_keys(d, ("triangular", "boxes", "target_boxes"), path)
            fs = [self._ref(self.functions, f, f"{path}.triangular[{i}]", "function")
                  for i, f in enumerate(_list(d["triangular"], f"{path}.triangular"))]
            boxes = self._box_list(d["boxes"], f"{path}.boxes") if "boxes" in d else None
            tboxes = self._box_list(d["target_boxes"], f"{path}.target_boxes") if "target_boxes" in d else None
            return Lazy(lambda: sy.build_triangular_chart(fs, boxes, tboxes, g, pol))
        if "linear" in d:
            _unknown_keys(d, ("linear", "boxes", "target_boxes"), path)
            rows = _list(d["linear"], f"{path}.linear")
            A = [[self.net(a, f"{path}.linear[{i}][{j}]") for j, a in enumerate(_list(r, f"{path}.linear[{i}]"))]
                 for i, r in enumerate(rows)]
            if any(len(r) != len(A) for r in A):
                raise ConfigError(f"{path}.linear", "matrix must be square")
            boxes = self._box_list(d["boxes"], f"{path}.boxes") if "boxes" in d else None
            tboxes = self._box_list(d["target_boxes"], f"{path}.target_boxes") if "target_boxes" in d else None
            return Lazy(lambda: sy.build_linear_chart(A, boxes, tboxes, g, pol))
        if "polar" in d:
            _unknown_keys(d, ("polar",), path)
            a = self.net(d["polar"], f"{path}.polar")
            return Lazy(lambda: fl.polar_chart(a))
        _unknown_keys(d, ("forward", "inverse", "source_boxes", "target_boxes", "target_domain"), path)
        fwd = self._ref(self.functions, _req(d, "forward", path), f"{path}.forward", "function")
        inv_ = self._ref(self.functions, d["inverse"], f"{path}.inverse", "function") if "inverse" in d else None
        sboxes = self._box_list(d.get("source_boxes", []), f"{path}.source_boxes")
        tboxes = self._box_list(d.get("target_boxes", []), f"{path}.target_boxes")
        target = inv_.domain if inv_ is not None else gf.Domain.whole(fwd.dim_out)
        if "target_domain" in d:
            lo, hi = self._bounds(d["target_domain"], f"{path}.target_domain", fwd.dim_out)
            target = gf.Domain(lo, hi)

        def build():
            ch = GChart(fwd, inv_, fwd.domain, target, "user-closed-form", sboxes, tboxes)
            ch.verification = ch.verify(g, pol)
            return ch

        return Lazy(build)

    def _system(self, v, path, name):
        d = _mapping(v, path)
        _unknown_keys(d, ("F", "solutions", "chart", "rank"), path)
        F = self._ref(self.functions, _req(d, "F", path), f"{path}.F", "function")
        sols = [self._ref(self.points, p, f"{path}.solutions[{i}]", "point")
                for i, p in enumerate(_list(_req(d, "solutions", path), f"{path}.solutions"))]
        chart = self._ref(self.charts, d["chart"], f"{path}.chart", "chart") if "chart" in d else None
        rank = _int(d["rank"], f"{path}.rank") if "rank" in d else None
        return Lazy(lambda: sy.AlgebraicSystem(F, sols, chart.get() if chart else None, rank, name))

    def _jet(self, v):
        d = _mapping(v, "jet")
        _unknown_keys(d, ("p", "q", "n", "x", "u"), "jet")
        try:
            return jt.JetSpec(_int(_req(d, "p", "jet"), "jet.p"), _int(_req(d, "q", "jet"), "jet.q"),
                              _int(_req(d, "n", "jet"), "jet.n"), _names(d.get("x", []), "jet.x"),
                              _names(d.get("u", []), "jet.u"))
        except jt.JetError as err:
            raise ConfigError("jet", str(err)) from None

    def _need_jet(self, path):
        if self.jet is None:
            raise ConfigError(path, "a 'jet' section is required")
        return self.jet

    def jet_exprs(self, v, path, extra=()) -> list[ex.Expr]:
        spec = self._need_jet(path)
        names = spec.names + tuple(extra)
        return [self.expr(e, names, f"{path}[{i}]") for i, e in enumerate(_list(v, path))]

    def _jet_action(self, v, path, name):
        spec = self._need_jet(path)
        d = _mapping(v, path)
        _unknown_keys(d, ("x", "u", "eta"), path)
        eta = d.get("eta", "eta")
        base = spec.x_names + spec.u_names + (eta,)
        xs = [self.expr(e, base, f"{path}.x[{i}]") for i, e in enumerate(_list(_req(d, "x", path), f"{path}.x"))]
        us = [self.expr(e, base, f"{path}.u[{i}]") for i, e in enumerate(_list(_req(d, "u", path), f"{path}.u"))]
        if len(xs) != spec.p or len(us) != spec.q:
            raise ConfigError(path, f"need {spec.p} x-expressions and {spec.q} u-expressions")
        return Lazy(lambda: jt.ProjectableAction.from_exprs(xs, us, spec.x_names, spec.u_names, eta, label=name))

    def _pde(self, v, path, name):
        spec = self._need_jet(path)
        d = _mapping(v, path)
        _unknown_keys(d, ("delta", "samples", "solutions", "boxes"), path)
        delta = self.jet_exprs(_req(d, "delta", path), f"{path}.delta")
        samples = []
        for i, s in enumerate(_list(d.get("samples", []), f"{path}.samples")):
            s = _mapping(s, f"{path}.samples[{i}]")
            vals = {}
            for k, x in s.items():
                if k not in spec.names:
                    raise ConfigError(f"{path}.samples[{i}].{k}", "unknown jet coordinate")
                vals[k] = self.net(x, f"{path}.samples[{i}].{k}") if isinstance(x, str) else _float(x, f"{path}.samples[{i}].{k}")
            samples.append(jt.jet_point(spec, vals, label=f"{name}.samples[{i}]"))
        sols = [self._ref(self.functions, f, f"{path}.solutions[{i}]", "function")
                for i, f in enumerate(_list(d.get("solutions", []), f"{path}.solutions"))]
        boxes = self._box_list(d.get("boxes", []), f"{path}.boxes")
        return Lazy(lambda: jt.PdeSystem(spec, delta, samples, sols, boxes, name))

    def _rotation(self, v, path, name):
        d = _mapping(v, path)
        _unknown_keys(d, ("n", "angles", "planes"), path)
        n = _int(_req(d, "n", path), f"{path}.n")
        angles = [self.net(a, f"{path}.angles[{i}]") for i, a in enumerate(_list(_req(d, "angles", path), f"{path}.angles"))]
        planes = None
        if "planes" in d:
            planes = [tuple(_int(x, f"{path}.planes[{i}]") for x in _list(p, f"{path}.planes[{i}]"))
                      for i, p in enumerate(_list(d["planes"], f"{path}.planes"))]
        g, pol = self.grid, self.policy
        return Lazy(lambda: inv.make_generalized_rotation(n, angles, planes, g, pol, label=name))

    # -- steps

    def _steps(self, v):
        steps = []
        for i, s in enumerate(_list(v, "steps")):
            path = f"steps[{i}]"
            s = _mapping(s, path)
            op = _req(s, "op", path)
            if op not in OPS:
                raise ConfigError(f"{path}.op", f"unknown operation {op!r}")
            expect = s.get("expect", "pass")
            if expect not in EXPECTATIONS:
                raise ConfigError(f"{path}.expect", f"expected one of {', '.join(EXPECTATIONS)}")
            required, optional, _ = OPS[op]
            _unknown_keys(s, set(required) | set(optional) | {"op", "expect", "label"}, path)
            args = {}
            for key, kind in required.items():
                args[key] = self.resolve(kind, _req(s, key, path), f"{path}.{key}")
            for key, kind in optional.items():
                if key in s:
                    args[key] = self.resolve(kind, s[key], f"{path}.{key}")
            steps.append(Step(i, op, str(s.get("label", op)), expect, args, {k: s[k] for k in s if k not in ("op", "expect", "label")}))
        if not steps:
            raise ConfigError("steps", "a scenario needs at least one step")
        return steps

    def resolve(self, kind: str, v, path: str):
        tables = {
            "net": (self.nets, "net"), "point": (self.points, "point"), "function": (self.functions, "function"),
            "field": (self.fields, "field"), "action": (self.actions, "action"), "chart": (self.charts, "chart"),
            "system": (self.systems, "system"), "pde": (self.pdes, "pde"), "jet_action": (self.jet_actions, "jet action"),
            "rotation": (self.rotations, "rotation"),
        }
        if kind == "netexpr":
            return self.net(v, path)
        if kind in tables:
            table, what = tables[kind]
            return self._ref(table, v, path, what)
        if kind == "rotations":
            return [self._ref(self.rotations, r, f"{path}[{i}]", "rotation") for i, r in enumerate(_list(v, path))]
        if kind == "boxes":
            return self._box_list(v, path)
        if kind == "etas":
            return self.etas(v, path)
        if kind == "float":
            return _float(v, path)
        if kind == "floats":
            return _floats(v, path)
        if kind == "points_xy":
            return [_floats(p, f"{path}[{i}]") for i, p in enumerate(_list(v, path))]
        if kind == "int":
            return _int(v, path)
        if kind == "bool":
            if not isinstance(v, bool):
                raise ConfigError(path, f"expected true/false, got {v!r}")
            return v
        if kind == "str":
            return _text(v, path)
        if kind == "limit":
            return None if v in (None, "none") else _floats(v, path)
        if kind == "jet_exprs":
            return self.jet_exprs(v, path)
        if kind == "jet_map":
            d = _mapping(v, path)
            spec = self._need_jet(path)
            out = {}
            for k, e in d.items():
                if k not in spec.names:
                    raise ConfigError(f"{path}.{k}", "unknown jet coordinate")
                out[k] = self.expr(e, spec.names, f"{path}.{k}")
            return out
        if kind == "class":
            if v not in (nt.NEGLIGIBLE, nt.MODERATE, nt.NOT_MODERATE):
                raise ConfigError(path, f"unknown class {v!r}")
            return v
        if kind == "modes":
            items = _list(v, path)
            for i, m in enumerate(items):
                if m not in ("linear_growth", "box_logtype"):
                    raise ConfigError(f"{path}[{i}]", f"unknown hypothesis mode {m!r}")
            return tuple(items)
        raise AssertionError(kind)


@dataclasses.dataclass
class Step:
    index: int
    op: str
    label: str
    expect: str
    args: dict
    echo: dict


# ---------------------------------------------------------------------------
# operations; each returns (passed, result, checks)


def _verdict(v: nt.AsymptoticVerdict) -> dict:
    return v.as_dict()


def op_classify(sc: Scenario, a):
    v = nt.classify_order(a["net"], sc.grid, policy=sc.policy)
    checks = {}
    if "expect_class" in a:
        checks["class"] = v.cls == a["expect_class"]
    if "expect_p" in a:
        checks["p"] = v.p == a["expect_p"]
    if "expect_slope" in a:
        checks["slope"] = bool(abs(v.slope - a["expect_slope"]) <= sc.policy.slope_tol)
    return all(checks.values()) if checks else True, {"net": a["net"].label, "verdict": v}, {}


def op_strictly_nonzero(sc, a):
    ok = nt.is_strictly_nonzero(a["net"], sc.grid, sc.policy)
    return ok, {"net": a["net"].label, "strictly_nonzero": ok}, {}


def op_value_at(sc, a):
    nets = gf.value_at(a["function"], a["point"], sc.grid)
    verdicts = [nt.classify_order(n, sc.grid, policy=sc.policy) for n in nets]
    zero = all(bool(np.all(n.sample(sc.grid) == 0.0)) for n in nets)
    res = {"function": a["function"].label, "point": a["point"].label, "identically_zero": zero, "verdicts": verdicts}
    checks = {"identically_zero": zero} if a.get("identically_zero") else {}
    return all(v.negligible for v in verdicts), res, checks


def op_near_standard(sc, a):
    tol = a.get("tol", 1e-6)
    lim = nt.near_standard(a["point"], sc.grid, tol)
    res = {"point": a["point"].label, "tol": tol, "limit": "none" if lim is None else lim.tolist()}
    checks = {}
    if "limit" in a:
        want = a["limit"]
        if want is None:
            checks["limit"] = lim is None
        else:
            checks["limit"] = lim is not None and bool(np.max(np.abs(lim - np.asarray(want))) <= tol)
    return lim is not None, res, checks


def op_points_equivalent(sc, a):
    ok = nt.points_equivalent(a["point"], a["other"], sc.grid, policy=sc.policy)
    return ok, {"point": a["point"].label, "other": a["other"].label, "equivalent": ok}, {}


def op_negligible(sc, a):
    ok, vs = gf.is_negligible_on(a["function"], a["boxes"], sc.grid, sc.policy)
    return ok, {"function": a["function"].label, "verdicts": vs}, {}


def op_equals(sc, a):
    ok, vs = gf.equals_in_G(a["function"], a["other"], a["boxes"], sc.grid, sc.policy)
    return ok, {"function": a["function"].label, "other": a["other"].label, "verdicts": vs}, {}


def op_verify_group_action(sc, a):
    r = fl.verify_group_action(a["action"], a["boxes"], sc.grid, a.get("eta_samples", (-1.0, -0.5, 0.5, 1.0)), sc.policy)
    return r["passed"], r, {}


def op_generator_residual(sc, a):
    r = fl.generator_residual(a["action"], a["field"], a["boxes"], sc.grid,
                              a.get("eta_samples", (-1.0, -0.5, 0.0, 0.5, 1.0)), sc.policy)
    return r["passed"], r, {}


def _eps_list(sc, a):
    return [float(e) for e in a.get("eps", sc.grid.values)]


def op_closed_form_error(sc, a):
    Phi, ref = a["action"], a["reference"]
    etas = a.get("eta_samples", list(np.linspace(-2.0, 2.0, 9)))
    tol = a.get("tol", 1e-8)
    worst = 0.0
    for K in a["boxes"]:
        X = K.lattice()
        for e in _eps_list(sc, a):
            for eta in etas:
                worst = max(worst, float(np.max(np.abs(Phi(e, eta, X) - ref(e, eta, X)))))
    return worst <= tol, {"action": Phi.label, "reference": ref.label, "max_error": worst, "tol": tol}, {}


def op_conserved(sc, a):
    Phi, f = a["action"], a["function"]
    etas = a.get("eta_samples", list(np.linspace(-2.0, 2.0, 9)))
    tol = a.get("tol", 1e-8)
    worst = 0.0
    for K in a["boxes"]:
        X = K.lattice()
        for e in _eps_list(sc, a):
            f0 = f(e, X)
            denom = np.maximum(np.abs(f0), 1e-300)
            for eta in etas:
                rel = np.abs(f(e, Phi(e, eta, X)) - f0) / denom
                worst = max(worst, float(np.max(np.where(np.abs(f0) > 0, rel, np.abs(f(e, Phi(e, eta, X)))))))
    return worst <= tol, {"action": Phi.label, "function": f.label, "max_relative_drift": worst, "tol": tol}, {}


def op_trajectory(sc, a):
    Phi = a["action"]
    etas = np.linspace(a.get("eta_from", 0.0), a.get("eta_to", 2.0), a.get("num", 41))
    eps = a.get("eps", [float(sc.grid.values[-1])])
    rows = []
    for e in eps:
        for j, x0 in enumerate(a["starts"]):
            traj = Phi.trajectory(float(e), np.asarray(x0, dtype=float), etas)
            for eta, x in zip(etas, traj):
                rows.append([float(e), j, float(eta)] + [float(c) for c in np.ravel(x)])
    return True, {"action": Phi.label, "rows": len(rows), "trajectory": rows}, {}


def op_straighten_polar(sc, a):
    boxes = a.get("boxes") or [gf.CompactBox([0.5, 0.5], [2.0, 5.0])]
    _, r = fl.straighten_polar(a["a"], boxes, sc.grid, sc.policy, a.get("clockwise", True))
    return r["passed"], r, {}


def op_completeness(sc, a):
    r = fl.completeness_diagnostics(a["field"], a["boxes"], sc.grid, sc.policy)
    checks = {}
    if "log_type" in a:
        checks["log_type"] = r["log_type"] == a["log_type"]
    if "global_bound" in a:
        checks["global_bound"] = r["global_bound"] == a["global_bound"]
    return bool(r["global_bound"] or r["log_type"]), r, checks


def op_chart_verify(sc, a):
    ch = a["chart"].get()
    r = ch.verification if ch.verification is not None else ch.verify(sc.grid, sc.policy)
    return bool(r["passed"]), r, {}


def op_check_solutions(sc, a):
    r = a["system"].get().check_solutions(sc.grid, sc.policy)
    return r["passed"], r, {}


def op_normal_form(sc, a):
    r = a["system"].get().normal_form(sc.grid, sc.policy)
    return r["passed"], r, {}


def op_infinitesimal_criterion(sc, a):
    r = sy.infinitesimal_criterion(a["system"].get(), a["field"], sc.grid, sc.policy)
    return r["passed"], r, {}


def op_transport_check(sc, a):
    r = sy.transport_check(a["system"].get(), a["action"], a.get("eta_samples", (-1.0, -0.5, 0.5, 1.0)), sc.grid, sc.policy)
    return r["passed"], r, {}


def op_hypothesis_check(sc, a):
    system = a["system"].get()
    if system.chart is None or system.chart.inverse is None:
        raise sy.SymmetryError("hypothesis_check needs a system with an invertible chart")
    xbar = sy.chart_field(system.chart, a["field"])
    r = sy.hypothesis_check(xbar, a["mode"], sc.grid, sc.policy, boxes=system.chart.target_boxes or None)
    return r["passed"], r, {}


def op_check_symmetry(sc, a):
    v = sy.check_symmetry(a["system"].get(), a["field"], a["action"], a.get("eta_samples", (-1.0, -0.5, 0.5, 1.0)),
                          sc.grid, sc.policy, a.get("direction", "criterion=>symmetry"),
                          a.get("modes", ("linear_growth", "box_logtype")))
    return v.overall, v.as_dict(), {"criterion_transport_agree": v.agree}


def _random_jet_points(sc, spec, count):
    rng = np.random.default_rng(sc.seed)
    return rng.uniform(-2.0, 2.0, size=(count, spec.dim))


def op_prolong(sc, a):
    spec = sc.jet
    pr = jt.prolong_field(a["xi"], a["phi"], spec)
    added = pr.added()
    expected = a.get("expect_added", {})
    tol = a.get("tol", 1e-10)
    Z = _random_jet_points(sc, spec, a.get("points", 20))
    eps = float(sc.grid.values[-1])
    checks = {}
    worst = 0.0
    for name in added:
        ref = expected.get(name, ex.ZERO)
        diff = ex.eval_points(ex.sub(added[name], ref), eps, Z, spec.names)
        err = float(np.max(np.abs(diff)))
        worst = max(worst, err)
        if expected:
            checks[name] = err <= tol
    for name in expected:
        if name not in added:
            checks[name] = False
    res = {"added": {k: ex.to_text(v) for k, v in added.items()}, "prolongation": pr.as_dict(),
           "points": len(Z), "seed": sc.seed, "tol": tol, "max_error": worst}
    return True, res, checks


def op_prolong_numeric(sc, a):
    spec = sc.jet
    tol = a.get("tol", 1e-5)
    pr = jt.prolong_field(a["xi"], a["phi"], spec)
    base = spec.x_names + spec.u_names
    xi = fl.GVectorField(gf.ExprGFunc(gf.Domain.whole(len(base)), list(a["xi"]) + list(a["phi"]), base, label="xi"))
    P = jt.ProjectableAction.from_flow(fl.integrate_flow(xi, fl.FlowConfig(grid=sc.grid)), spec.p)
    Z = _random_jet_points(sc, spec, a.get("points", 5)) * 0.5
    eps = float(sc.grid.values[-1])
    worst = 0.0
    for z in Z:
        num = jt.prolonged_generator(P, spec, z, eps)
        sym = np.array([ex.evaluate(c, eps, z, spec.names) for c in pr.components])
        worst = max(worst, float(np.max(np.abs(num - sym))))
    return worst <= tol, {"max_error": worst, "tol": tol, "points": len(Z), "seed": sc.seed}, {}


def op_pde_symmetry_check(sc, a):
    action = a["action"].get() if "action" in a else None
    r = jt.pde_symmetry_check(a["pde"].get(), a["xi"], a["phi"], sc.grid, sc.policy, action,
                              a.get("eta_samples", (-0.25, 0.25)))
    checks = {}
    if "expect_residual" in a:
        want = a["expect_residual"]
        sols = [p for p in r["points"] if p.get("is_solution", True)]
        checks["residual"] = bool(sols) and all(
            bool(np.all(np.abs(np.asarray(p["residual"], dtype=float) - want) <= 1e-10)) for p in sols)
    return r["passed"], r, checks


def _inv(report):
    return report.overall, report.as_dict(), {"modes_agree": report.agree}


def op_action_invariance(sc, a):
    r = inv.action_invariance(a["function"], a["action"], a["boxes"],
                              a.get("eta_samples", (-1.0, -0.5, 0.5, 1.0, "1+eps")), sc.grid, sc.policy)
    return r.overall, r.as_dict(), {}


def op_infinitesimal_invariance(sc, a):
    r = inv.infinitesimal_invariance(a["function"], a["field"], a["boxes"], sc.grid, sc.policy, a.get("action"))
    return _inv(r)


def op_translation_invariance(sc, a):
    return _inv(inv.translation_invariance(a["function"], a["axis"], a["boxes"], sc.grid, sc.policy))


def op_rotation_invariance(sc, a):
    rots = [r.get() for r in a["rotations"]] if "rotations" in a else None
    r = inv.rotation_invariance(a["function"], a["boxes"], sc.grid, sc.policy, rots, sc.seed,
                                a.get("fixed_angles", 8), a.get("random_angles", 5))
    return _inv(r)


def op_rotation_verify(sc, a):
    R = a["rotation"].get()
    lim = R.limit(sc.grid)
    r = {"rotation": R.describe(), "verification": R.verification, "limit": None if lim is None else lim.tolist()}
    return bool(R.verification["passed"]), r, {}


# op -> (required args, optional args, runner)
OPS: dict[str, tuple[dict, dict, Callable]] = {
    "classify": ({"net": "netexpr"}, {"expect_class": "class", "expect_p": "int", "expect_slope": "float"}, op_classify),
    "strictly_nonzero": ({"net": "netexpr"}, {}, op_strictly_nonzero),
    "value_at": ({"function": "function", "point": "point"}, {"identically_zero": "bool"}, op_value_at),
    "near_standard": ({"point": "point"}, {"tol": "float", "limit": "limit"}, op_near_standard),
    "points_equivalent": ({"point": "point", "other": "point"}, {}, op_points_equivalent),
    "negligible": ({"function": "function", "boxes": "boxes"}, {}, op_negligible),
    "equals": ({"function": "function", "other": "function", "boxes": "boxes"}, {}, op_equals),
    "verify_group_action": ({"action": "action", "boxes": "boxes"}, {"eta_samples": "etas"}, op_verify_group_action),
    "generator_residual": ({"action": "action", "field": "field", "boxes": "boxes"}, {"eta_samples": "etas"},
                           op_generator_residual),
    "closed_form_error": ({"action": "action", "reference": "action", "boxes": "boxes"},
                          {"eta_samples": "floats", "tol": "float", "eps": "floats"}, op_closed_form_error),
    "conserved": ({"action": "action", "function": "function", "boxes": "boxes"},
                  {"eta_samples": "floats", "tol": "float", "eps": "floats"}, op_conserved),
    "trajectory": ({"action": "action", "starts": "points_xy"},
                   {"eta_from": "float", "eta_to": "float", "num": "int", "eps": "floats"}, op_trajectory),
    "straighten_polar": ({"a": "netexpr"}, {"boxes": "boxes", "clockwise": "bool"}, op_straighten_polar),
    "completeness": ({"field": "field", "boxes": "boxes"}, {"log_type": "bool", "global_bound": "bool"}, op_completeness),
    "chart_verify": ({"chart": "chart"}, {}, op_chart_verify),
    "check_solutions": ({"system": "system"}, {}, op_check_solutions),
    "normal_form": ({"system": "system"}, {}, op_normal_form),
    "infinitesimal_criterion": ({"system": "system", "field": "field"}, {}, op_infinitesimal_criterion),
    "transport_check": ({"system": "system", "action": "action"}, {"eta_samples": "etas"}, op_transport_check),
    "hypothesis_check": ({"system": "system", "field": "field", "mode": "str"}, {}, op_hypothesis_check),
    "check_symmetry": ({"system": "system", "field": "field", "action": "action"},
                       {"eta_samples": "etas", "direction": "str", "modes": "modes"}, op_check_symmetry),
    "prolong": ({"xi": "jet_exprs", "phi": "jet_exprs"}, {"expect_added": "jet_map", "tol": "float", "points": "int"},
                op_prolong),
    "prolong_numeric": ({"xi": "jet_exprs", "phi": "jet_exprs"}, {"tol": "float", "points": "int"}, op_prolong_numeric),
    "pde_symmetry_check": ({"pde": "pde", "xi": "jet_exprs", "phi": "jet_exprs"},
                           {"action": "jet_action", "eta_samples": "floats", "expect_residual": "float"},
                           op_pde_symmetry_check),
    "action_invariance": ({"function": "function", "action": "action", "boxes": "boxes"}, {"eta_samples": "etas"},
                          op_action_invariance),
    "infinitesimal_invariance": ({"function": "function", "field": "field", "boxes": "boxes"}, {"action": "action"},
                                 op_infinitesimal_invariance),
    "translation_invariance": ({"function": "function", "axis": "int", "boxes": "boxes"}, {}, op_translation_invariance),
    "rotation_invariance": ({"function": "function", "boxes": "boxes"},
                            {"rotations": "rotations", "fixed_angles": "int", "random_angles": "int"},
                            op_rotation_invariance),
    "rotation_verify": ({"rotation": "rotation"}, {}, op_rotation_verify),
}


# ---------------------------------------------------------------------------
# report assembly


def _jsonable(obj, path: str = "", sink: list | None = None):
    """Convert results to plain JSON types; verdicts met on the way are collected into ``sink``."""
    if isinstance(obj, nt.AsymptoticVerdict):
        obj = obj.as_dict()
    elif hasattr(obj, "as_dict") and not isinstance(obj, type):
        obj = obj.as_dict()
    elif dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        obj = dataclasses.asdict(obj)
    if isinstance(obj, dict):
        if sink is not None and "class" in obj and "samples" in obj and "grid" in obj:
            sink.append((path, obj))
        return {str(k): _jsonable(v, f"{path}.{k}" if path else str(k), sink) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v, f"{path}[{i}]", sink) for i, v in enumerate(obj)]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist(), path, sink)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, nt.ScalarNet):
        return obj.label
    label = getattr(obj, "label", None)
    return f"<{type(obj).__name__} {label}>" if label else f"<{type(obj).__name__}>"


def run_scenario(sc: Scenario) -> tuple[dict, list, dict]:
    steps_out = []
    residual_rows = []
    trajectories = {}
    for st in sc.steps:
        runner = OPS[st.op][2]
        entry = {"index": st.index, "op": st.op, "label": st.label, "expect": st.expect,
                 "args": _jsonable(st.echo)}
        try:
            passed, result, checks = runner(sc, st.args)
            outcome = "pass" if passed else "fail"
            sink: list = []
            result = _jsonable(result, "", sink)
            if st.op == "trajectory":
                trajectories[st.index] = result.pop("trajectory")
            for path, v in sink:
                g = v["grid"]
                eps = nt.EpsilonGrid(g["q"], g["k_min"], g["k_max"]).values
                for k, (e, s) in enumerate(zip(eps, v["samples"])):
                    residual_rows.append([st.index, st.op, path or "verdict", g["k_min"] + k, float(e), s, v["class"]])
            entry["result"] = result
            entry["checks"] = {k: bool(c) for k, c in checks.items()}
        except Exception as err:
            outcome = "error"
            entry["error"] = f"{type(err).__name__}: {err}"
            entry["checks"] = {}
        entry["outcome"] = outcome
        entry["ok"] = outcome == st.expect and all(entry["checks"].values())
        steps_out.append(entry)
    report = {
        "colombeau_version": __version__,
        "scenario": {"name": sc.name, "kind": sc.kind, "description": sc.description, "source": sc.source,
                     "definition": _jsonable(sc.raw)},
        "grid": sc.grid.as_dict(),
        "policy": _jsonable(dataclasses.asdict(sc.policy)),
        "floors": {"integrator": nt.INTEGRATOR_FLOOR, "near_standard_tol_default": 1e-6},
        "seed": sc.seed,
        "steps": steps_out,
        "passed": all(s["ok"] for s in steps_out),
    }
    return report, residual_rows, trajectories


def dump_csv(directory: Path, report: dict, residual_rows: list, trajectories: dict):
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / "residuals.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "op", "check", "k", "eps", "sample", "class"])
        w.writerows(residual_rows)
    for idx, rows in trajectories.items():
        dim = len(rows[0]) - 3 if rows else 0
        with open(directory / f"trajectory_step{idx}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["eps", "start", "eta"] + [f"x{i + 1}" for i in range(dim)])
            w.writerows(rows)


def format_human(report: dict) -> str:
    sc = report["scenario"]
    g = report["grid"]
    lines = [f"scenario {sc['name']} ({sc['kind']})", f"  grid eps_k = {g['q']}^k, k = {g['k_min']}..{g['k_max']}; seed {report['seed']}"]
    for s in report["steps"]:
        mark = "ok  " if s["ok"] else "FAIL"
        extra = ""
        if "error" in s:
            extra = f"  [{s['error']}]"
        elif s["checks"]:
            extra = "  checks: " + ", ".join(f"{k}={'ok' if v else 'no'}" for k, v in s["checks"].items())
        lines.append(f"  [{mark}] {s['index']:>2} {s['label']}: {s['outcome']} (expected {s['expect']}){extra}")
    lines.append(f"overall: {'PASS' if report['passed'] else 'FAIL'}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# bundled scenarios


def _bundled_dir():
    return resources.files("colombeau") / "scenarios"


def bundled_scenarios() -> list[dict]:
    out = []
    for entry in sorted(_bundled_dir().iterdir(), key=lambda p: p.name):
        if entry.name.endswith(".yaml"):
            raw = yaml.safe_load(entry.read_text()) or {}
            out.append({"name": entry.name[:-5], "kind": raw.get("kind", "?"), "description": raw.get("description", "")})
    return out


def resolve_scenario_path(text: str):
    p = Path(text)
    if p.exists():
        return p
    stem = p.name[:-5] if p.name.endswith(".yaml") else p.name
    candidate = _bundled_dir() / f"{stem}.yaml"
    if candidate.is_file():
        return candidate
    return p


def load_scenario(path, grid=None, seed=None) -> Scenario:
    p = resolve_scenario_path(str(path))
    try:
        text = p.read_text()
    except OSError as err:
        raise ConfigError("<file>", f"cannot read {path}: {err.strerror}") from None
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as err:
        raise ConfigError("<root>", f"YAML parse error: {err}") from None
    return Scenario(raw, source=p.name, grid_override=grid, seed_override=seed)


# ---------------------------------------------------------------------------
# entry point


def _cmd_run(args) -> int:
    try:
        grid = nt.EpsilonGrid.parse(args.grid) if args.grid else None
    except (nt.NetError, ValueError) as err:
        print(f"config error: --grid: {err}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        sc = load_scenario(args.file, grid, args.seed)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    report, rows, trajectories = run_scenario(sc)
    print(format_human(report))
    if args.report:
        Path(args.report).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    if args.dump_csv:
        dump_csv(Path(args.dump_csv), report, rows, trajectories)
    return EXIT_PASS if report["passed"] else EXIT_FAIL


def _cmd_list(args) -> int:
    for s in bundled_scenarios():
        if args.kind is None or s["kind"] == args.kind:
            print(f"{s['name']:<36} {s['kind']:<20} {s['description']}")
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="colombeau", description="Run generalized-function scenarios.")
    parser.add_argument("--version", action="version", version=f"colombeau {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="execute a scenario file or a bundled scenario name")
    run.add_argument("file")
    run.add_argument("--report", help="write the machine-readable JSON report here")
    run.add_argument("--dump-csv", dest="dump_csv", help="directory for residual tables and trajectories")
    run.add_argument("--grid", help="override the eps grid, k_min:k_max[:q]")
    run.add_argument("--seed", type=int, help="override the scenario seed")
    run.set_defaults(func=_cmd_run)
    ls = sub.add_parser("list-examples", help="list bundled scenarios")
    ls.add_argument("--kind", help="only scenarios of this kind")
    ls.set_defaults(func=_cmd_list)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return EXIT_CONFIG if err.code else EXIT_PASS
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
