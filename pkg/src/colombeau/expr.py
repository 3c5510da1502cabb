"""Expression trees over named variables and the regularization parameter ``eps``.

Expressions are immutable, hashable trees.  They are parsed from an infix
grammar (see ``docs/grammar.md``), differentiated exactly, and evaluated with
numpy so that a single call can sweep many lattice points and many ``eps``
values at once.

The two built-in mollifier profiles are stored as functions of the squared
radius ``s``::

    bump:  s -> exp(-1/(1-s)) for s < 1, 0 otherwise
    gauss: s -> exp(-s)

``bump(a, b, ...)`` parses to ``bumpd(0, a^2 + b^2 + ...)``; the first
argument of ``bumpd``/``gaussd`` is the order of the s-derivative.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

EPS = "eps"
RESERVED = frozenset({EPS, "pi"})

UNARY_FUNCS = ("sin", "cos", "tan", "exp", "log", "sqrt", "abs", "sinh", "cosh", "tanh", "atan")
BINARY_FUNCS = ("atan2",)
PROFILES = ("bump", "gauss")


class ExprError(Exception):
    pass


class ParseError(ExprError):
    def __init__(self, message: str, text: str, pos: int):
        super().__init__(f"{message} at position {pos}: {text[:pos]}<HERE>{text[pos:]}")
        self.text = text
        self.pos = pos


class UnknownSymbolError(ExprError):
    def __init__(self, name: str, pos: int | None = None):
        where = f" at position {pos}" if pos is not None else ""
        super().__init__(f"unknown symbol {name!r}{where}")
        self.name = name
        self.pos = pos


class ExprDomainError(ExprError, ArithmeticError):
    """Raised instead of producing NaN (log of nonpositive, division by zero, ...)."""


# ---------------------------------------------------------------------------
# nodes


class Expr:
    __slots__ = ()

    # operator sugar builds trees through the folding constructors
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return sub(self, as_expr(other))

    def __rsub__(self, other):
        return sub(as_expr(other), self)

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __pow__(self, other):
        return power(self, as_expr(other))

    def __neg__(self):
        return neg(self)

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True, eq=True, repr=True)
class Const(Expr):
    value: float


@dataclass(frozen=True, eq=True, repr=True)
class Sym(Expr):
    name: str


@dataclass(frozen=True, eq=True, repr=True)
class Unary(Expr):
    op: str
    arg: Expr


@dataclass(frozen=True, eq=True, repr=True)
class Binary(Expr):
    op: str  # one of + - * / ^ atan2
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=True, repr=True)
class Profile(Expr):
    """order-th derivative of a mollifier profile, as a function of squared radius."""

    kind: str
    order: int
    arg: Expr


ZERO = Const(0.0)
ONE = Const(1.0)
EPS_SYM = Sym(EPS)


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, float, np.floating, np.integer)):
        return Const(float(value))
    raise TypeError(f"cannot convert {value!r} to Expr")


def _is_const(e: Expr, value: float | None = None) -> bool:
    return isinstance(e, Const) and (value is None or e.value == value)


# folding constructors: constant folding plus 0/1 absorption, nothing more


def add(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        return Const(a.value + b.value)
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    return Binary("+", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        return Const(a.value - b.value)
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return neg(b)
    return Binary("-", a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        return Const(a.value * b.value)
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return ZERO
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    return Binary("*", a, b)


def div(a: Expr, b: Expr) -> Expr:
    if _is_const(b, 0.0):
        # kept symbolic; evaluation reports the domain error
        return Binary("/", a, b)
    if _is_const(a) and _is_const(b):
        return Const(a.value / b.value)
    if _is_const(a, 0.0):
        return ZERO
    if _is_const(b, 1.0):
        return a
    return Binary("/", a, b)


def power(a: Expr, b: Expr) -> Expr:
    if _is_const(b, 0.0):
        return ONE
    if _is_const(b, 1.0):
        return a
    if _is_const(a) and _is_const(b):
        try:
            value = a.value ** b.value
        except ZeroDivisionError:
            return Binary("^", a, b)
        if isinstance(value, complex):
            return Binary("^", a, b)
        return Const(float(value))
    return Binary("^", a, b)


def neg(a: Expr) -> Expr:
    if _is_const(a):
        return Const(-a.value)
    if isinstance(a, Unary) and a.op == "neg":
        return a.arg
    return Unary("neg", a)


def call(name: str, *args: Expr) -> Expr:
    if name in UNARY_FUNCS:
        (a,) = args
        if _is_const(a):
            folded = _fold_unary(name, a.value)
            if folded is not None:
                return Const(folded)
        return Unary(name, a)
    if name in BINARY_FUNCS:
        a, b = args
        if _is_const(a) and _is_const(b):
            return Const(math.atan2(a.value, b.value))
        return Binary(name, a, b)
    raise UnknownSymbolError(name)


def _fold_unary(name: str, v: float) -> float | None:
    try:
        if name == "log" and v <= 0 or name == "sqrt" and v < 0:
            return None
        fn = {"abs": abs, "atan": math.atan}.get(name) or getattr(math, name)
        return float(fn(v))
    except (ValueError, OverflowError):
        return None


def profile(kind: str, order: int, arg: Expr) -> Expr:
    if kind not in PROFILES:
        raise UnknownSymbolError(kind)
    return Profile(kind, int(order), arg)


# ---------------------------------------------------------------------------
# variable tables


@dataclass(frozen=True)
class VarTable:
    """Ordered variable names; ``params`` are named constants folded in at parse time."""

    names: tuple[str, ...]
    params: tuple[tuple[str, float], ...] = ()

    def __init__(self, names: Iterable[str], params: Mapping[str, float] | None = None):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise ExprError(f"duplicate variable names in {names}")
        params = tuple(sorted((params or {}).items()))
        clash = (set(names) | {p for p, _ in params}) & RESERVED
        if clash:
            raise ExprError(f"reserved names used as variables: {sorted(clash)}")
        if set(names) & {p for p, _ in params}:
            raise ExprError("a name cannot be both a variable and a parameter")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "params", params)

    def __contains__(self, name: str) -> bool:
        return name in self.names

    def __len__(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        return self.names.index(name)

    @property
    def param_map(self) -> dict[str, float]:
        return dict(self.params)


def _vartable(vars) -> VarTable:
    if isinstance(vars, VarTable):
        return vars
    return VarTable(vars)


# ---------------------------------------------------------------------------
# parser

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>\*\*|[-+*/^(),]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ParseError(f"unexpected character {text[bad]!r}", text, bad)
        kind = m.lastgroup
        value = m.group(kind)
        start = m.start(kind)
        if value == "**":
            value = "^"
        tokens.append((kind, value, start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, table: VarTable):
        self.text = text
        self.table = table
        self.params = table.param_map
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, v, pos = self.take()
        if v != value or kind == "end" and value:
            raise ParseError(f"expected {value!r}", self.text, pos)

    def parse(self) -> Expr:
        if self.peek()[0] == "end":
            raise ParseError("empty expression", self.text, 0)
        e = self.expr()
        kind, v, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {v!r}", self.text, pos)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            e = add(e, rhs) if op == "+" else sub(e, rhs)
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.unary()
            e = mul(e, rhs) if op == "*" else div(e, rhs)
        return e

    def unary(self) -> Expr:
        kind, v, _ = self.peek()
        if kind == "op" and v == "-":
            self.take()
            return neg(self.unary())
        if kind == "op" and v == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[1] == "^" and self.peek()[0] == "op":
            self.take()
            # right associative; the exponent may carry its own sign
            return power(base, self.unary())
        return base

    def atom(self) -> Expr:
        kind, v, pos = self.take()
        if kind == "num":
            return Const(float(v))
        if kind == "op" and v == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "name":
            if self.peek()[1] == "(" and self.peek()[0] == "op":
                self.take()
                args = self.arguments()
                return self.function(v, args, pos)
            if v == EPS:
                return EPS_SYM
            if v == "pi":
                return Const(math.pi)
            if v in self.params:
                return Const(float(self.params[v]))
            if v in self.table:
                return Sym(v)
            raise UnknownSymbolError(v, pos)
        if kind == "end":
            raise ParseError("unexpected end of input", self.text, pos)
        raise ParseError(f"unexpected token {v!r}", self.text, pos)

    def arguments(self) -> list[Expr]:
        args = []
        if self.peek()[1] == ")":
            self.take()
            return args
        while True:
            args.append(self.expr())
            kind, v, pos = self.take()
            if v == ")":
                return args
            if v != ",":
                raise ParseError("expected ',' or ')'", self.text, pos)

    def function(self, name: str, args: list[Expr], pos: int) -> Expr:
        def arity(n):
            if len(args) != n:
                raise ParseError(f"{name} takes {n} argument(s), got {len(args)}", self.text, pos)

        if name in UNARY_FUNCS:
            arity(1)
            return call(name, args[0])
        if name in BINARY_FUNCS:
            arity(2)
            return call(name, *args)
        if name == "sabs":
            # smoothed absolute value sqrt(a^2 + eps^2)
            arity(1)
            return call("sqrt", add(power(args[0], Const(2.0)), power(EPS_SYM, Const(2.0))))
        if name in PROFILES:
            if not args:
                raise ParseError(f"{name} needs at least one argument", self.text, pos)
            s = power(args[0], Const(2.0))
            for a in args[1:]:
                s = add(s, power(a, Const(2.0)))
            return profile(name, 0, s)
        if name in ("bumpd", "gaussd"):
            arity(2)
            order = args[0]
            if not _is_const(order) or order.value < 0 or order.value != int(order.value):
                raise ParseError(f"{name} order must be a nonnegative integer", self.text, pos)
            return profile(name[:-1], int(order.value), args[1])
        raise UnknownSymbolError(name, pos)


def parse(text: str, vars: VarTable | Sequence[str] = ()) -> Expr:
    """Parse infix ``text``; every free name must be declared in ``vars`` (``eps`` is implicit)."""
    return _Parser(text, _vartable(vars)).parse()


# ---------------------------------------------------------------------------
# printing


def _num(v: float) -> str:
    if v == math.inf:
        return "(1/0)"
    text = repr(float(v))
    return f"({text})" if v < 0 else text


def to_text(e: Expr) -> str:
    """Fully parenthesised text; ``parse(to_text(e))`` rebuilds ``e``."""
    if isinstance(e, Const):
        return _num(e.value)
    if isinstance(e, Sym):
        return e.name
    if isinstance(e, Unary):
        if e.op == "neg":
            return f"(-{to_text(e.arg)})"
        return f"{e.op}({to_text(e.arg)})"
    if isinstance(e, Binary):
        if e.op in BINARY_FUNCS:
            return f"{e.op}({to_text(e.left)}, {to_text(e.right)})"
        return f"({to_text(e.left)} {e.op} {to_text(e.right)})"
    if isinstance(e, Profile):
        return f"{e.kind}d({e.order}, {to_text(e.arg)})"
    raise TypeError(e)


# ---------------------------------------------------------------------------
# structure queries


def free_symbols(e: Expr) -> frozenset[str]:
    return _free(e)


@lru_cache(maxsize=None)
def _free(e: Expr) -> frozenset[str]:
    if isinstance(e, Sym):
        return frozenset((e.name,))
    if isinstance(e, Const):
        return frozenset()
    if isinstance(e, (Unary, Profile)):
        return _free(e.arg)
    return _free(e.left) | _free(e.right)


def depends_on(e: Expr, name: str) -> bool:
    return name in _free(e)


def substitute(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    """Replace symbols by expressions, rebuilding through the folding constructors."""
    if isinstance(e, Sym):
        return mapping.get(e.name, e)
    if isinstance(e, Const):
        return e
    if isinstance(e, Unary):
        a = substitute(e.arg, mapping)
        return neg(a) if e.op == "neg" else call(e.op, a)
    if isinstance(e, Profile):
        return profile(e.kind, e.order, substitute(e.arg, mapping))
    return _rebuild(e.op, substitute(e.left, mapping), substitute(e.right, mapping))


def _rebuild(op: str, a: Expr, b: Expr) -> Expr:
    if op == "+":
        return add(a, b)
    if op == "-":
        return sub(a, b)
    if op == "*":
        return mul(a, b)
    if op == "/":
        return div(a, b)
    if op == "^":
        return power(a, b)
    return call(op, a, b)


# ---------------------------------------------------------------------------
# differentiation


def differentiate(e: Expr, var: str, vars: VarTable | Sequence[str] | None = None) -> Expr:
    """Exact derivative of ``e`` with respect to ``var``.

    When ``vars`` is given, ``var`` must be declared there (``eps`` is always allowed).
    """
    if vars is not None and var != EPS and var not in _vartable(vars):
        raise UnknownSymbolError(var)
    return _diff(e, var)


@lru_cache(maxsize=65536)
def _diff(e: Expr, v: str) -> Expr:
    if not depends_on(e, v):
        return ZERO
    if isinstance(e, Sym):
        return ONE
    if isinstance(e, Profile):
        return mul(profile(e.kind, e.order + 1, e.arg), _diff(e.arg, v))
    if isinstance(e, Unary):
        a = e.arg
        da = _diff(a, v)
        op = e.op
        if op == "neg":
            return neg(da)
        if op == "sin":
            outer = call("cos", a)
        elif op == "cos":
            outer = neg(call("sin", a))
        elif op == "tan":
            outer = add(ONE, power(call("tan", a), Const(2.0)))
        elif op == "exp":
            outer = e
        elif op == "log":
            return div(da, a)
        elif op == "sqrt":
            return div(da, mul(Const(2.0), e))
        elif op == "abs":
            outer = div(a, e)
        elif op == "sinh":
            outer = call("cosh", a)
        elif op == "cosh":
            outer = call("sinh", a)
        elif op == "tanh":
            outer = sub(ONE, power(e, Const(2.0)))
        elif op == "atan":
            outer = div(ONE, add(ONE, power(a, Const(2.0))))
        else:  # pragma: no cover
            raise ExprError(f"no derivative rule for {op}")
        return mul(outer, da)
    a, b = e.left, e.right
    op = e.op
    if op == "+":
        return add(_diff(a, v), _diff(b, v))
    if op == "-":
        return sub(_diff(a, v), _diff(b, v))
    if op == "*":
        return add(mul(_diff(a, v), b), mul(a, _diff(b, v)))
    if op == "/":
        return sub(div(_diff(a, v), b), div(mul(a, _diff(b, v)), power(b, Const(2.0))))
    if op == "^":
        if not depends_on(b, v):
            return mul(mul(b, power(a, sub(b, ONE))), _diff(a, v))
        # a^b = exp(b log a)
        return mul(e, add(mul(_diff(b, v), call("log", a)), div(mul(b, _diff(a, v)), a)))
    if op == "atan2":
        # d atan2(y, x) = (x dy - y dx) / (x^2 + y^2)
        num = sub(mul(b, _diff(a, v)), mul(a, _diff(b, v)))
        return div(num, add(power(a, Const(2.0)), power(b, Const(2.0))))
    raise ExprError(f"no derivative rule for {op}")  # pragma: no cover


def gradient(e: Expr, names: Sequence[str]) -> list[Expr]:
    return [_diff(e, n) for n in names]


# ---------------------------------------------------------------------------
# evaluation


def _bump_poly(order: int) -> np.polynomial.Polynomial:
    # d^k/ds^k exp(-t) with t = 1/(1-s) equals P_k(t) exp(-t); dt/ds = t^2
    return _BUMP_POLYS[order] if order < len(_BUMP_POLYS) else _extend_bump(order)


_BUMP_POLYS = [np.polynomial.Polynomial([1.0])]


def _extend_bump(order: int):
    t2 = np.polynomial.Polynomial([0.0, 0.0, 1.0])
    while len(_BUMP_POLYS) <= order:
        p = _BUMP_POLYS[-1]
        _BUMP_POLYS.append(t2 * (p.deriv() - p))
    return _BUMP_POLYS[order]


def _profile_value(kind: str, order: int, s: np.ndarray) -> np.ndarray:
    if kind == "gauss":
        return (-1.0) ** order * np.exp(-s)
    out = np.zeros(np.shape(s))
    inside = s < 1.0
    if np.any(inside):
        t = 1.0 / (1.0 - s[inside])
        vals = np.zeros_like(t)
        # t^(2k) e^{-t} underflows well before t = 700
        ok = t < 700.0
        vals[ok] = _bump_poly(order)(t[ok]) * np.exp(-t[ok])
        out[inside] = vals
    return out


def _domain(msg: str):
    raise ExprDomainError(msg)


def _ev(e: Expr, env: Mapping[str, np.ndarray]):
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Sym):
        try:
            return env[e.name]
        except KeyError:
            raise UnknownSymbolError(e.name) from None
    if isinstance(e, Profile):
        s = np.asarray(_ev(e.arg, env), dtype=float)
        return _profile_value(e.kind, e.order, np.atleast_1d(s)).reshape(np.shape(s))
    if isinstance(e, Unary):
        a = _ev(e.arg, env)
        op = e.op
        if op == "neg":
            return -a
        if op == "log":
            if np.any(np.asarray(a) <= 0):
                _domain(f"log of nonpositive value in {to_text(e)}")
            return np.log(a)
        if op == "sqrt":
            if np.any(np.asarray(a) < 0):
                _domain(f"sqrt of negative value in {to_text(e)}")
            return np.sqrt(a)
        if op == "atan":
            return np.arctan(a)
        return getattr(np, op)(a)
    a = _ev(e.left, env)
    b = _ev(e.right, env)
    op = e.op
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        if np.any(np.asarray(b) == 0):
            _domain(f"division by zero in {to_text(e)}")
        return a / b
    if op == "^":
        a_arr = np.asarray(a, dtype=float)
        b_arr = np.asarray(b, dtype=float)
        if np.any((a_arr == 0) & (b_arr < 0)):
            _domain(f"zero raised to a negative power in {to_text(e)}")
        if np.any((a_arr < 0) & (np.floor(b_arr) != b_arr)):
            _domain(f"negative base with non-integer exponent in {to_text(e)}")
        return np.power(a_arr, b_arr)
    if op == "atan2":
        return np.arctan2(a, b)
    raise ExprError(op)  # pragma: no cover


_DERIV = {
    "sin": np.cos,
    "cos": np.sin,
    "tan": lambda a: 1.0 + np.tan(a) ** 2,
    "exp": np.exp,
    "sinh": np.cosh,
    "cosh": np.sinh,
    "tanh": lambda a: 1.0 - np.tanh(a) ** 2,
    "atan": lambda a: 1.0 / (1.0 + a * a),
}


def _evm(e: Expr, env: Mapping[str, np.ndarray], menv: Mapping[str, np.ndarray]):
    """Value together with a first-order bound on accumulated rounding (in units of the roundoff)."""
    if isinstance(e, Const):
        return e.value, abs(e.value)
    if isinstance(e, Sym):
        v = _ev(e, env)
        return v, (menv[e.name] if e.name in menv else np.abs(v))
    if isinstance(e, Profile):
        s, ms = _evm(e.arg, env, menv)
        s = np.asarray(s, dtype=float)
        v = _profile_value(e.kind, e.order, np.atleast_1d(s)).reshape(np.shape(s))
        d = _profile_value(e.kind, e.order + 1, np.atleast_1d(s)).reshape(np.shape(s))
        return v, np.abs(v) + np.abs(d) * ms
    if isinstance(e, Unary):
        a, ma = _evm(e.arg, env, menv)
        op = e.op
        if op == "neg":
            return -a, ma
        v = _ev(Unary(op, Sym("__a")), {"__a": a})
        if op == "abs":
            return v, ma
        if op == "log":
            return v, np.abs(v) + ma / np.abs(a)
        if op == "sqrt":
            return v, np.abs(v) + np.where(v > 0, ma / (2 * np.where(v > 0, v, 1.0)), np.sqrt(ma))
        return v, np.abs(v) + np.abs(_DERIV[op](a)) * ma
    a, ma = _evm(e.left, env, menv)
    b, mb = _evm(e.right, env, menv)
    v = _ev(Binary(e.op, Sym("__a"), Sym("__b")), {"__a": a, "__b": b})
    op = e.op
    if op in "+-":
        return v, np.abs(v) + ma + mb
    if op == "*":
        return v, np.abs(v) + ma * np.abs(b) + np.abs(a) * mb
    if op == "/":
        return v, np.abs(v) + (ma + np.abs(v) * mb) / np.abs(b)
    if op == "^":
        a_arr = np.asarray(a, dtype=float)
        lg = np.log(np.where(a_arr > 0, a_arr, 1.0))
        da = np.abs(b) * np.abs(np.power(np.where(a_arr != 0, a_arr, 1.0), np.asarray(b, dtype=float) - 1.0))
        da = np.where(a_arr != 0, da, 0.0)
        return v, np.abs(v) + da * ma + np.abs(v * lg) * mb
    if op == "atan2":
        r2 = a * a + b * b
        r2 = np.where(r2 > 0, r2, 1.0)
        return v, np.abs(v) + (np.abs(b) * ma + np.abs(a) * mb) / r2
    raise ExprError(op)  # pragma: no cover


def eval_magnitude(e: Expr, env: Mapping[str, np.ndarray | float], mags: Mapping[str, np.ndarray] | None = None):
    """``(value, mag)``: the value and the size of the quantities it was computed from.

    A result smaller than ``1e-12 * mag`` is indistinguishable from exact
    cancellation in double precision.  ``mags`` overrides the magnitude of
    input symbols that were themselves computed with cancellation.
    """
    with np.errstate(over="ignore", under="ignore", invalid="ignore", divide="ignore"):
        v, m = _evm(e, env, mags or {})
    if np.any(np.isnan(v)):
        raise ExprDomainError(f"NaN produced while evaluating {to_text(e)}")
    return v, np.nan_to_num(np.asarray(m, dtype=float), nan=np.inf)


def eval_env(e: Expr, env: Mapping[str, np.ndarray | float]):
    """Evaluate with an environment of broadcastable arrays (``eps`` included)."""
    with np.errstate(over="ignore", under="ignore", invalid="ignore", divide="ignore"):
        out = _ev(e, env)
    if np.any(np.isnan(out)):
        raise ExprDomainError(f"NaN produced while evaluating {to_text(e)}")
    return out


def evaluate(e: Expr, eps: float, point: Sequence[float] = (), vars: VarTable | Sequence[str] = ()) -> float:
    """Scalar evaluation at ``eps`` and ``point`` (ordered like ``vars``)."""
    table = _vartable(vars)
    if len(point) != len(table):
        raise ExprError(f"point has {len(point)} coordinates, variable table has {len(table)}")
    if not 0.0 < eps <= 1.0:
        raise ExprError(f"eps must lie in (0, 1], got {eps}")
    env = {name: float(x) for name, x in zip(table.names, point)}
    env[EPS] = float(eps)
    return float(eval_env(e, env))


def eval_points(e: Expr, eps, X: np.ndarray, names: Sequence[str]) -> np.ndarray:
    """Evaluate at the rows of ``X`` (last axis ordered like ``names``); ``eps`` broadcasts."""
    X = np.asarray(X, dtype=float)
    env = {name: X[..., i] for i, name in enumerate(names)}
    env[EPS] = eps
    out = eval_env(e, env)
    return np.broadcast_to(out, np.broadcast_shapes(np.shape(out), X.shape[:-1], np.shape(eps))).astype(float)
