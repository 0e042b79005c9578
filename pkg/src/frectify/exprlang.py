"""Scalar expressions of one variable: parse, print, evaluate, differentiate.

The grammar is conventional infix with ``^`` for powers (right associative,
binding tighter than unary minus, which binds tighter than ``*``/``/``,
which bind tighter than ``+``/``-``), parentheses, and single-argument
function application ``name(expr)``. The only variable is ``t``.

Supported functions: sin, cos, tan, sec, exp, ln, sqrt, atan, asin, acos,
abs, sign. ``sign`` exists so that the derivative of ``abs`` stays inside
the node set; sign(0) evaluates to 0, which also fixes d|x|/dx at 0 to 0.

Expression objects are immutable and hashable; evaluation is pure, so they
are safe to share across threads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import EvalDomainError, ExprSyntaxError, UnknownFunctionError

__all__ = [
    "Expr",
    "Const",
    "Var",
    "Neg",
    "BinOp",
    "Func",
    "FUNCTION_NAMES",
    "parse",
    "to_text",
    "evaluate",
    "evaluate_many",
    "differentiate",
]


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Expr:
    """Base node; concrete nodes below."""

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True)
class Const(Expr):
    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))


@dataclass(frozen=True)
class Var(Expr):
    pass


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str  # one of + - * / ^
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class Func(Expr):
    name: str
    arg: Expr


FUNCTION_NAMES = (
    "sin", "cos", "tan", "sec", "exp", "ln", "sqrt",
    "atan", "asin", "acos", "abs", "sign",
)


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    """Return (kind, text, byte offset) triples."""
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            # skip leading whitespace before reporting
            bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            if bad >= len(text):
                break
            raise ExprSyntaxError(f"unexpected character {text[bad]!r}", bad)
        if m.lastgroup == "num":
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.lastgroup == "name":
            tokens.append(("name", m.group("name"), m.start("name")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


# ---------------------------------------------------------------------------
# Parser (precedence climbing)
# ---------------------------------------------------------------------------

_BIN_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}
_UNARY_PREC = 3  # between mul/div and pow

_PRIMARY_EXPECT = ("number", "'('", "'-'", "'t'", "function name")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def parse(self) -> Expr:
        e = self.parse_expr(0)
        kind, text, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(
                f"unexpected token {text!r}", off,
                ("operator", "end of input"),
            )
        return e

    def parse_expr(self, min_prec: int) -> Expr:
        lhs = self.parse_unary()
        while True:
            kind, text, off = self.peek()
            if kind != "op" or text not in _BIN_PREC:
                return lhs
            prec = _BIN_PREC[text]
            if prec < min_prec:
                return lhs
            self.advance()
            if text == "^":
                # right associative; allow unary minus in the exponent
                rhs = self.parse_expr(prec)
            else:
                rhs = self.parse_expr(prec + 1)
            lhs = BinOp(text, lhs, rhs)

    def parse_unary(self) -> Expr:
        kind, text, off = self.peek()
        if kind == "op" and text == "-":
            self.advance()
            # pow binds tighter than unary minus: -t^2 == -(t^2)
            return Neg(self.parse_expr(_UNARY_PREC + 1))
        return self.parse_atom()

    def parse_atom(self) -> Expr:
        kind, text, off = self.advance()
        if kind == "num":
            return Const(float(text))
        if kind == "name":
            if text == "t":
                return Var()
            nxt_kind, nxt_text, nxt_off = self.peek()
            if nxt_kind == "op" and nxt_text == "(":
                if text not in FUNCTION_NAMES:
                    raise UnknownFunctionError(text, off)
                self.advance()
                arg = self.parse_expr(0)
                self.expect(")")
                return Func(text, arg)
            raise ExprSyntaxError(
                f"unknown identifier {text!r}", off, ("'t'", "function call")
            )
        if kind == "op" and text == "(":
            e = self.parse_expr(0)
            self.expect(")")
            return e
        shown = text if text else "end of input"
        raise ExprSyntaxError(f"unexpected {shown!r}", off, _PRIMARY_EXPECT)

    def expect(self, op: str):
        kind, text, off = self.advance()
        if kind != "op" or text != op:
            raise ExprSyntaxError(
                f"unexpected {(text or 'end of input')!r}", off, (f"'{op}'",)
            )


def parse(text: str) -> Expr:
    """Parse ``text`` into an expression tree."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Pretty printer
# ---------------------------------------------------------------------------

def _fmt_const(v: float) -> str:
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def _print(e: Expr) -> tuple[str, int]:
    """Return (text, precedence of the outermost construct)."""
    if isinstance(e, Const):
        return _fmt_const(e.value), 9
    if isinstance(e, Var):
        return "t", 9
    if isinstance(e, Func):
        return f"{e.name}({_print(e.arg)[0]})", 9
    if isinstance(e, Neg):
        txt, prec = _print(e.arg)
        if prec <= _UNARY_PREC:
            txt = f"({txt})"
        return f"-{txt}", _UNARY_PREC
    assert isinstance(e, BinOp)
    prec = _BIN_PREC[e.op]
    ltxt, lprec = _print(e.lhs)
    rtxt, rprec = _print(e.rhs)
    if e.op == "^":
        # right associative; left operand must bind strictly tighter
        if lprec <= prec:
            ltxt = f"({ltxt})"
        if rprec < prec:
            rtxt = f"({rtxt})"
    else:
        if lprec < prec:
            ltxt = f"({ltxt})"
        # +,-,*,/ parse left associative: a right operand at the same
        # precedence must keep its parentheses to round-trip structurally
        if rprec <= prec:
            rtxt = f"({rtxt})"
    return f"{ltxt}{e.op}{rtxt}", prec


def to_text(e: Expr) -> str:
    """Render ``e`` so that ``parse(to_text(e))`` is structurally equal."""
    return _print(e)[0]


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def _check_finite(vals, node: Expr, what: str):
    if not np.all(np.isfinite(vals)):
        raise EvalDomainError(what, to_text(node))


def _eval(e: Expr, t):
    if isinstance(e, Const):
        return np.full_like(t, e.value)
    if isinstance(e, Var):
        return t
    if isinstance(e, Neg):
        return -_eval(e.arg, t)
    if isinstance(e, BinOp):
        a = _eval(e.lhs, t)
        b = _eval(e.rhs, t)
        with np.errstate(all="ignore"):
            if e.op == "+":
                return a + b
            if e.op == "-":
                return a - b
            if e.op == "*":
                return a * b
            if e.op == "/":
                if np.any(b == 0.0):
                    raise EvalDomainError("division by zero", to_text(e))
                return a / b
            out = np.power(a, b)
        _check_finite(out, e, "power outside real domain")
        return out
    assert isinstance(e, Func)
    a = _eval(e.arg, t)
    with np.errstate(all="ignore"):
        if e.name == "sin":
            return np.sin(a)
        if e.name == "cos":
            return np.cos(a)
        if e.name == "tan":
            # the pole is never hit exactly in floating point; treat the
            # one-ulp neighbourhood of odd multiples of pi/2 as the pole
            c = np.cos(a)
            if np.any(np.abs(c) < 1e-15):
                raise EvalDomainError("tan at an odd multiple of pi/2", to_text(e))
            return np.tan(a)
        if e.name == "sec":
            c = np.cos(a)
            if np.any(np.abs(c) < 1e-15):
                raise EvalDomainError("sec at an odd multiple of pi/2", to_text(e))
            return 1.0 / c
        if e.name == "exp":
            out = np.exp(a)
            _check_finite(out, e, "exp overflow")
            return out
        if e.name == "ln":
            if np.any(a <= 0.0):
                raise EvalDomainError("ln of a non-positive value", to_text(e))
            return np.log(a)
        if e.name == "sqrt":
            if np.any(a < 0.0):
                raise EvalDomainError("sqrt of a negative value", to_text(e))
            return np.sqrt(a)
        if e.name == "atan":
            return np.arctan(a)
        if e.name == "asin":
            if np.any(np.abs(a) > 1.0):
                raise EvalDomainError("asin outside [-1, 1]", to_text(e))
            return np.arcsin(a)
        if e.name == "acos":
            if np.any(np.abs(a) > 1.0):
                raise EvalDomainError("acos outside [-1, 1]", to_text(e))
            return np.arccos(a)
        if e.name == "abs":
            return np.abs(a)
        if e.name == "sign":
            return np.sign(a)
    raise AssertionError(f"unhandled function {e.name}")  # pragma: no cover


def evaluate(e: Expr, t: float) -> float:
    """Evaluate ``e`` at the scalar ``t`` in IEEE double precision."""
    out = _eval(e, np.float64(t))
    return float(out)


def evaluate_many(e: Expr, t: np.ndarray) -> np.ndarray:
    """Vectorised evaluation on a numpy array of parameter values."""
    return np.asarray(_eval(e, np.asarray(t, dtype=float)))


# ---------------------------------------------------------------------------
# Symbolic differentiation
# ---------------------------------------------------------------------------

def _is_const(e: Expr, v: float | None = None) -> bool:
    return isinstance(e, Const) and (v is None or e.value == v)


def _add(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    return BinOp("+", a, b)


def _sub(a: Expr, b: Expr) -> Expr:
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return Neg(b)
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    return BinOp("-", a, b)


def _mul(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return Const(0.0)
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    return BinOp("*", a, b)


def _div(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0.0):
        return Const(0.0)
    if _is_const(b, 1.0):
        return a
    return BinOp("/", a, b)


def _pow(a: Expr, b: Expr) -> Expr:
    if _is_const(b, 1.0):
        return a
    if _is_const(b, 0.0):
        return Const(1.0)
    return BinOp("^", a, b)


def differentiate(e: Expr) -> Expr:
    """Exact symbolic derivative of ``e`` with respect to ``t``.

    Total over the node set; ``abs`` differentiates to ``sign`` (0 at 0).
    Light constant folding is applied; no canonical form is guaranteed.
    """
    if isinstance(e, Const):
        return Const(0.0)
    if isinstance(e, Var):
        return Const(1.0)
    if isinstance(e, Neg):
        d = differentiate(e.arg)
        return Const(0.0) if _is_const(d, 0.0) else Neg(d)
    if isinstance(e, BinOp):
        da = differentiate(e.lhs)
        db = differentiate(e.rhs)
        if e.op == "+":
            return _add(da, db)
        if e.op == "-":
            return _sub(da, db)
        if e.op == "*":
            return _add(_mul(da, e.rhs), _mul(e.lhs, db))
        if e.op == "/":
            num = _sub(_mul(da, e.rhs), _mul(e.lhs, db))
            return _div(num, _pow(e.rhs, Const(2.0)))
        # power
        if isinstance(e.rhs, Const):
            n = e.rhs.value
            return _mul(_mul(Const(n), _pow(e.lhs, Const(n - 1.0))), da)
        # general a^b = exp(b ln a): a^b * (db ln a + b da / a)
        term = _add(
            _mul(db, Func("ln", e.lhs)),
            _div(_mul(e.rhs, da), e.lhs),
        )
        return _mul(e, term)
    assert isinstance(e, Func)
    a = e.arg
    da = differentiate(a)
    if e.name == "sin":
        inner = Func("cos", a)
    elif e.name == "cos":
        inner = Neg(Func("sin", a))
    elif e.name == "tan":
        inner = _pow(Func("sec", a), Const(2.0))
    elif e.name == "sec":
        inner = _mul(Func("sec", a), Func("tan", a))
    elif e.name == "exp":
        inner = Func("exp", a)
    elif e.name == "ln":
        return _div(da, a)
    elif e.name == "sqrt":
        return _div(da, _mul(Const(2.0), Func("sqrt", a)))
    elif e.name == "atan":
        return _div(da, _add(Const(1.0), _pow(a, Const(2.0))))
    elif e.name == "asin":
        return _div(da, Func("sqrt", _sub(Const(1.0), _pow(a, Const(2.0)))))
    elif e.name == "acos":
        return Neg(_div(da, Func("sqrt", _sub(Const(1.0), _pow(a, Const(2.0))))))
    elif e.name == "abs":
        inner = Func("sign", a)
    elif e.name == "sign":
        return Const(0.0)
    else:  # pragma: no cover
        raise AssertionError(f"unhandled function {e.name}")
    return _mul(inner, da)
