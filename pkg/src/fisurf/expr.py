"""Closed-form scalar fields of two variables.

A small fixed expression language over the variables x and y:

    literals        decimal, optional fraction and exponent (1.5, 2e-3)
    variables       x, y
    operators       + - * / ^ and unary minus
    functions       sin cos exp log abs sqrt (1 argument), min max (2)

Precedence, tightest first: ^ , unary minus, * /, + -. All binary
operators associate left (so 2^3^2 parses as (2^3)^2); parentheses
override. Evaluation is real-valued and total on success: log of a
non-positive number, sqrt of a negative, division by zero, a negative
base under a non-integer exponent, and overflow are domain errors
reported with the offending node's source offset.

ASTs are immutable after parse; evaluation is pure and accepts either
scalars or numpy arrays (broadcast elementwise).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ExprDomainError, ExprSyntaxError, ValidationError

UNARY_FUNCS = {
    "sin": (math.sin, np.sin),
    "cos": (math.cos, np.cos),
    "exp": (math.exp, np.exp),
    "log": (math.log, np.log),
    "abs": (abs, np.abs),
    "sqrt": (math.sqrt, np.sqrt),
}
BINARY_FUNCS = {"min", "max"}
VARIABLES = ("x", "y")

_ADD, _MUL, _UNARY, _POW = 10, 20, 25, 30
_BINARY_PREC = {"+": _ADD, "-": _ADD, "*": _MUL, "/": _MUL, "^": _POW}


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Num:
    value: float
    offset: int = 0


@dataclass(frozen=True)
class Var:
    name: str
    offset: int = 0


@dataclass(frozen=True)
class Neg:
    operand: "ExprAst"
    offset: int = 0


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "ExprAst"
    right: "ExprAst"
    offset: int = 0


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple
    offset: int = 0


ExprAst = Num | Var | Neg | BinOp | Call


# ---------------------------------------------------------------------------
# Lexer


@dataclass(frozen=True)
class _Token:
    kind: str  # num | ident | op | lparen | rparen | comma | end
    text: str
    offset: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            while j < n and (text[j].isdigit() or text[j] == "."):
                j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            lit = text[i:j]
            try:
                value = float(lit)
            except ValueError:
                raise ExprSyntaxError(f"bad number literal {lit!r}", i)
            if not math.isfinite(value):
                raise ExprSyntaxError(f"number literal {lit!r} overflows", i)
            tokens.append(_Token("num", lit, i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("ident", text[i:j], i))
            i = j
            continue
        if c in "+-*/^":
            tokens.append(_Token("op", c, i))
            i += 1
            continue
        if c == "(":
            tokens.append(_Token("lparen", c, i))
            i += 1
            continue
        if c == ")":
            tokens.append(_Token("rparen", c, i))
            i += 1
            continue
        if c == ",":
            tokens.append(_Token("comma", c, i))
            i += 1
            continue
        raise ExprSyntaxError(f"unexpected character {c!r}", i)
    tokens.append(_Token("end", "", n))
    return tokens


# ---------------------------------------------------------------------------
# Parser (precedence climbing)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, what: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ExprSyntaxError(f"expected {what}", tok.offset)
        return self.advance()

    def parse(self) -> ExprAst:
        node = self.expression(0)
        tok = self.peek()
        if tok.kind != "end":
            raise ExprSyntaxError(f"unexpected {tok.text!r}", tok.offset)
        return node

    def expression(self, min_prec: int) -> ExprAst:
        node = self.prefix()
        while True:
            tok = self.peek()
            if tok.kind != "op":
                break
            prec = _BINARY_PREC[tok.text]
            if prec <= min_prec:
                break
            self.advance()
            right = self.expression(prec)  # rbp == lbp: left associative
            node = BinOp(tok.text, node, right, tok.offset)
        return node

    def prefix(self) -> ExprAst:
        tok = self.advance()
        if tok.kind == "num":
            return Num(float(tok.text), tok.offset)
        if tok.kind == "op" and tok.text == "-":
            return Neg(self.expression(_UNARY), tok.offset)
        if tok.kind == "op" and tok.text == "+":
            return self.expression(_UNARY)
        if tok.kind == "lparen":
            node = self.expression(0)
            self.expect("rparen", "')'")
            return node
        if tok.kind == "ident":
            name = tok.text
            if name in VARIABLES:
                return Var(name, tok.offset)
            if name in UNARY_FUNCS or name in BINARY_FUNCS:
                self.expect("lparen", "'(' after function name")
                args = [self.expression(0)]
                while self.peek().kind == "comma":
                    self.advance()
                    args.append(self.expression(0))
                self.expect("rparen", "')'")
                arity = 2 if name in BINARY_FUNCS else 1
                if len(args) != arity:
                    raise ExprSyntaxError(
                        f"{name} expects {arity} argument{'s' if arity > 1 else ''},"
                        f" got {len(args)}",
                        tok.offset,
                    )
                return Call(name, tuple(args), tok.offset)
            raise ExprSyntaxError(f"unknown identifier {name!r}", tok.offset)
        if tok.kind == "end":
            raise ExprSyntaxError("unexpected end of input", tok.offset)
        raise ExprSyntaxError(f"unexpected {tok.text!r}", tok.offset)


def parse(text: str) -> ExprAst:
    """Parse expression text into an immutable AST."""
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Evaluation


def _is_array(v) -> bool:
    return isinstance(v, np.ndarray)


def _check_finite(value, offset: int, what: str):
    if _is_array(value):
        if not np.all(np.isfinite(value)):
            raise ExprDomainError(f"{what} produced a non-finite value", offset)
    elif not math.isfinite(value):
        raise ExprDomainError(f"{what} produced a non-finite value", offset)
    return value


def _pow(base, exponent, offset: int):
    if _is_array(base) or _is_array(exponent):
        b = np.asarray(base, dtype=float)
        e = np.asarray(exponent, dtype=float)
        neg = b < 0
        if np.any(neg):
            frac = e != np.floor(e)
            if np.any(np.broadcast_to(frac, np.broadcast_shapes(b.shape, e.shape))
                      & np.broadcast_to(neg, np.broadcast_shapes(b.shape, e.shape))):
                raise ExprDomainError(
                    "negative base with non-integer exponent", offset)
        if np.any((b == 0) & np.broadcast_to(e < 0, np.broadcast_shapes(b.shape, e.shape))):
            raise ExprDomainError("zero base with negative exponent", offset)
        with np.errstate(over="ignore", invalid="ignore"):
            out = np.power(b, e)
        return _check_finite(out, offset, "power")
    if base < 0 and exponent != math.floor(exponent):
        raise ExprDomainError("negative base with non-integer exponent", offset)
    if base == 0 and exponent < 0:
        raise ExprDomainError("zero base with negative exponent", offset)
    try:
        out = math.pow(base, exponent)
    except OverflowError:
        raise ExprDomainError("power produced a non-finite value", offset)
    return _check_finite(out, offset, "power")


def _call(name: str, args, offset: int):
    if name == "min":
        return np.minimum(args[0], args[1]) if (_is_array(args[0]) or _is_array(args[1])) \
            else min(args[0], args[1])
    if name == "max":
        return np.maximum(args[0], args[1]) if (_is_array(args[0]) or _is_array(args[1])) \
            else max(args[0], args[1])
    (scalar_fn, array_fn) = UNARY_FUNCS[name]
    v = args[0]
    if name == "log":
        bad = np.any(np.asarray(v) <= 0) if _is_array(v) else v <= 0
        if bad:
            raise ExprDomainError("log of a non-positive value", offset)
    if name == "sqrt":
        bad = np.any(np.asarray(v) < 0) if _is_array(v) else v < 0
        if bad:
            raise ExprDomainError("sqrt of a negative value", offset)
    if _is_array(v):
        with np.errstate(over="ignore", invalid="ignore"):
            out = array_fn(v)
        return _check_finite(out, offset, name)
    try:
        out = scalar_fn(v)
    except (OverflowError, ValueError):
        raise ExprDomainError(f"{name} produced a non-finite value", offset)
    return _check_finite(out, offset, name)


def evaluate(ast: ExprAst, x, y):
    """Evaluate at (x, y); scalars in, scalar out; arrays broadcast."""
    if isinstance(ast, Num):
        return ast.value
    if isinstance(ast, Var):
        return x if ast.name == "x" else y
    if isinstance(ast, Neg):
        return -evaluate(ast.operand, x, y)
    if isinstance(ast, BinOp):
        left = evaluate(ast.left, x, y)
        right = evaluate(ast.right, x, y)
        op = ast.op
        if op == "+":
            return left + right
        if op == "-":
            return left - right
        if op == "*":
            return left * right
        if op == "/":
            bad = np.any(np.asarray(right) == 0) if _is_array(right) else right == 0
            if bad:
                raise ExprDomainError("division by zero", ast.offset)
            return _check_finite(left / right, ast.offset, "division")
        return _pow(left, right, ast.offset)
    return _call(ast.name, [evaluate(a, x, y) for a in ast.args], ast.offset)


# ---------------------------------------------------------------------------
# Printing


def _prec_of(node: ExprAst) -> int:
    if isinstance(node, BinOp):
        return _BINARY_PREC[node.op]
    if isinstance(node, Neg):
        return _UNARY
    return 100


def to_text(ast: ExprAst) -> str:
    """Render an AST back to parseable text (round-trips through parse)."""
    if isinstance(ast, Num):
        return repr(ast.value)
    if isinstance(ast, Var):
        return ast.name
    if isinstance(ast, Neg):
        inner = to_text(ast.operand)
        if _prec_of(ast.operand) < _UNARY:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(ast, BinOp):
        prec = _BINARY_PREC[ast.op]
        left = to_text(ast.left)
        if _prec_of(ast.left) < prec:
            left = f"({left})"
        right = to_text(ast.right)
        if _prec_of(ast.right) <= prec:
            right = f"({right})"
        return f"{left}{ast.op}{right}"
    return f"{ast.name}({','.join(to_text(a) for a in ast.args)})"


# ---------------------------------------------------------------------------
# Sampled field metadata


@dataclass(frozen=True)
class FieldMeta:
    """Sampled |field| extrema and a finite-difference slope estimate.

    All three numbers come from an (resolution+1)^2 lattice that always
    includes the rectangle's corners; the Lipschitz figure is an estimate,
    not a proven bound.
    """

    lipschitz_estimate: float
    sample_resolution: int
    min_abs: float
    max_abs: float

    def __post_init__(self):
        if not (0 <= self.min_abs <= self.max_abs):
            raise ValueError("need 0 <= min_abs <= max_abs")
        if self.lipschitz_estimate < 0:
            raise ValueError("lipschitz_estimate must be >= 0")


def sample_lattice(rect, resolution: int):
    """Coordinate vectors of the (resolution+1)^2 sampling lattice.

    Endpoints are hit exactly (two-sided interpolation form).
    """
    x0, x1, y0, y1 = rect
    t = np.arange(resolution + 1) / resolution
    return x0 * (1 - t) + x1 * t, y0 * (1 - t) + y1 * t


def field_meta_of(fn, rect, resolution: int) -> FieldMeta:
    """FieldMeta of an arbitrary callable field over rect = (x0,x1,y0,y1)."""
    if resolution < 2:
        raise ValidationError(f"sampling resolution must be >= 2, got {resolution}")
    xs, ys = sample_lattice(rect, resolution)
    values = np.asarray(fn(xs[:, None], ys[None, :]), dtype=float)
    values = np.broadcast_to(values, (len(xs), len(ys)))
    absv = np.abs(values)
    dx = abs(rect[1] - rect[0]) / resolution
    dy = abs(rect[3] - rect[2]) / resolution
    lip = 0.0
    if dx > 0:
        lip = max(lip, float(np.abs(np.diff(values, axis=0)).max() / dx))
    if dy > 0:
        lip = max(lip, float(np.abs(np.diff(values, axis=1)).max() / dy))
    return FieldMeta(
        lipschitz_estimate=lip,
        sample_resolution=resolution,
        min_abs=float(absv.min()),
        max_abs=float(absv.max()),
    )


def field_meta(ast: ExprAst, rect, resolution: int) -> FieldMeta:
    """Sampled extrema of |expr| and Lipschitz estimate over a rectangle."""
    return field_meta_of(lambda X, Y: evaluate(ast, X, Y), rect, resolution)
