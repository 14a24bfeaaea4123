"""Objective functions of the coordinates ``x, y, z`` written as text.

Grammar (standard precedence, ``^`` binds tighter than unary minus and is
right-associative)::

    expr  := term (("+"|"-") term)*
    term  := unary (("*"|"/") unary)*
    unary := "-" unary | power
    power := atom ("^" unary)?
    atom  := NUMBER | IDENT | IDENT "(" expr ("," expr)* ")" | "(" expr ")"
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

VARIABLES = ("x", "y", "z")


class ExprError(ValueError):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifierError(ExprSyntaxError):
    pass


class ArityError(ExprSyntaxError):
    pass


class EvaluationError(ExprError):
    """Arithmetic domain error; carries the offending subexpression."""

    def __init__(self, message: str, node: "Expr"):
        super().__init__(f"{message} in {to_text(node)}")
        self.node = node


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str

    @property
    def index(self) -> int:
        return VARIABLES.index(self.name)


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple["Expr", ...]


Expr = Union[Num, Var, Neg, BinOp, Call]


def _sqrt(node, v):
    if v < 0:
        raise EvaluationError("square root of a negative number", node)
    return math.sqrt(v)


def _exp(node, v):
    try:
        return math.exp(v)
    except OverflowError:
        raise EvaluationError("exp overflow", node) from None


# name -> (min arity, max arity or None, implementation)
FUNCTIONS = {
    "sqrt": (1, 1, lambda node, a: _sqrt(node, a[0])),
    "abs": (1, 1, lambda node, a: abs(a[0])),
    "sin": (1, 1, lambda node, a: math.sin(a[0])),
    "cos": (1, 1, lambda node, a: math.cos(a[0])),
    "exp": (1, 1, lambda node, a: _exp(node, a[0])),
    "min": (2, None, lambda node, a: min(a)),
    "max": (2, None, lambda node, a: max(a)),
}

_TOKEN = re.compile(r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<ident>[a-z]+)|(?P<op>[-+*/^(),]))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            if text[pos:].strip() == "":
                break
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ExprSyntaxError(f"unexpected character {text[start]!r}", start)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.take()
        if text != value or kind != "op":
            got = "end of input" if kind == "end" else repr(text)
            raise ExprSyntaxError(f"expected {value!r}, got {got}", pos)

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        kind, text, pos = self.take()
        if kind == "num":
            return Num(float(text))
        if kind == "ident":
            if self.peek()[:2] == ("op", "("):
                if text not in FUNCTIONS:
                    raise UnknownIdentifierError(f"unknown function {text!r}", pos)
                self.take()
                args = [self.expr()]
                while self.peek()[:2] == ("op", ","):
                    self.take()
                    args.append(self.expr())
                self.expect(")")
                lo, hi, _ = FUNCTIONS[text]
                if len(args) < lo or (hi is not None and len(args) > hi):
                    raise ArityError(f"{text} takes {lo if lo == hi else f'at least {lo}'} "
                                     f"argument(s), got {len(args)}", pos)
                return Call(text, tuple(args))
            if text in VARIABLES:
                return Var(text)
            if text in FUNCTIONS:
                raise ArityError(f"function {text!r} needs arguments", pos)
            raise UnknownIdentifierError(f"unknown identifier {text!r}", pos)
        if (kind, text) == ("op", "("):
            node = self.expr()
            self.expect(")")
            return node
        got = "end of input" if kind == "end" else repr(text)
        raise ExprSyntaxError(f"unexpected {got}", pos)


def parse_expression(text: str) -> Expr:
    if not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    p = _Parser(text)
    node = p.expr()
    kind, tok, pos = p.peek()
    if kind != "end":
        raise ExprSyntaxError(f"unexpected {tok!r}", pos)
    return node


def parse_expression_list(text: str) -> list[Expr]:
    """Parse comma-separated expressions, e.g. a start point ``"5/8, sqrt(3)/8"``."""
    if not text.strip():
        raise ExprSyntaxError("empty expression list", 0)
    p = _Parser(text)
    items = [p.expr()]
    while p.peek()[:2] == ("op", ","):
        p.take()
        items.append(p.expr())
    kind, tok, pos = p.peek()
    if kind != "end":
        raise ExprSyntaxError(f"unexpected {tok!r}", pos)
    return items


def variables(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Neg):
        return variables(e.operand)
    if isinstance(e, BinOp):
        return variables(e.left) | variables(e.right)
    if isinstance(e, Call):
        return set().union(*(variables(a) for a in e.args))
    return set()


def _power(node, base, exponent):
    if base == 0.0 and exponent < 0:
        raise EvaluationError("division by zero", node)
    if base < 0 and not float(exponent).is_integer():
        raise EvaluationError("non-integer power of a negative number", node)
    try:
        return math.pow(base, exponent)
    except OverflowError:
        raise EvaluationError("overflow", node) from None


def evaluate(e: Expr, p: Sequence[float] = ()) -> float:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        if e.index >= len(p):
            raise EvaluationError(f"variable {e.name} needs a {e.index + 1}-dimensional point", e)
        return float(p[e.index])
    if isinstance(e, Neg):
        return -evaluate(e.operand, p)
    if isinstance(e, BinOp):
        a = evaluate(e.left, p)
        b = evaluate(e.right, p)
        if e.op == "+":
            r = a + b
        elif e.op == "-":
            r = a - b
        elif e.op == "*":
            r = a * b
        elif e.op == "/":
            if b == 0.0:
                raise EvaluationError("division by zero", e)
            r = a / b
        else:
            r = _power(e, a, b)
        if not math.isfinite(r):
            raise EvaluationError("non-finite result", e)
        return r
    if isinstance(e, Call):
        args = [evaluate(a, p) for a in e.args]
        return FUNCTIONS[e.name][2](e, args)
    raise TypeError(f"not an expression node: {e!r}")


def evaluate_constant(text_or_expr) -> float:
    e = parse_expression(text_or_expr) if isinstance(text_or_expr, str) else text_or_expr
    free = variables(e)
    if free:
        raise ExprError(f"expected a constant, found variable(s) {', '.join(sorted(free))}")
    return evaluate(e)


def parse_point(text: str, dimension: int | None = None) -> np.ndarray:
    values = [evaluate_constant(e) for e in parse_expression_list(text)]
    if dimension is not None and len(values) != dimension:
        raise ExprError(f"expected {dimension} coordinates, got {len(values)}")
    return np.array(values)


class FieldEvaluationError(ExprError):
    def __init__(self, vertex: int, cause: EvaluationError):
        super().__init__(f"at vertex {vertex}: {cause}")
        self.vertex = vertex


def field_from_expr(e: Expr, g) -> np.ndarray:
    """Evaluate ``e`` at every vertex of graph ``g``; returns values indexed by vertex id."""
    d = g.dimension
    extra = [v for v in variables(e) if VARIABLES.index(v) >= d]
    if extra:
        raise ExprError(f"variable(s) {', '.join(sorted(extra))} not available in dimension {d}")
    out = np.empty(g.n_vertices)
    for i, p in enumerate(g.coords.tolist()):
        try:
            out[i] = evaluate(e, p)
        except EvaluationError as exc:
            raise FieldEvaluationError(i, exc) from exc
    return out


# pretty printing: binding strength of each node kind
_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4, "atom": 5}


def _prec(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return _PREC["neg"]
    return _PREC["atom"]


def _num_text(v: float) -> str:
    if v.is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def to_text(e: Expr) -> str:
    """Render with the minimum parentheses needed to reparse to the same tree."""
    def wrap(sub, ok):
        s = to_text(sub)
        return s if ok else f"({s})"

    if isinstance(e, Num):
        return _num_text(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.name}({', '.join(to_text(a) for a in e.args)})"
    if isinstance(e, Neg):
        return "-" + wrap(e.operand, _prec(e.operand) >= _PREC["neg"])
    p = _PREC[e.op]
    if e.op == "^":
        return f"{wrap(e.left, _prec(e.left) == _PREC['atom'])}^{wrap(e.right, _prec(e.right) >= _PREC['neg'])}"
    return f"{wrap(e.left, _prec(e.left) >= p)} {e.op} {wrap(e.right, _prec(e.right) > p)}"
