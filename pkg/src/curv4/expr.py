"""Closed-form scalar expressions for metric components.

Grammar (precedence from loosest to tightest)::

    expr    := expr ('+' | '-') expr
             | expr ('*' | '/') expr
             | '-' expr
             | expr '^' expr          (right associative)
             | NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

``^`` binds tighter than unary minus, so ``-x0^2`` is ``-(x0^2)``.  Names are
chart coordinates, declared parameters, ``pi``, or one of the functions
``sin cos tan exp log sqrt sinh cosh tanh atan``.  ``**`` is accepted as a
synonym for ``^``.

Expressions are parsed with a Pratt (top-down operator precedence) parser and
evaluated with :mod:`curv4.jets`, which yields exact first and second
derivatives with respect to the four chart coordinates.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

import numpy as np

from . import jets
from .errors import ArityError, ExprSyntaxError, MissingParameterError, UnknownIdentifierError
from .jets import Jet2

DEFAULT_COORDS = ("x0", "x1", "x2", "x3")


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Coord:
    index: int
    name: str


@dataclass(frozen=True)
class Param:
    name: str


@dataclass(frozen=True)
class Pi:
    pass


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
    func: str
    arg: "Expr"


Expr = Union[Num, Coord, Param, Pi, Neg, BinOp, Call]

# binding powers
_BP = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 40}
_UNARY_BP = 30

_TOKEN = re.compile(
    r"""\s*(?:
        (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
      | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
      | (?P<op>\*\*|[-+*/^(),])
    )""",
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    offset: int


def _tokenize(source):
    pos = 0
    out = []
    n = len(source)
    while pos < n:
        if source[pos:].strip() == "":
            break
        m = _TOKEN.match(source, pos)
        if not m or m.end() == pos:
            k = pos
            while k < n and source[k].isspace():
                k += 1
            raise ExprSyntaxError(f"unexpected character {source[k]!r}", k)
        kind = m.lastgroup
        text = m.group(kind)
        out.append(_Tok(kind, "^" if text == "**" else text, m.start(kind)))
        pos = m.end()
    out.append(_Tok("end", "", n))
    return out


class _Parser:
    def __init__(self, source, coords, params):
        self.toks = _tokenize(source)
        self.i = 0
        self.coords = {name: k for k, name in enumerate(coords)}
        self.params = set(params)

    @property
    def tok(self):
        return self.toks[self.i]

    def advance(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text):
        t = self.tok
        if t.text != text or t.kind == "end":
            raise ExprSyntaxError(f"expected {text!r}", t.offset)
        self.advance()

    def lbp(self, t):
        if t.kind == "op" and t.text in _BP:
            return _BP[t.text]
        return 0

    def expression(self, rbp=0):
        left = self.nud(self.advance())
        while rbp < self.lbp(self.tok):
            t = self.advance()
            left = self.led(t, left)
        return left

    def nud(self, t):
        if t.kind == "num":
            return Num(float(t.text))
        if t.kind == "name":
            return self.name(t)
        if t.text == "-":
            return Neg(self.expression(_UNARY_BP))
        if t.text == "+":
            return self.expression(_UNARY_BP)
        if t.text == "(":
            e = self.expression()
            self.expect(")")
            return e
        what = "end of input" if t.kind == "end" else repr(t.text)
        raise ExprSyntaxError(f"unexpected {what}", t.offset)

    def led(self, t, left):
        if t.text == "^":
            # right associative; the exponent may itself start with a unary minus
            return BinOp("^", left, self.expression(_BP["^"] - 1))
        return BinOp(t.text, left, self.expression(_BP[t.text]))

    def name(self, t):
        name = t.text
        if name in jets.FUNCTIONS:
            if self.tok.text != "(":
                raise ExprSyntaxError(f"function {name!r} needs an argument list", self.tok.offset)
            self.advance()
            args = []
            if self.tok.text != ")":
                args.append(self.expression())
                while self.tok.text == ",":
                    self.advance()
                    args.append(self.expression())
            self.expect(")")
            if len(args) != 1:
                raise ArityError(f"{name} takes 1 argument, got {len(args)} (offset {t.offset})")
            return Call(name, args[0])
        if self.tok.text == "(" and self.tok.kind == "op":
            if name in self.coords or name in self.params or name == "pi":
                raise ExprSyntaxError(f"{name!r} is not a function", self.tok.offset)
            raise UnknownIdentifierError(f"unknown function {name!r} at offset {t.offset}")
        if name in self.coords:
            return Coord(self.coords[name], name)
        if name == "pi":
            return Pi()
        if name in self.params:
            return Param(name)
        raise UnknownIdentifierError(f"unknown identifier {name!r} at offset {t.offset}")


def parse(source: str, coords: Sequence[str] = DEFAULT_COORDS, params: Sequence[str] = ()) -> Expr:
    """Parse ``source`` into an expression tree."""
    if len(coords) != 4:
        raise ValueError("exactly four coordinate names are required")
    p = _Parser(source, coords, params)
    if p.tok.kind == "end":
        raise ExprSyntaxError("empty expression", 0)
    e = p.expression()
    if p.tok.kind != "end":
        raise ExprSyntaxError(f"unexpected {p.tok.text!r}", p.tok.offset)
    return e


def _prec(e):
    if isinstance(e, BinOp):
        return _BP[e.op]
    if isinstance(e, Neg):
        return _UNARY_BP
    return 100


def unparse(e: Expr) -> str:
    """Render ``e`` so that ``parse(unparse(e)) == e``."""
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Coord):
        return e.name
    if isinstance(e, Param):
        return e.name
    if isinstance(e, Pi):
        return "pi"
    if isinstance(e, Call):
        return f"{e.func}({unparse(e.arg)})"
    if isinstance(e, Neg):
        inner = unparse(e.operand)
        if _prec(e.operand) < _UNARY_BP:
            inner = f"({inner})"
        return f"-{inner}"
    p = _BP[e.op]
    left, right = unparse(e.left), unparse(e.right)
    if e.op == "^":
        # left operand must bind tighter than ^, right may be anything at ^ level or a negation
        if _prec(e.left) <= p:
            left = f"({left})"
        if _prec(e.right) < _UNARY_BP:
            right = f"({right})"
    else:
        if _prec(e.left) < p:
            left = f"({left})"
        if _prec(e.right) <= p:
            right = f"({right})"
    return f"{left}{e.op}{right}" if e.op == "^" else f"{left} {e.op} {right}"


def free_params(e: Expr) -> set:
    if isinstance(e, Param):
        return {e.name}
    if isinstance(e, Neg):
        return free_params(e.operand)
    if isinstance(e, Call):
        return free_params(e.arg)
    if isinstance(e, BinOp):
        return free_params(e.left) | free_params(e.right)
    return set()


def eval_jet2(e: Expr, p, params: Mapping[str, float] | None = None) -> Jet2:
    """Evaluate ``e`` and its first two coordinate derivatives at ``p``.

    ``p`` is a point of shape (4,) or a batch of points of shape (..., 4).
    Raises :class:`DomainViolation` if any point leaves the domain of a
    sub-expression.
    """
    x = np.asarray(p, dtype=float)
    if x.shape[-1:] != (4,):
        raise ValueError(f"points must have trailing dimension 4, got shape {x.shape}")
    params = params or {}
    cache = {}

    def rec(node):
        if isinstance(node, Num):
            return Jet2.constant(node.value)
        if isinstance(node, Coord):
            if node.index not in cache:
                cache[node.index] = Jet2.variable(x, node.index)
            return cache[node.index]
        if isinstance(node, Pi):
            return Jet2.constant(math.pi)
        if isinstance(node, Param):
            if node.name not in params:
                raise MissingParameterError(f"no value for parameter {node.name!r}")
            return Jet2.constant(params[node.name])
        if isinstance(node, Neg):
            return -rec(node.operand)
        if isinstance(node, Call):
            return jets.FUNCTIONS[node.func](rec(node.arg))
        a, b = rec(node.left), rec(node.right)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            return a / b
        return jets.power(a, b)

    with np.errstate(over="ignore", invalid="ignore"):
        j = jets.check_finite(rec(e), "expression")
    batch = x.shape[:-1]
    return Jet2(
        np.broadcast_to(j.value, batch).copy(),
        np.broadcast_to(j.grad, batch + (4,)).copy(),
        np.broadcast_to(j.hess, batch + (4, 4)).copy(),
    )


def evaluate(e: Expr, p, params=None):
    """Value only; a convenience wrapper around :func:`eval_jet2`."""
    return eval_jet2(e, p, params).value
