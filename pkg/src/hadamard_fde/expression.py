"""A tiny expression language for right-hand sides phi(t, x).

Grammar (loosest binding first)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := primary ('^' unary)?          # right associative
    primary := NUMBER | 't' | 'x' | NAME '(' expr (',' expr)* ')' | '(' expr ')'

Functions: ``log exp sin cos`` (one argument) and ``pow`` (two).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import EvaluationError, ExpressionSyntaxError, UnknownIdentifierError

__all__ = [
    "BinOp",
    "Call",
    "Neg",
    "Num",
    "RhsExpression",
    "Var",
    "parse_rhs_expression",
]

FUNCTIONS = {"log": 1, "exp": 1, "sin": 1, "cos": 1, "pow": 2}
VARIABLES = ("t", "x")


@dataclass(frozen=True)
class Num:
    value: float
    col: int


@dataclass(frozen=True)
class Var:
    name: str
    col: int


@dataclass(frozen=True)
class Neg:
    operand: "Node"
    col: int


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"
    col: int


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple
    col: int


Node = Union[Num, Var, Neg, BinOp, Call]

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^(),]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ExpressionSyntaxError(f"unexpected character {text[pos]!r}", pos + 1)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start + 1))
        pos = m.end()
    tokens.append(("end", "", len(text) + 1))
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

    def expect(self, value: str):
        kind, text, col = self.take()
        if text != value or kind == "end":
            found = "end of input" if kind == "end" else repr(text)
            raise ExpressionSyntaxError(f"expected {value!r}, found {found}", col)

    def parse(self) -> Node:
        node = self.expr()
        kind, text, col = self.peek()
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected {text!r}", col)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            _, op, col = self.take()
            node = BinOp(op, node, self.term(), col)
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            _, op, col = self.take()
            node = BinOp(op, node, self.unary(), col)
        return node

    def unary(self) -> Node:
        kind, text, col = self.peek()
        if kind == "op" and text == "-":
            self.take()
            return Neg(self.unary(), col)
        return self.power()

    def power(self) -> Node:
        base = self.primary()
        kind, text, col = self.peek()
        if kind == "op" and text == "^":
            self.take()
            return BinOp("^", base, self.unary(), col)
        return base

    def primary(self) -> Node:
        kind, text, col = self.take()
        if kind == "num":
            return Num(float(text), col)
        if kind == "name":
            if text in VARIABLES:
                return Var(text, col)
            if text not in FUNCTIONS:
                raise UnknownIdentifierError(text, col)
            self.expect("(")
            args = [self.expr()]
            while self.peek()[1] == "," and self.peek()[0] == "op":
                self.take()
                args.append(self.expr())
            self.expect(")")
            if len(args) != FUNCTIONS[text]:
                raise ExpressionSyntaxError(
                    f"{text} takes {FUNCTIONS[text]} argument(s), got {len(args)}", col)
            return Call(text, tuple(args), col)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(text)
        raise ExpressionSyntaxError(f"expected a number, variable, function or '(', found {found}", col)


def _first_bad(mask) -> int | None:
    flat = np.ravel(mask)
    if not flat.any():
        return None
    return int(np.argmax(flat))


def _fail(reason: str, mask, col: int):
    idx = _first_bad(mask)
    raise EvaluationError(reason, index=idx if np.ndim(mask) else None, column=col)


def _eval(node: Node, env: dict) -> np.ndarray:
    if isinstance(node, Num):
        return np.float64(node.value)
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Neg):
        return -_eval(node.operand, env)
    if isinstance(node, BinOp):
        left = _eval(node.left, env)
        right = _eval(node.right, env)
        if node.op == "+":
            out = left + right
        elif node.op == "-":
            out = left - right
        elif node.op == "*":
            out = left * right
        elif node.op == "/":
            zero = np.broadcast_to(right == 0, np.broadcast(left, right).shape)
            if np.any(zero):
                _fail("division by zero", zero, node.col)
            out = left / right
        else:
            out = _power(left, right, node.col)
        return _finite(out, node.col)
    args = [_eval(arg, env) for arg in node.args]
    if node.name == "log":
        (arg,) = args
        bad = arg <= 0
        if np.any(bad):
            _fail("log of a non-positive value", bad, node.col)
        out = np.log(arg)
    elif node.name == "exp":
        out = np.exp(args[0])
    elif node.name == "sin":
        out = np.sin(args[0])
    elif node.name == "cos":
        out = np.cos(args[0])
    else:
        out = _power(args[0], args[1], node.col)
    return _finite(out, node.col)


def _power(base, exponent, col: int):
    shape = np.broadcast(base, exponent).shape
    b = np.broadcast_to(base, shape)
    e = np.broadcast_to(exponent, shape)
    bad = ((b < 0) & (e != np.round(e))) | ((b == 0) & (e < 0))
    if np.any(bad):
        _fail("power of a negative base with a non-integer exponent, or of zero with a negative exponent",
              bad, col)
    return np.power(base, exponent)


def _finite(value, col: int):
    bad = ~np.isfinite(value)
    if np.any(bad):
        _fail("non-finite result (overflow)", bad, col)
    return value


class RhsExpression:
    """Parsed expression; call it as ``expr(t, x)`` on scalars or arrays."""

    def __init__(self, text: str, tree: Node):
        self.text = text
        self.tree = tree

    def __repr__(self) -> str:
        return f"RhsExpression({self.text!r})"

    def __call__(self, t, x):
        return self.evaluate(t=t, x=x)

    def evaluate(self, t, x):
        t_arr = np.asarray(t, dtype=float)
        x_arr = np.asarray(x, dtype=float)
        shape = np.broadcast(t_arr, x_arr).shape
        env = {"t": np.broadcast_to(t_arr, shape), "x": np.broadcast_to(x_arr, shape)}
        with np.errstate(all="ignore"):
            out = np.broadcast_to(_eval(self.tree, env), shape)
        if shape == ():
            return float(out)
        return np.array(out, dtype=float)

    def variables(self) -> list[str]:
        """Variable references in source order (with repetition)."""
        found: list[str] = []

        def walk(node):
            if isinstance(node, Var):
                found.append(node.name)
            elif isinstance(node, Neg):
                walk(node.operand)
            elif isinstance(node, BinOp):
                walk(node.left)
                walk(node.right)
            elif isinstance(node, Call):
                for arg in node.args:
                    walk(arg)

        walk(self.tree)
        return found


def parse_rhs_expression(text: str) -> RhsExpression:
    """Parse ``text`` into an :class:`RhsExpression`."""
    if not isinstance(text, str) or not text.strip():
        raise ExpressionSyntaxError("empty expression", 1)
    return RhsExpression(text, _Parser(text).parse())
