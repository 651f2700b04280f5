"""Minimal arithmetic expressions with exact derivative rules.

Grammar: numbers, variables x0..x99, + - * / ^ (integer or float powers),
parentheses, and the functions exp, log, sqrt, sin, cos.  Evaluation is
vectorized over numpy arrays; differentiation is symbolic with light
constant folding, so domain gradients and Hessians carry no FD error.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
                    r"|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[()+\-*/^,]))")

FUNCTIONS = {
    "exp": (np.exp, lambda a: ("call", "exp", a)),
    "log": (np.log, None),
    "sqrt": (np.sqrt, None),
    "sin": (np.sin, None),
    "cos": (np.cos, None),
}


class ParseError(ValueError):
    pass


def tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip() == "":
                break
            raise ParseError(f"bad token at {text[pos:pos+12]!r}")
        num, ident, op = m.groups()
        if num is not None:
            out.append(("num", float(num)))
        elif ident is not None:
            out.append(("ident", ident))
        else:
            out.append(("op", "^" if op == "**" else op))
        pos = m.end()
    out.append(("end", ""))
    return out


class _Parser:
    def __init__(self, tokens):
        self.toks = tokens
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, op):
        kind, val = self.next()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}, got {val!r}")

    def parse(self):
        node = self.expr()
        if self.peek()[0] != "end":
            raise ParseError(f"trailing input at {self.peek()[1]!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek() == ("op", "+") or self.peek() == ("op", "-"):
            op = self.next()[1]
            rhs = self.term()
            node = ("add", node, rhs) if op == "+" else ("sub", node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek() == ("op", "*") or self.peek() == ("op", "/"):
            op = self.next()[1]
            rhs = self.unary()
            node = ("mul", node, rhs) if op == "*" else ("div", node, rhs)
        return node

    def unary(self):
        if self.peek() == ("op", "-"):
            self.next()
            return _neg(self.unary())
        if self.peek() == ("op", "+"):
            self.next()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.next()
            expo = self.unary()  # right-associative
            if expo[0] != "const":
                raise ParseError("exponent must be a constant")
            return ("pow", base, expo[1])
        return base

    def atom(self):
        kind, val = self.next()
        if kind == "num":
            return ("const", val)
        if kind == "ident":
            if val in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return ("call", val, arg)
            if val == "pi":
                return ("const", float(np.pi))
            if val == "e":
                return ("const", float(np.e))
            m = re.fullmatch(r"x(\d+)", val)
            if m:
                return ("var", int(m.group(1)))
            raise ParseError(f"unknown identifier {val!r}")
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ParseError(f"unexpected {val!r}")


def parse(text: str):
    return _Parser(tokenize(text)).parse()


# -- simplifying constructors -------------------------------------------

def _const(v):
    return ("const", float(v))


def _is_const(a, v=None):
    return a[0] == "const" and (v is None or a[1] == v)


def _add(a, b):
    if _is_const(a) and _is_const(b):
        return _const(a[1] + b[1])
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    return ("add", a, b)


def _sub(a, b):
    if _is_const(a) and _is_const(b):
        return _const(a[1] - b[1])
    if _is_const(b, 0.0):
        return a
    return ("sub", a, b)


def _mul(a, b):
    if _is_const(a) and _is_const(b):
        return _const(a[1] * b[1])
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return _const(0.0)
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    return ("mul", a, b)


def _div(a, b):
    if _is_const(a, 0.0):
        return _const(0.0)
    if _is_const(b, 1.0):
        return a
    return ("div", a, b)


def _neg(a):
    return _sub(_const(0.0), a)


def _pow(a, k):
    if k == 0:
        return _const(1.0)
    if k == 1:
        return a
    if _is_const(a):
        return _const(a[1] ** k)
    return ("pow", a, float(k))


# -- evaluation and differentiation ---------------------------------------

def evaluate(node, coords):
    """coords: sequence of arrays (or scalars), one per variable index."""
    op = node[0]
    if op == "const":
        return node[1]
    if op == "var":
        return coords[node[1]]
    if op == "add":
        return evaluate(node[1], coords) + evaluate(node[2], coords)
    if op == "sub":
        return evaluate(node[1], coords) - evaluate(node[2], coords)
    if op == "mul":
        return evaluate(node[1], coords) * evaluate(node[2], coords)
    if op == "div":
        return evaluate(node[1], coords) / evaluate(node[2], coords)
    if op == "pow":
        return evaluate(node[1], coords) ** node[2]
    if op == "call":
        return FUNCTIONS[node[1]][0](evaluate(node[2], coords))
    raise ParseError(f"bad node {op!r}")


def diff(node, i):
    op = node[0]
    if op == "const":
        return _const(0.0)
    if op == "var":
        return _const(1.0 if node[1] == i else 0.0)
    if op == "add":
        return _add(diff(node[1], i), diff(node[2], i))
    if op == "sub":
        return _sub(diff(node[1], i), diff(node[2], i))
    if op == "mul":
        return _add(_mul(diff(node[1], i), node[2]), _mul(node[1], diff(node[2], i)))
    if op == "div":
        num = _sub(_mul(diff(node[1], i), node[2]), _mul(node[1], diff(node[2], i)))
        return _div(num, _pow(node[2], 2))
    if op == "pow":
        k = node[2]
        return _mul(_mul(_const(k), _pow(node[1], k - 1)), diff(node[1], i))
    if op == "call":
        inner = diff(node[2], i)
        name, arg = node[1], node[2]
        if name == "exp":
            return _mul(("call", "exp", arg), inner)
        if name == "log":
            return _div(inner, arg)
        if name == "sqrt":
            return _div(inner, _mul(_const(2.0), ("call", "sqrt", arg)))
        if name == "sin":
            return _mul(("call", "cos", arg), inner)
        if name == "cos":
            return _neg(_mul(("call", "sin", arg), inner))
    raise ParseError(f"cannot differentiate {op!r}")


@dataclass(frozen=True)
class Expr:
    """A parsed scalar expression of n variables with exact derivatives."""

    n: int
    text: str

    def __post_init__(self):
        ast = parse(self.text)
        object.__setattr__(self, "_ast", ast)
        grads = [diff(ast, i) for i in range(self.n)]
        object.__setattr__(self, "_grad", grads)
        object.__setattr__(self, "_hess",
                           [[diff(grads[i], j) for j in range(self.n)]
                            for i in range(self.n)])

    def value(self, pts):
        pts = np.asarray(pts, dtype=float)
        coords = [pts[..., i] for i in range(self.n)]
        return np.broadcast_arrays(evaluate(self._ast, coords),
                                   coords[0])[0].astype(float)

    def gradient(self, pts):
        pts = np.asarray(pts, dtype=float)
        coords = [pts[..., i] for i in range(self.n)]
        cols = [np.broadcast_arrays(evaluate(g, coords), coords[0])[0]
                for g in self._grad]
        return np.stack(cols, axis=-1).astype(float)

    def hessian(self, pts):
        pts = np.asarray(pts, dtype=float)
        coords = [pts[..., i] for i in range(self.n)]
        rows = []
        for i in range(self.n):
            row = [np.broadcast_arrays(evaluate(self._hess[i][j], coords),
                                       coords[0])[0]
                   for j in range(self.n)]
            rows.append(np.stack(row, axis=-1))
        H = np.stack(rows, axis=-2).astype(float)
        return 0.5 * (H + np.swapaxes(H, -1, -2))
