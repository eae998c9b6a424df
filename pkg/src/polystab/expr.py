"""Polynomial coefficient expressions in the real parameters t1..tm.

Grammar (whitespace insignificant)::

    expr   := term (("+" | "-") term)*
    term   := unary ("*" unary)*
    unary  := ("+" | "-") unary | power
    power  := atom ("^" INT)*
    atom   := NUMBER ["i"] | "i" | PARAM | "(" expr ")"
    PARAM  := "t" INT | "t_" INT

Compiled expressions evaluate on numpy arrays, so a whole batch of parameter
points can be pushed through one call.
"""
from __future__ import annotations

import re

import numpy as np

__all__ = ["Expr", "ExpressionError", "parse_expr"]


class ExpressionError(ValueError):
    """Malformed expression; ``pos`` is the 0-based character offset."""

    def __init__(self, message, pos=0):
        super().__init__(message)
        self.pos = pos


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?i?)
  | (?P<param>t_?\d+)
  | (?P<imag>i)
  | (?P<op>[-+*^()])
    """,
    re.VERBOSE,
)


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExpressionError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def parse(self):
        node = self.expr()
        kind, value, pos = self.peek()
        if kind != "end":
            raise ExpressionError(f"unexpected {value!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            node = ("add" if op == "+" else "sub", node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] == "*":
            self.take()
            node = ("mul", node, self.unary())
        return node

    def unary(self):
        kind, value, _ = self.peek()
        if kind == "op" and value in ("+", "-"):
            self.take()
            inner = self.unary()
            return ("neg", inner) if value == "-" else inner
        return self.power()

    def power(self):
        node = self.atom()
        while self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            kind, value, pos = self.take()
            if kind != "num" or not value.isdigit():
                raise ExpressionError("exponent must be a nonnegative integer", pos)
            node = ("pow", node, int(value))
        return node

    def atom(self):
        kind, value, pos = self.take()
        if kind == "num":
            if value.endswith("i"):
                return ("const", complex(0.0, float(value[:-1])))
            return ("const", complex(float(value)))
        if kind == "imag":
            return ("const", 1j)
        if kind == "param":
            idx = int(value.lstrip("t_"))
            if idx < 1:
                raise ExpressionError(f"parameter index must be >= 1, got {value}", pos)
            return ("param", idx - 1, pos)
        if kind == "op" and value == "(":
            node = self.expr()
            k2, v2, p2 = self.take()
            if not (k2 == "op" and v2 == ")"):
                raise ExpressionError("expected ')'", p2)
            return node
        if kind == "end":
            raise ExpressionError("unexpected end of expression", pos)
        raise ExpressionError(f"unexpected {value!r}", pos)


def _eval(node, t):
    tag = node[0]
    if tag == "const":
        return node[1]
    if tag == "param":
        return t[..., node[1]]
    if tag == "add":
        return _eval(node[1], t) + _eval(node[2], t)
    if tag == "sub":
        return _eval(node[1], t) - _eval(node[2], t)
    if tag == "mul":
        return _eval(node[1], t) * _eval(node[2], t)
    if tag == "neg":
        return -_eval(node[1], t)
    if tag == "pow":
        return _eval(node[1], t) ** node[2]
    raise AssertionError(tag)


def _params(node, out):
    tag = node[0]
    if tag == "param":
        out.append((node[1], node[2]))
    elif tag in ("add", "sub", "mul"):
        _params(node[1], out)
        _params(node[2], out)
    elif tag in ("neg", "pow"):
        _params(node[1], out)
    return out


def _has_real_coefficients(node):
    tag = node[0]
    if tag == "const":
        return node[1].imag == 0.0
    if tag == "param":
        return True
    if tag in ("add", "sub", "mul"):
        return _has_real_coefficients(node[1]) and _has_real_coefficients(node[2])
    return _has_real_coefficients(node[1])


class Expr:
    """A parsed coefficient expression."""

    __slots__ = ("text", "_ast", "_params")

    def __init__(self, text):
        self.text = text
        self._ast = _Parser(text).parse()
        self._params = _params(self._ast, [])

    @property
    def param_indices(self):
        """Sorted 0-based indices of referenced parameters."""
        return sorted({i for i, _ in self._params})

    def param_positions(self):
        return list(self._params)

    @property
    def is_constant(self):
        return not self._params

    @property
    def real_coefficients(self):
        return _has_real_coefficients(self._ast)

    def __call__(self, t):
        """Evaluate at parameter array ``t`` of shape (..., m)."""
        t = np.asarray(t, dtype=float)
        val = _eval(self._ast, t)
        return np.broadcast_to(np.asarray(val, dtype=complex), t.shape[:-1]).copy()

    def constant_value(self):
        if not self.is_constant:
            raise ValueError(f"expression {self.text!r} depends on parameters")
        return complex(_eval(self._ast, np.zeros(0)))

    def __repr__(self):
        return f"Expr({self.text!r})"


def parse_expr(text):
    return Expr(text)
