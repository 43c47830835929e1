"""Expression parser shared by every text format.

Grammar (precedence from loose to tight)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/' | <juxtaposition>) unary)*
    unary   := '-' unary | '+' unary | power
    power   := atom ('^' (INT | '(' expr ')'))?
    atom    := INT | NAME ('[' INT ']')* | FUNC '(' expr ((';' | ',') expr)* ')' | '(' expr ')'

Juxtaposition binds like '*', so ``1/2i`` reads as (1/2)*i and ``t(t+1)``
as t*(t+1).  FUNC is ``sqrt`` or ``rad``.  Names are
resolved against an environment at evaluation time; ``i`` is the imaginary
unit unless the environment rebinds it.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .scalar import GaussRat, ParamRat, TExpr, I, as_scalar

__all__ = [
    "ParseError",
    "NonExactValue",
    "Vec",
    "parse_expr",
    "evaluate",
    "evaluate_text",
    "tokenize",
]


FUNCTIONS = ("sqrt", "rad")


class ParseError(ValueError):
    pass


class NonExactValue(ArithmeticError):
    """A fractional power whose value is not representable exactly."""


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\S))")


def tokenize(text: str):
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        if m.group(1) is not None:
            out.append(("int", int(m.group(1))))
        elif m.group(2) is not None:
            out.append(("name", m.group(2)))
        else:
            out.append(("op", m.group(3)))
        pos = m.end()
    return out


@dataclass(frozen=True)
class Node:
    kind: str
    args: tuple = ()
    value: object = None


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.pos = 0

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else (None, None)

    def take(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def expect(self, op):
        kind, val = self.take()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r} in {self.text!r}, got {val!r}")

    def parse(self) -> Node:
        if not self.toks:
            raise ParseError("empty expression")
        node = self.expr()
        if self.pos != len(self.toks):
            raise ParseError(f"trailing input {self.peek()[1]!r} in {self.text!r}")
        return node

    def expr(self) -> Node:
        node = self.term()
        while True:
            kind, val = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                node = Node("add" if val == "+" else "sub", (node, self.term()))
            else:
                return node

    def _starts_atom(self):
        kind, val = self.peek()
        return kind in ("int", "name") or (kind == "op" and val == "(")

    def term(self) -> Node:
        node = self.unary()
        while True:
            kind, val = self.peek()
            if kind == "op" and val in "*/":
                self.take()
                node = Node("mul" if val == "*" else "div", (node, self.unary()))
            elif self._starts_atom():
                node = Node("mul", (node, self.power()))
            else:
                return node

    def unary(self) -> Node:
        kind, val = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return Node("neg", (self.unary(),))
        if kind == "op" and val == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        kind, val = self.peek()
        if kind == "op" and val == "^":
            self.take()
            kind, val = self.peek()
            if kind == "int":
                self.take()
                expo = Node("int", value=val)
            elif kind == "op" and val == "(":
                self.take()
                expo = self.expr()
                self.expect(")")
            elif kind == "op" and val == "-":
                self.take()
                k2, v2 = self.take()
                if k2 != "int":
                    raise ParseError(f"bad exponent in {self.text!r}")
                expo = Node("int", value=-v2)
            else:
                raise ParseError(f"bad exponent in {self.text!r}")
            return Node("pow", (base, expo))
        return base

    def atom(self) -> Node:
        kind, val = self.take()
        if kind == "int":
            return Node("int", value=val)
        if kind == "name":
            k2, v2 = self.peek()
            if k2 == "op" and v2 == "(" and val in FUNCTIONS:
                self.take()
                args = [self.expr()]
                while True:
                    k3, v3 = self.peek()
                    if k3 == "op" and v3 in ";,":
                        self.take()
                        args.append(self.expr())
                    else:
                        break
                self.expect(")")
                return Node("call", tuple(args), val)
            idx = []
            while True:
                k3, v3 = self.peek()
                if k3 == "op" and v3 == "[":
                    self.take()
                    k4, v4 = self.take()
                    if k4 != "int":
                        raise ParseError(f"bad index in {self.text!r}")
                    self.expect("]")
                    idx.append(v4)
                else:
                    break
            return Node("name", tuple(idx), val)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ParseError(f"unexpected {val!r} in {self.text!r}")


def parse_expr(text: str) -> Node:
    return _Parser(text).parse()


class Vec:
    """Sparse vector with scalar coefficients, used for basis expressions."""

    __slots__ = ("coords",)

    def __init__(self, coords=None):
        self.coords = {k: v for k, v in (coords or {}).items() if _nonzero(v)}

    @classmethod
    def unit(cls, k: int) -> "Vec":
        return cls({k: GaussRat(1)})

    def __add__(self, other):
        if not isinstance(other, Vec):
            if _nonzero(other):
                raise TypeError("cannot add a scalar to a vector")
            return self
        out = dict(self.coords)
        for k, v in other.coords.items():
            out[k] = out[k] + v if k in out else v
        return Vec(out)

    def __radd__(self, other):
        return self.__add__(other)

    def __neg__(self):
        return Vec({k: -v for k, v in self.coords.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Vec):
            raise TypeError("vector times vector is not defined here")
        return Vec({k: v * other for k, v in self.coords.items()})

    def __rmul__(self, other):
        if isinstance(other, Vec):
            raise TypeError("vector times vector is not defined here")
        return Vec({k: other * v for k, v in self.coords.items()})

    def __truediv__(self, other):
        return Vec({k: v / other for k, v in self.coords.items()})

    def dense(self, n: int, zero):
        if self.coords and max(self.coords) >= n:
            raise ValueError(f"vector index {max(self.coords) + 1} out of range for dimension {n}")
        return [self.coords.get(k, zero) for k in range(n)]


def _nonzero(v):
    try:
        return bool(v)
    except TypeError:
        return True


def _rational_exponent(value) -> Fraction:
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, GaussRat) and value.is_real():
        return value.re
    if isinstance(value, ParamRat):
        c = value.constant()
        if c is not None and c.is_real():
            return c.re
    if isinstance(value, TExpr):
        c = value.constant()
        if c is not None:
            return _rational_exponent(c)
    raise ParseError(f"exponent must be rational, got {value}")


def power(x, q: Fraction):
    """x**q with exact semantics where possible."""
    q = Fraction(q)
    if isinstance(x, (mpmath.mpf, mpmath.mpc)):
        if q.denominator == 1:
            return x ** q.numerator
        return mpmath.power(x, mpmath.mpf(q.numerator) / q.denominator)
    if q.denominator == 1:
        return x ** q.numerator
    if isinstance(x, TExpr):
        try:
            return x.power(q)
        except ValueError as exc:
            raise NonExactValue(str(exc)) from exc
    if isinstance(x, ParamRat):
        c = x.constant()
        if c is None:
            raise NonExactValue(f"fractional power of a non-constant function of a: {x}")
        x = c
    x = as_scalar(x)
    r = x.root(q.denominator)
    if r is None:
        raise NonExactValue(f"({x})^({q}) is not a Gaussian rational")
    return r**q.numerator


def _call(name, args):
    if name == "sqrt" and len(args) == 1:
        return power(args[0], Fraction(1, 2))
    if name == "rad" and len(args) == 2:
        m = _rational_exponent(args[1])
        if m.denominator != 1 or m < 2:
            raise ParseError("rad index must be an integer >= 2")
        return power(args[0], Fraction(1, int(m)))
    raise ParseError(f"unknown function {name}/{len(args)}")


def evaluate(node: Node, env, numeric: bool = False):
    """Evaluate an AST.

    ``env`` maps a name (or a (name, indices) pair for subscripted names) to a
    value, or is a callable ``env(name, indices)`` returning one (KeyError if
    absent).  With ``numeric`` integer literals become mpmath numbers.
    """
    kind = node.kind
    if kind == "int":
        return mpmath.mpc(node.value) if numeric else GaussRat(node.value)
    if kind == "name":
        return _lookup(env, node.value, node.args, numeric)
    if kind == "call":
        return _call(node.value, [evaluate(a, env, numeric) for a in node.args])
    if kind == "neg":
        return -evaluate(node.args[0], env, numeric)
    if kind == "pow":
        base = evaluate(node.args[0], env, numeric)
        expo = node.args[1]
        q = Fraction(expo.value) if expo.kind == "int" else _rational_exponent(evaluate(expo, env, False))
        return power(base, q)
    a = evaluate(node.args[0], env, numeric)
    b = evaluate(node.args[1], env, numeric)
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    if kind == "mul":
        return a * b
    if kind == "div":
        if isinstance(b, TExpr) and not isinstance(a, TExpr) and not isinstance(a, Vec):
            a = TExpr.const(a)
        return a / b
    raise ParseError(f"unknown node {kind}")


def _lookup(env, name, idx, numeric):
    key = (name, idx) if idx else name
    if callable(env):
        try:
            return env(name, idx)
        except KeyError:
            pass
    elif key in env:
        return env[key]
    if name == "i" and not idx:
        return mpmath.mpc(0, 1) if numeric else I
    raise ParseError(f"unknown name {name}{''.join(f'[{k}]' for k in idx)}")


def evaluate_text(text: str, env, numeric: bool = False):
    return evaluate(parse_expr(text), env, numeric)
