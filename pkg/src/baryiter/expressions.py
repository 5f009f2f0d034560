"""Parse test functions of one variable and differentiate them symbolically.

Grammar (whitespace ignored)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-')* power
    power  := atom ['^' exponent]          # right-associative
    atom   := NUMBER | 'x' | FUNC '(' expr ')' | '(' expr ')'
    FUNC   := cos | sin | exp | log | sqrt

Exponents must reduce to integer constants (optionally signed, and
themselves allowed to be integer powers, so 2^3^2 = 2^9); that keeps
symbolic differentiation closed under the grammar.  Number literals are
kept as text and parsed at the working precision on every evaluation, so
an expression built once stays exact under precision changes.

Parse failures raise :class:`~baryiter.errors.ParseError` with a 1-based
column.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import numerics
from .errors import ParseError
from .numerics import Real, Scalar, real

# AST nodes are tuples: ("num", text), ("var",), ("add"|"sub"|"mul"|"div", a, b),
# ("neg", a), ("pow", a, int), ("call", name, a)

FUNCTIONS = ("cos", "sin", "exp", "log", "sqrt")

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(src: str):
    tokens = []
    pos = 0
    while pos < len(src):
        match = _TOKEN_RE.match(src, pos)
        if match is None or match.end() == pos:
            stripped = src[pos:].lstrip()
            if not stripped:
                break
            column = pos + (len(src[pos:]) - len(stripped)) + 1
            raise ParseError(f"unexpected character {stripped[0]!r}", column)
        kind = match.lastgroup
        tokens.append((kind, match.group(kind), match.start(kind) + 1))
        pos = match.end()
    tokens.append(("end", "", len(src) + 1))
    return tokens


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens = _tokenize(src)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect_op(self, op: str):
        kind, value, column = self.peek()
        if kind != "op" or value != op:
            raise ParseError(f"expected {op!r}", column)
        return self.advance()

    def parse(self):
        node = self.expr()
        kind, value, column = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {value!r}", column)
        return node

    def expr(self):
        node = self.term()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.advance()
                rhs = self.term()
                node = ("add" if value == "+" else "sub", node, rhs)
            else:
                return node

    def term(self):
        node = self.unary()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "*/":
                self.advance()
                rhs = self.unary()
                node = ("mul" if value == "*" else "div", node, rhs)
            else:
                return node

    def unary(self):
        kind, value, _ = self.peek()
        if kind == "op" and value in "+-":
            self.advance()
            node = self.unary()
            return node if value == "+" else _neg(node)
        return self.power()

    def power(self):
        node = self.atom()
        kind, value, column = self.peek()
        if kind == "op" and value == "^":
            self.advance()
            exponent = self.exponent()
            return ("pow", node, exponent)
        return node

    def exponent(self) -> int:
        # signed integer literal, itself allowing a nested integer power
        sign = 1
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.advance()
                if value == "-":
                    sign = -sign
            else:
                break
        kind, value, column = self.peek()
        if kind != "num" or not re.fullmatch(r"\d+", value):
            raise ParseError("exponent must be an integer", column)
        self.advance()
        base = int(value)
        kind, op_value, _ = self.peek()
        if kind == "op" and op_value == "^":
            self.advance()
            base = base ** self.exponent()
        return sign * base

    def atom(self):
        kind, value, column = self.advance()
        if kind == "num":
            return ("num", value)
        if kind == "name":
            if value == "x":
                return ("var",)
            if value in FUNCTIONS:
                self.expect_op("(")
                node = self.expr()
                self.expect_op(")")
                return ("call", value, node)
            raise ParseError(f"unknown identifier {value!r}", column)
        if kind == "op" and value == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ParseError("expected a number, 'x', a function call or '('", column)


# ---------------------------------------------------------------------------
# smart constructors keep derivative trees small


def _is_num(node, value=None):
    if node[0] != "num":
        return False
    if value is None:
        return True
    try:
        return float(node[1]) == value
    except ValueError:
        return False


def _num(value: int):
    return ("num", str(value))


def _neg(node):
    if node[0] == "neg":
        return node[1]
    if _is_num(node, 0):
        return node
    return ("neg", node)


def _add(a, b):
    if _is_num(a, 0):
        return b
    if _is_num(b, 0):
        return a
    return ("add", a, b)


def _sub(a, b):
    if _is_num(b, 0):
        return a
    if _is_num(a, 0):
        return _neg(b)
    return ("sub", a, b)


def _mul(a, b):
    if _is_num(a, 0) or _is_num(b, 0):
        return _num(0)
    if _is_num(a, 1):
        return b
    if _is_num(b, 1):
        return a
    return ("mul", a, b)


def _div(a, b):
    if _is_num(a, 0):
        return _num(0)
    if _is_num(b, 1):
        return a
    return ("div", a, b)


def _pow(a, k: int):
    if k == 0:
        return _num(1)
    if k == 1:
        return a
    return ("pow", a, k)


def differentiate(node):
    """Symbolic derivative of an AST with respect to x."""
    head = node[0]
    if head == "num":
        return _num(0)
    if head == "var":
        return _num(1)
    if head == "neg":
        return _neg(differentiate(node[1]))
    if head == "add":
        return _add(differentiate(node[1]), differentiate(node[2]))
    if head == "sub":
        return _sub(differentiate(node[1]), differentiate(node[2]))
    if head == "mul":
        a, b = node[1], node[2]
        return _add(_mul(differentiate(a), b), _mul(a, differentiate(b)))
    if head == "div":
        a, b = node[1], node[2]
        return _div(_sub(_mul(differentiate(a), b), _mul(a, differentiate(b))), _pow(b, 2))
    if head == "pow":
        a, k = node[1], node[2]
        return _mul(_mul(_num(k), _pow(a, k - 1)), differentiate(a))
    if head == "call":
        name, a = node[1], node[2]
        da = differentiate(a)
        if name == "cos":
            return _mul(_neg(("call", "sin", a)), da)
        if name == "sin":
            return _mul(("call", "cos", a), da)
        if name == "exp":
            return _mul(node, da)
        if name == "log":
            return _div(da, a)
        if name == "sqrt":
            return _div(da, _mul(_num(2), node))
    raise ValueError(f"cannot differentiate node {node!r}")


def evaluate(node, x: Real) -> Real:
    head = node[0]
    if head == "num":
        return real(node[1])
    if head == "var":
        return x
    if head == "neg":
        return -evaluate(node[1], x)
    if head == "add":
        return evaluate(node[1], x) + evaluate(node[2], x)
    if head == "sub":
        return evaluate(node[1], x) - evaluate(node[2], x)
    if head == "mul":
        return evaluate(node[1], x) * evaluate(node[2], x)
    if head == "div":
        return evaluate(node[1], x) / evaluate(node[2], x)
    if head == "pow":
        return numerics.powi(evaluate(node[1], x), node[2])
    if head == "call":
        return numerics.eval_elementary(node[1], evaluate(node[2], x))
    raise ValueError(f"cannot evaluate node {node!r}")


def render(node) -> str:
    """Plain-text form of an AST (parenthesised, for diagnostics)."""
    head = node[0]
    if head == "num":
        return node[1]
    if head == "var":
        return "x"
    if head == "neg":
        return f"(-{render(node[1])})"
    if head in ("add", "sub", "mul", "div"):
        op = {"add": "+", "sub": "-", "mul": "*", "div": "/"}[head]
        return f"({render(node[1])}{op}{render(node[2])})"
    if head == "pow":
        return f"{render(node[1])}^{node[2]}"
    if head == "call":
        return f"{node[1]}({render(node[2])})"
    raise ValueError(f"cannot render node {node!r}")


@dataclass(frozen=True)
class Expression:
    """A parsed expression with symbolic derivatives up to order three."""

    source: str
    nodes: tuple  # value, first, second, third derivative ASTs

    def f(self, x: Scalar) -> Real:
        return evaluate(self.nodes[0], real(x))

    def df(self, x: Scalar) -> Real:
        return evaluate(self.nodes[1], real(x))

    def d2f(self, x: Scalar) -> Real:
        return evaluate(self.nodes[2], real(x))

    def d3f(self, x: Scalar) -> Real:
        return evaluate(self.nodes[3], real(x))


def parse_expression(src: str) -> Expression:
    """Parse ``src`` into an evaluator with analytic derivatives up to order 3."""
    if not src or not src.strip():
        raise ParseError("empty expression", 1)
    root = _Parser(src).parse()
    nodes = [root]
    for _ in range(3):
        nodes.append(differentiate(nodes[-1]))
    return Expression(source=src, nodes=tuple(nodes))
