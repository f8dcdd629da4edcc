"""A small recursive-descent parser for 1-D map expressions in ``x``.

Grammar (unary minus binds tighter than ``*`` and ``/``)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | primary
    primary := NUMBER | "x" | "(" expr ")"
             | "abs" "(" expr ")"
             | ("min" | "max" | "pow") "(" expr "," expr ")"
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .errors import ExprEvalError, ExprSyntaxError

FUNCTIONS = {"abs": 1, "min": 2, "max": 2, "pow": 2}

_NUMBER = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


@dataclass(frozen=True)
class MapExpr:
    """A parsed map; call it to evaluate at ``x``."""

    tree: object
    source: str = ""

    def __call__(self, x):
        return evaluate(self.tree, x)

    def render(self):
        return render(self.tree)


@dataclass(frozen=True)
class _Tok:
    kind: str  # num, ident, op, end
    text: str
    pos: int


def _tokenize(src):
    toks = []
    i = 0
    while i < len(src):
        c = src[i]
        if c.isspace():
            i += 1
            continue
        m = _NUMBER.match(src, i)
        if m:
            toks.append(_Tok("num", m.group(), i))
            i = m.end()
            continue
        m = _IDENT.match(src, i)
        if m:
            toks.append(_Tok("ident", m.group(), i))
            i = m.end()
            continue
        if c in "+-*/(),":
            toks.append(_Tok("op", c, i))
            i += 1
            continue
        raise ExprSyntaxError(f"unexpected character {c!r}", i, ("expression",))
    toks.append(_Tok("end", "", len(src)))
    return toks


_PRIMARY_START = ("number", "x", "(", "-", "function")


class _Parser:
    def __init__(self, src):
        self.toks = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text):
        t = self.peek()
        if t.kind != "op" or t.text != text:
            raise ExprSyntaxError(f"expected {text!r}, found {t.text or 'end of input'!r}", t.pos, (text,))
        return self.take()

    def parse(self):
        tree = self.expr()
        t = self.peek()
        if t.kind != "end":
            raise ExprSyntaxError(f"unexpected {t.text!r}", t.pos, ("+", "-", "*", "/", "end"))
        return tree

    def expr(self):
        left = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.take().text
            left = BinOp(op, left, self.term())
        return left

    def term(self):
        left = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.take().text
            left = BinOp(op, left, self.unary())
        return left

    def unary(self):
        t = self.peek()
        if t.kind == "op" and t.text == "-":
            self.take()
            return Neg(self.unary())
        return self.primary()

    def primary(self):
        t = self.peek()
        if t.kind == "num":
            self.take()
            return Num(float(t.text))
        if t.kind == "ident":
            self.take()
            if t.text == "x":
                return Var()
            if t.text not in FUNCTIONS:
                raise ExprSyntaxError(f"unknown identifier {t.text!r}", t.pos, ("x",) + tuple(FUNCTIONS))
            self.expect("(")
            args = [self.expr()]
            for _ in range(FUNCTIONS[t.text] - 1):
                self.expect(",")
                args.append(self.expr())
            self.expect(")")
            return Call(t.text, tuple(args))
        if t.kind == "op" and t.text == "(":
            self.take()
            inner = self.expr()
            self.expect(")")
            return inner
        found = t.text or "end of input"
        raise ExprSyntaxError(f"expected an operand, found {found!r}", t.pos, _PRIMARY_START)


def parse_map(src):
    """Parse ``src`` into a :class:`MapExpr`; raises ExprSyntaxError with a byte offset."""
    if not src or not src.strip():
        raise ExprSyntaxError("empty expression", 0, _PRIMARY_START)
    return MapExpr(_Parser(src).parse(), src)


def render(node):
    """Fully parenthesised source text; ``parse_map(render(t)).tree == t``."""
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Neg):
        return "-" + render(node.operand)
    if isinstance(node, BinOp):
        return f"({render(node.left)} {node.op} {render(node.right)})"
    if isinstance(node, Call):
        return f"{node.name}({', '.join(render(a) for a in node.args)})"
    raise TypeError(f"not an expression node: {node!r}")


def evaluate(node, x):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return x
    if isinstance(node, Neg):
        return -evaluate(node.operand, x)
    if isinstance(node, BinOp):
        a = evaluate(node.left, x)
        b = evaluate(node.right, x)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if b == 0:
            raise ExprEvalError("division by zero")
        return a / b
    if isinstance(node, Call):
        args = [evaluate(a, x) for a in node.args]
        if node.name == "abs":
            return abs(args[0])
        if node.name == "min":
            return min(args)
        if node.name == "max":
            return max(args)
        try:
            r = math.pow(args[0], args[1])
        except (ValueError, OverflowError) as exc:
            raise ExprEvalError(f"pow{tuple(args)}: {exc}") from exc
        return r
    raise TypeError(f"not an expression node: {node!r}")
