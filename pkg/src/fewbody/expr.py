"""Textual potentials: a tiny expression language in the variable ``r``.

Grammar (lowest to highest precedence)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          # right-associative
    atom   := NUMBER | 'r' | NAME '(' expr ')' | '(' expr ')'

with ``NAME`` one of ``exp``, ``sqrt``.  Every construct is analytic, so the
same tree evaluates on complex arguments.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

__all__ = ["ExprSyntaxError", "UnknownIdentifier", "Node", "PotentialExpr", "parse_potential_expr"]

MAX_DEPTH = 100  # parenthesis / unary / exponent nesting
MAX_TREE_DEPTH = 400  # evaluation recursion bound, including long operator chains
FUNCTIONS = {"exp": np.exp, "sqrt": np.sqrt}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


class ExprSyntaxError(ValidationError):
    """Malformed expression; ``offset`` is the byte offset of the offending token."""

    def __init__(self, message: str, text: str, pos: int):
        self.offset = len(text[:pos].encode("utf-8"))
        super().__init__(f"{message} at byte {self.offset}")


class UnknownIdentifier(ExprSyntaxError):
    pass


@dataclass(frozen=True)
class Node:
    kind: str  # num | var | neg | + - * / ^ | call
    value: object = None
    args: tuple = ()

    def __str__(self) -> str:
        if self.kind == "num":
            return repr(self.value)
        if self.kind == "var":
            return "r"
        if self.kind == "neg":
            return f"(-{self.args[0]})"
        if self.kind == "call":
            return f"{self.value}({self.args[0]})"
        return f"({self.args[0]} {self.kind} {self.args[1]})"


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens, pos = [], 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            start = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExprSyntaxError(f"unexpected character {text[start]!r}", text, start)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.depth = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, message, tok=None):
        tok = tok or self.peek()
        raise ExprSyntaxError(message, self.text, tok[2])

    def expect(self, op: str):
        tok = self.take()
        if tok[1] != op or tok[0] != "op":
            self.fail(f"expected {op!r}", tok)

    def nested(self, rule):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            self.fail("expression nested too deeply")
        try:
            return rule()
        finally:
            self.depth -= 1

    def parse(self) -> Node:
        if self.peek()[0] == "end":
            self.fail("empty expression")
        node = self.expr()
        if self.peek()[0] != "end":
            self.fail(f"unexpected token {self.peek()[1]!r}")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            node = Node(op, args=(node, self.term()))
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            node = Node(op, args=(node, self.unary()))
        return node

    def unary(self) -> Node:
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Node("neg", args=(self.nested(self.unary),))
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return Node("^", args=(base, self.nested(self.unary)))
        return base

    def atom(self) -> Node:
        kind, val, pos = tok = self.take()
        if kind == "num":
            x = float(val)
            if not np.isfinite(x):
                self.fail("number out of range", tok)
            return Node("num", x)
        if kind == "name":
            if val == "r":
                return Node("var")
            if val not in FUNCTIONS:
                raise UnknownIdentifier(f"unknown identifier {val!r}", self.text, pos)
            self.expect("(")
            arg = self.nested(self.expr)
            self.expect(")")
            return Node("call", val, (arg,))
        if (kind, val) == ("op", "("):
            inner = self.nested(self.expr)
            self.expect(")")
            return inner
        self.fail("expected a number, 'r', a function call or '('", tok)


def _evaluate(node: Node, r):
    k = node.kind
    if k == "num":
        return np.float64(node.value)  # constant folding must follow numpy's inf/nan rules
    if k == "var":
        return r
    if k == "neg":
        return -_evaluate(node.args[0], r)
    if k == "call":
        return FUNCTIONS[node.value](_evaluate(node.args[0], r))
    a, b = _evaluate(node.args[0], r), _evaluate(node.args[1], r)
    if k == "+":
        return a + b
    if k == "-":
        return a - b
    if k == "*":
        return a * b
    if k == "/":
        return a / b
    return np.power(a, b)


@dataclass(frozen=True)
class PotentialExpr:
    text: str
    tree: Node

    def __call__(self, r):
        """Evaluate on real or complex ``r``.

        Complex entries with zero imaginary part are evaluated on the real
        axis, so they reproduce the real result bit for bit.
        """
        r = np.asarray(r)
        with np.errstate(all="ignore"):
            if not np.iscomplexobj(r):
                return np.asarray(_evaluate(self.tree, r.astype(float)), dtype=float) + np.zeros(r.shape)
            out = np.asarray(_evaluate(self.tree, r), dtype=complex) + np.zeros(r.shape, dtype=complex)
            on_axis = r.imag == 0
            if np.any(on_axis):
                out[on_axis] = np.asarray(_evaluate(self.tree, r.real[on_axis]), dtype=float)
            return out

    def __str__(self) -> str:
        return self.text


def _tree_depth(root: Node) -> int:
    deepest, stack = 0, [(root, 1)]
    while stack:
        node, d = stack.pop()
        deepest = max(deepest, d)
        stack.extend((child, d + 1) for child in node.args)
    return deepest


def parse_potential_expr(text: str) -> PotentialExpr:
    if not isinstance(text, str):
        raise ValidationError(f"expression must be a string, got {type(text).__name__}")
    tree = _Parser(text).parse()
    if _tree_depth(tree) > MAX_TREE_DEPTH:
        raise ExprSyntaxError("expression too long", text, 0)
    return PotentialExpr(text, tree)
