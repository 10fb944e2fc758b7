"""Minimal arithmetic expression grammar for config files.

Supported: +, -, *, /, ^, unary minus, parentheses, ln(...), exp(...),
numeric literals and the variable t.  Parse errors carry the character
position.
"""

from __future__ import annotations

import math
import re
from typing import Callable

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_]\w*)"
    r"|(?P<op>[-+*/^()]))"
)


class ExpressionError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            if text[pos:].strip() == "":
                break
            raise ExpressionError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup == "num":
            tokens.append(("num", float(m.group("num")), m.start("num")))
        elif m.lastgroup == "name":
            tokens.append(("name", m.group("name"), m.start("name")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, val, pos = self.next()
        if kind != "op" or val != op:
            raise ExpressionError(f"expected {op!r}", pos)

    # expr := term (('+'|'-') term)*
    def expr(self):
        node = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.next()
                rhs = self.term()
                node = (val, node, rhs)
            else:
                return node

    # term := factor (('*'|'/') factor)*
    def term(self):
        node = self.factor()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "*/":
                self.next()
                rhs = self.factor()
                node = (val, node, rhs)
            else:
                return node

    # factor := atom ('^' factor)?  (right associative), with unary minus
    def factor(self):
        kind, val, pos = self.peek()
        if kind == "op" and val == "-":
            self.next()
            return ("neg", self.factor())
        node = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.next()
            return ("^", node, self.factor())
        return node

    def atom(self):
        kind, val, pos = self.next()
        if kind == "num":
            return ("const", val)
        if kind == "name":
            if val == "t":
                return ("var",)
            if val in ("ln", "exp"):
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return (val, arg)
            raise ExpressionError(f"unknown name {val!r}", pos)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExpressionError("expected a value", pos)


def _evaluate(node, t: float) -> float:
    op = node[0]
    if op == "const":
        return node[1]
    if op == "var":
        return t
    if op == "neg":
        return -_evaluate(node[1], t)
    if op == "ln":
        return math.log(_evaluate(node[1], t))
    if op == "exp":
        return math.exp(_evaluate(node[1], t))
    a = _evaluate(node[1], t)
    b = _evaluate(node[2], t)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return a / b
    if op == "^":
        return a ** b
    raise AssertionError(op)


def compile_expression(text: str) -> Callable[[float], float]:
    """Compile an expression string into a function of the variable t."""
    parser = _Parser(text)
    tree = parser.expr()
    kind, _, pos = parser.peek()
    if kind != "end":
        raise ExpressionError("trailing input", pos)
    return lambda t: _evaluate(tree, t)
