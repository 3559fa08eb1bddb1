"""Recursive-descent parser for mapping definitions.

Grammar (see docs/grammar.md)::

    mapping  = expr { ";" expr } [ ";" ]
    expr     = term { ("+" | "-") term }
    term     = unary { ("*" | "/") unary }
    unary    = "-" unary | power
    power    = primary { "^" exponent }
    exponent = "-" exponent | primary
    primary  = NUMBER | VARIABLE | PARAMETER | FUNC "(" expr ")" | "(" expr ")"

All binary operators are left-associative.  Exponents may not reference
the input variables.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .nodes import FUNCTIONS, BinOp, Call, Const, Neg, Node, Param, Var, uses_variables

__all__ = ["ExprSyntaxError", "parse_components", "parse_expression"]


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<newline>\n)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^();,])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    column: int


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(source):
        match = _TOKEN_RE.match(source, pos)
        if match is None:
            raise ExprSyntaxError(f"unexpected character {source[pos]!r}", line, pos - line_start + 1)
        kind = match.lastgroup
        if kind == "newline":
            line += 1
            line_start = match.end()
        elif kind != "ws":
            tokens.append(_Token(kind, match.group(), line, pos - line_start + 1))
        pos = match.end()
    tokens.append(_Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, source: str, n: int, k: int):
        self.tokens = _tokenize(source)
        self.pos = 0
        self.n = n
        self.k = k

    @property
    def tok(self) -> _Token:
        return self.tokens[self.pos]

    def error(self, message: str, tok: _Token | None = None):
        tok = tok or self.tok
        raise ExprSyntaxError(message, tok.line, tok.column)

    def accept(self, text: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == text:
            self.pos += 1
            return True
        return False

    def expect(self, text: str) -> None:
        if not self.accept(text):
            found = self.tok.text or "end of input"
            self.error(f"expected {text!r}, found {found!r}")

    def mapping(self) -> list[Node]:
        components = [self.expr()]
        while self.accept(";"):
            if self.tok.kind == "eof":
                break
            components.append(self.expr())
        if self.tok.kind != "eof":
            self.error(f"unexpected {self.tok.text!r}")
        return components

    def expr(self) -> Node:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.tok.text
            self.pos += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.tok.text
            self.pos += 1
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.accept("-"):
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        node = self.primary()
        while self.tok.kind == "op" and self.tok.text == "^":
            tok = self.tok
            self.pos += 1
            exponent = self.exponent()
            if uses_variables(exponent):
                self.error("exponent must not depend on the variables", tok)
            node = BinOp("^", node, exponent)
        return node

    def exponent(self) -> Node:
        if self.accept("-"):
            return Neg(self.exponent())
        return self.primary()

    def primary(self) -> Node:
        tok = self.tok
        if tok.kind == "number":
            self.pos += 1
            return Const(float(tok.text))
        if tok.kind == "ident":
            self.pos += 1
            return self.identifier(tok)
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        self.error(f"unexpected {tok.text or 'end of input'!r}")

    def identifier(self, tok: _Token) -> Node:
        name = tok.text
        if name in FUNCTIONS:
            if not self.accept("("):
                self.error(f"function {name!r} must be called with one argument", tok)
            arg = self.expr()
            if self.tok.kind == "op" and self.tok.text == ",":
                self.error(f"function {name!r} takes exactly one argument")
            self.expect(")")
            return Call(name, arg)
        match = re.fullmatch(r"([xp])([1-9][0-9]*)", name)
        if match:
            index = int(match.group(2)) - 1
            if match.group(1) == "x":
                if index >= self.n:
                    self.error(f"variable {name!r} exceeds input dimension {self.n}", tok)
                return Var(index)
            if index >= self.k:
                self.error(f"parameter {name!r} exceeds parameter count {self.k}", tok)
            return Param(index)
        self.error(f"unknown identifier {name!r}", tok)


def parse_components(source: str, n: int, k: int = 0) -> list[Node]:
    """Parse ``;``-separated component expressions."""
    return _Parser(source, n, k).mapping()


def parse_expression(source: str, n: int, k: int = 0) -> Node:
    components = parse_components(source, n, k)
    if len(components) != 1:
        raise ExprSyntaxError(f"expected one expression, found {len(components)}", 1, 1)
    return components[0]
