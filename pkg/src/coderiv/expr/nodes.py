"""Expression tree nodes and the canonical printer."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

FUNCTIONS = ("sin", "cos", "exp", "ln", "sqrt", "abs")
BINARY_OPS = ("+", "-", "*", "/", "^")


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    index: int  # zero-based; printed as x{index+1}


@dataclass(frozen=True)
class Param:
    index: int  # zero-based; printed as p{index+1}


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Const, Var, Param, Neg, BinOp, Call]


def to_source(node: Node) -> str:
    """Fully parenthesised source text; parses back to an identical tree."""
    if isinstance(node, Const):
        return repr(float(node.value))
    if isinstance(node, Var):
        return f"x{node.index + 1}"
    if isinstance(node, Param):
        return f"p{node.index + 1}"
    if isinstance(node, Neg):
        return f"(-{to_source(node.operand)})"
    if isinstance(node, BinOp):
        return f"({to_source(node.left)}{node.op}{to_source(node.right)})"
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


def walk(node: Node):
    yield node
    if isinstance(node, Neg):
        yield from walk(node.operand)
    elif isinstance(node, BinOp):
        yield from walk(node.left)
        yield from walk(node.right)
    elif isinstance(node, Call):
        yield from walk(node.arg)


def uses_variables(node: Node) -> bool:
    return any(isinstance(n, Var) for n in walk(node))
