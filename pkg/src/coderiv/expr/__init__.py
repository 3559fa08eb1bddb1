"""Text-defined mappings with exact forward-mode Jacobians."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from ..linalg import DimensionError, as_point
from ..mapping import EvaluationError, MappingHandle
from . import dual as D
from .nodes import BinOp, Call, Const, Neg, Node, Param, Var, to_source
from .parser import ExprSyntaxError, parse_components, parse_expression

__all__ = [
    "DomainError",
    "ExprMapping",
    "ExprSyntaxError",
    "load_mapping",
    "mapping_from_json",
    "parse_expression",
    "parse_mapping",
    "to_source",
]


class DomainError(EvaluationError):
    """Evaluation left the domain of a component."""

    def __init__(self, component: int, subexpression: str, reason: str):
        super().__init__(f"component {component + 1}: {reason} in {subexpression}")
        self.component = component
        self.subexpression = subexpression
        self.reason = reason


def _evaluate(node: Node, x, params, differentiate: bool) -> D.Dual:
    if isinstance(node, Const):
        return D.Dual(node.value)
    if isinstance(node, Var):
        return x[node.index]
    if isinstance(node, Param):
        return D.Dual(params[node.index])
    try:
        if isinstance(node, Neg):
            return -_evaluate(node.operand, x, params, differentiate)
        if isinstance(node, BinOp):
            left = _evaluate(node.left, x, params, differentiate)
            right = _evaluate(node.right, x, params, differentiate)
            if node.op == "+":
                return left + right
            if node.op == "-":
                return left - right
            if node.op == "*":
                return left * right
            if node.op == "/":
                return left / right
            return D.power(left, right.val, differentiate)
        if isinstance(node, Call):
            arg = _evaluate(node.arg, x, params, differentiate)
            if node.func == "sqrt":
                return D.sqrt(arg, differentiate)
            if node.func == "abs":
                return D.absolute(arg, differentiate)
            return getattr(D, node.func)(arg)
    except D.DomainFault as fault:
        # tag with the innermost failing node only
        raise _Located(node, str(fault)) from None
    raise TypeError(f"not an expression node: {node!r}")


class _Located(Exception):
    def __init__(self, node: Node, reason: str):
        self.node = node
        self.reason = reason


@dataclass(frozen=True)
class ExprMapping:
    """``m`` component expressions in variables x1..xn and parameters p1..pk."""

    n: int
    m: int
    k: int
    components: tuple

    def __post_init__(self) -> None:
        if len(self.components) != self.m:
            raise DimensionError(f"expected {self.m} components, got {len(self.components)}")

    def to_source(self) -> str:
        return "; ".join(to_source(c) for c in self.components)

    def _inputs(self, x, params):
        x = as_point(x)
        if x.size != self.n:
            raise DimensionError(f"expected a point in R^{self.n}, got R^{x.size}")
        params = np.asarray(params, dtype=float).reshape(-1)
        if params.size != self.k:
            raise DimensionError(f"expected {self.k} parameters, got {params.size}")
        return x, params

    def _run(self, i: int, duals, params, differentiate: bool) -> D.Dual:
        try:
            out = _evaluate(self.components[i], duals, params, differentiate)
        except _Located as loc:
            raise DomainError(i, to_source(loc.node), loc.reason) from None
        if not (math.isfinite(out.val) and math.isfinite(out.der)):
            raise DomainError(i, to_source(self.components[i]), "non-finite result")
        return out

    def eval(self, x, params: Sequence[float] = ()) -> np.ndarray:
        x, params = self._inputs(x, params)
        duals = [D.Dual(float(v)) for v in x]
        return np.array([self._run(i, duals, params, False).val for i in range(self.m)])

    def ad_jacobian(self, x, params: Sequence[float] = ()) -> np.ndarray:
        """Exact partials, one forward pass per input variable."""
        x, params = self._inputs(x, params)
        J = np.empty((self.m, self.n))
        for j in range(self.n):
            duals = [D.Dual(float(v), 1.0 if i == j else 0.0) for i, v in enumerate(x)]
            for i in range(self.m):
                J[i, j] = self._run(i, duals, params, True).der
        return J

    def to_handle(self, params: Sequence[float] = (), name: str | None = None,
                  excluded_points=()) -> MappingHandle:
        params = tuple(float(p) for p in params)
        if len(params) != self.k:
            raise DimensionError(f"expected {self.k} parameters, got {len(params)}")
        return MappingHandle(
            n=self.n,
            m=self.m,
            evaluate=lambda x: self.eval(x, params),
            jacobian=lambda x: self.ad_jacobian(x, params),
            excluded_points=tuple(excluded_points),
            name=name or f"expr[{self.to_source()}]",
        )


def parse_mapping(source: str, n: int, m: int | None = None, k: int = 0) -> ExprMapping:
    """Parse ``m`` semicolon-separated expressions (``m`` inferred if None)."""
    if n < 1 or k < 0:
        raise ValueError(f"invalid dimensions n={n}, k={k}")
    components = parse_components(source, n, k)
    if m is not None and len(components) != m:
        raise ExprSyntaxError(f"expected {m} component expressions, found {len(components)}", 1, 1)
    return ExprMapping(n=n, m=len(components), k=k, components=tuple(components))


def mapping_from_json(doc: dict) -> ExprMapping:
    """Build from ``{"n":..., "m":..., "k":..., "components": [...]}``."""
    try:
        n, m = int(doc["n"]), int(doc["m"])
        comps = doc["components"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"mapping document is missing field {exc}") from exc
    k = int(doc.get("k", 0))
    if not isinstance(comps, list) or not all(isinstance(c, str) for c in comps):
        raise ValueError("'components' must be a list of expression strings")
    if len(comps) != m:
        raise ValueError(f"'components' has {len(comps)} entries but m={m}")
    nodes = tuple(parse_expression(c, n, k) for c in comps)
    return ExprMapping(n=n, m=m, k=k, components=nodes)


def load_mapping(path) -> ExprMapping:
    return mapping_from_json(json.loads(Path(path).read_text()))
