"""Evaluatable mappings R^n -> R^m."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .linalg import DimensionError, as_point

__all__ = ["EvaluationError", "ExcludedPointError", "MappingHandle"]


class EvaluationError(ValueError):
    """A mapping could not be evaluated at a point."""


class ExcludedPointError(EvaluationError):
    """The point is a known singular point of the mapping."""


@dataclass(frozen=True)
class MappingHandle:
    """A mapping with an optional analytic Jacobian.

    ``excluded_points`` lists known singular points (where the mapping is
    undefined or not differentiable).  The evaluator may still be defined
    there; the Jacobian is not.
    """

    n: int
    m: int
    evaluate: Callable[[np.ndarray], Sequence[float]]
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    excluded_points: tuple = field(default_factory=tuple)
    name: str = "mapping"
    vectorized: bool = False  # evaluate/jacobian broadcast over a leading axis

    def __post_init__(self) -> None:
        if self.n < 1 or self.m < 1:
            raise ValueError(f"dimensions must be positive, got n={self.n}, m={self.m}")
        pts = tuple(as_point(p, "excluded point") for p in self.excluded_points)
        for p in pts:
            if p.size != self.n:
                raise DimensionError(f"excluded point {p} is not in R^{self.n}")
        object.__setattr__(self, "excluded_points", pts)

    def _check_input(self, x) -> np.ndarray:
        x = as_point(x)
        if x.size != self.n:
            raise DimensionError(f"{self.name} expects a point in R^{self.n}, got R^{x.size}")
        return x

    def is_excluded(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return any(np.array_equal(x, p) for p in self.excluded_points)

    def __call__(self, x) -> np.ndarray:
        x = self._check_input(x)
        try:
            with np.errstate(all="ignore"):  # non-finite output is checked below
                y = np.asarray(self.evaluate(x), dtype=float).reshape(-1)
        except EvaluationError:
            raise
        except (ArithmeticError, ValueError) as exc:
            raise EvaluationError(f"{self.name} failed at {x.tolist()}: {exc}") from exc
        if y.size != self.m:
            raise DimensionError(f"{self.name} returned {y.size} components, expected {self.m}")
        if not np.all(np.isfinite(y)):
            raise EvaluationError(f"{self.name} is not finite at {x.tolist()}")
        return y

    def evaluate_many(self, X) -> np.ndarray:
        """Rows of ``f(X[i])``; non-finite rows mark evaluation failures."""
        X = np.asarray(X, dtype=float).reshape(-1, self.n)
        if self.vectorized:
            with np.errstate(all="ignore"):
                return np.asarray(self.evaluate(X), dtype=float).reshape(len(X), self.m)
        out = np.full((len(X), self.m), np.nan)
        for i, x in enumerate(X):
            try:
                out[i] = self(x)
            except EvaluationError:
                pass
        return out

    def jacobian_many(self, X) -> Optional[np.ndarray]:
        """Stacked analytic Jacobians, or None without a vectorized provider."""
        if not (self.vectorized and self.jacobian is not None):
            return None
        X = np.asarray(X, dtype=float).reshape(-1, self.n)
        with np.errstate(all="ignore"):
            return np.asarray(self.jacobian(X), dtype=float).reshape(len(X), self.m, self.n)

    def analytic_jacobian(self, x) -> Optional[np.ndarray]:
        """Analytic Jacobian at ``x`` or None when no provider is attached."""
        if self.jacobian is None:
            return None
        x = self._check_input(x)
        if self.is_excluded(x):
            raise ExcludedPointError(f"{x.tolist()} is an excluded point of {self.name}")
        J = np.asarray(self.jacobian(x), dtype=float)
        if J.shape != (self.m, self.n):
            raise DimensionError(f"{self.name} Jacobian has shape {J.shape}, expected {(self.m, self.n)}")
        if not np.all(np.isfinite(J)):
            raise EvaluationError(f"{self.name} Jacobian is not finite at {x.tolist()}")
        return J
