"""The six reference mappings of the plane with closed-form data.

Each entry carries a hand-derived Jacobian, the closed form of the
coderivative-action norm ``||J(z)^T y||``, the expected covering constant
and, where one exists, a norm identity ``||f(x)|| = g(x)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .expr import ExprMapping, parse_mapping
from .mapping import ExcludedPointError, MappingHandle

__all__ = ["CATALOG_IDS", "CatalogEntry", "ReferenceCovering", "closed_form_action_norm", "get", "radical_quadratic_form"]

SQRT2 = math.sqrt(2.0)
ORIGIN = (0.0, 0.0)


@dataclass(frozen=True)
class ReferenceCovering:
    """Expected covering constant: ``exact`` value, ``zero``, or ``upper_bounds``."""

    kind: str
    value: Optional[float] = None
    bounds: tuple = ()

    def to_dict(self) -> dict:
        return {"kind": self.kind, "value": self.value, "bounds": list(self.bounds)}


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    title: str
    formula: str
    jacobian_formula: str
    covering_formula: str
    expression: str
    handle: MappingHandle
    action_norm: Callable[[np.ndarray, np.ndarray], float]
    reference_covering: Callable[[np.ndarray], ReferenceCovering]
    norm_identity: Optional[Callable[[np.ndarray], float]] = None

    def expr_mapping(self) -> ExprMapping:
        return parse_mapping(self.expression, n=2, m=2)

    def closed_form_action_norm(self, z, y) -> float:
        z = np.asarray(z, dtype=float)
        if self.handle.is_excluded(z):
            raise ExcludedPointError(f"{z.tolist()} is an excluded point of {self.id}")
        return float(self.action_norm(z, np.asarray(y, dtype=float)))


# Evaluators and Jacobians broadcast over leading axes: ``x[..., 0]`` and
# ``x[..., 1]`` are the coordinates, Jacobians have shape ``(..., 2, 2)``.

def _rows(a11, a12, a21, a22):
    return np.stack([np.stack([a11, a12], axis=-1), np.stack([a21, a22], axis=-1)], axis=-2)


# -- 4.1 rational -----------------------------------------------------------

def _rational_f(x):
    x1, x2 = x[..., 0], x[..., 1]
    r2 = x1 * x1 + x2 * x2
    safe = np.where(r2 == 0.0, 1.0, r2)
    return np.stack([(x1 * x1 - x2 * x2) / safe, 2.0 * x1 * x2 / safe], axis=-1)


def _rational_J(z):
    z1, z2 = z[..., 0], z[..., 1]
    r4 = (z1 * z1 + z2 * z2) ** 2
    d = z1 * z1 - z2 * z2
    return _rows(4.0 * z1 * z2 * z2 / r4, -4.0 * z1 * z1 * z2 / r4,
                 -2.0 * z2 * d / r4, 2.0 * z1 * d / r4)


def _rational_norm(z, y):
    z1, z2 = z
    r = math.hypot(z1, z2)
    return 2.0 * abs(2.0 * y[0] * z1 * z2 - y[1] * (z1 * z1 - z2 * z2)) / r ** 3


def _nonzero_cover(z) -> ReferenceCovering:
    if not np.any(z):
        raise ExcludedPointError("no reference covering constant at the origin")
    return ReferenceCovering("zero", 0.0)


# -- 4.2 trigonometric ------------------------------------------------------

def _trig_f(x):
    s = x[..., 0] + x[..., 1]
    return np.stack([np.sin(s), np.cos(s)], axis=-1)


def _trig_J(z):
    s = z[..., 0] + z[..., 1]
    c, sn = np.cos(s), np.sin(s)
    return _rows(c, c, -sn, -sn)


def _trig_norm(z, y):
    s = z[0] + z[1]
    return SQRT2 * abs(y[0] * math.cos(s) - y[1] * math.sin(s))


# -- 4.3 polynomial ---------------------------------------------------------

def _poly_f(x):
    x1, x2 = x[..., 0], x[..., 1]
    return np.stack([x1 * x1 - x2 * x2, 2.0 * x1 * x2], axis=-1)


def _poly_J(z):
    z1, z2 = z[..., 0], z[..., 1]
    return _rows(2.0 * z1, -2.0 * z2, 2.0 * z2, 2.0 * z1)


def _poly_norm(z, y):
    return 2.0 * math.hypot(*y) * math.hypot(*z)


# -- 4.4 exponential --------------------------------------------------------

def _exp_f(x):
    s = x[..., 0] + x[..., 1]
    return np.stack([np.exp(s), np.exp(-s)], axis=-1)


def _exp_J(z):
    s = z[..., 0] + z[..., 1]
    e, ei = np.exp(s), np.exp(-s)
    return _rows(e, e, -ei, -ei)


def _exp_norm(z, y):
    s = z[0] + z[1]
    return SQRT2 * abs(y[0] * math.exp(s) - y[1] * math.exp(-s))


# -- 4.5 logarithmic --------------------------------------------------------

def _log_f(x):
    q = 1.0 + x[..., 0] ** 2 + x[..., 1] ** 2
    return np.stack([np.log(q), 1.0 / q], axis=-1)


def _log_J(z):
    z1, z2 = z[..., 0], z[..., 1]
    q = 1.0 + z1 * z1 + z2 * z2
    return _rows(2.0 * z1 / q, 2.0 * z2 / q, -2.0 * z1 / q ** 2, -2.0 * z2 / q ** 2)


def _log_norm(z, y):
    q = 1.0 + z[0] * z[0] + z[1] * z[1]
    return 2.0 * math.hypot(*z) / q * abs(y[0] - y[1] / q)


# -- 4.6 rational with radical ----------------------------------------------

def _radical_f(x):
    x1, x2 = x[..., 0], x[..., 1]
    r = np.hypot(x1, x2)
    safe = np.where(r == 0.0, 1.0, r)
    return np.stack([x1 * x1 / safe, x2 * x2 / safe], axis=-1)


def _radical_J(z):
    # derived from f directly: d/dz1 (z1^2/r) = (z1^3 + 2 z1 z2^2)/r^3, etc.
    z1, z2 = z[..., 0], z[..., 1]
    r3 = np.hypot(z1, z2) ** 3
    return _rows((z1 ** 3 + 2.0 * z1 * z2 * z2) / r3, -z1 * z1 * z2 / r3,
                 -z1 * z2 * z2 / r3, (z2 ** 3 + 2.0 * z1 * z1 * z2) / r3)


def _radical_norm(z, y):
    z1, z2 = z
    a, b = z1 * z1, z2 * z2
    return math.sqrt((y[0] * a + y[1] * b) ** 2 + 4.0 * a * b * (y[0] - y[1]) ** 2) / (a + b)


def radical_bounds(zbar) -> tuple[float, float]:
    """Upper bounds on the radical mapping's covering constant at ``zbar``.

    Returns ``(1/sqrt(2), 2|z1 z2| / sqrt(z1^4 + z2^4))``.
    """
    z1, z2 = (float(v) for v in zbar)
    if z1 == 0.0 and z2 == 0.0:
        raise ExcludedPointError("covering bounds are undefined at the origin")
    return 1.0 / SQRT2, 2.0 * abs(z1 * z2) / math.sqrt(z1 ** 4 + z2 ** 4)


def radical_quadratic_form(zbar) -> np.ndarray:
    """Matrix of ``(y1 z1^2 + y2 z2^2)^2 + 4 z1^2 z2^2 (y1 - y2)^2`` in ``y``.

    Equals ``(z1^2 + z2^2)^2 * J J^T`` for the radical mapping's Jacobian.
    """
    z1, z2 = (float(v) for v in zbar)
    a, b = z1 * z1, z2 * z2
    p = a * b
    return np.array([[a * a + 4.0 * p, -3.0 * p], [-3.0 * p, b * b + 4.0 * p]])


def _radical_cover(z) -> ReferenceCovering:
    upper_i, upper_iii = radical_bounds(z)
    if z[0] * z[1] == 0.0:
        return ReferenceCovering("zero", 0.0)
    return ReferenceCovering("upper_bounds", None, (upper_i, upper_iii))


def _entry(id, title, formulas, expression, f, J, action, cover, identity=None, excluded=()):
    handle = MappingHandle(n=2, m=2, evaluate=f, jacobian=J, excluded_points=excluded, name=id,
                           vectorized=True)
    return CatalogEntry(id, title, *formulas, expression, handle, action, cover, identity)


_ENTRIES = {
    e.id: e
    for e in (
        _entry(
            "rational_4_1", "rational mapping",
            ("f(x) = ((x1^2 - x2^2)/(x1^2 + x2^2), 2 x1 x2/(x1^2 + x2^2)), f(0) = 0",
             "J(z) = [[4 z1 z2^2, -4 z1^2 z2], [-2 z2 (z1^2 - z2^2), 2 z1 (z1^2 - z2^2)]] / ||z||^4, z != 0",
             "0 at every z != 0; no Frechet derivative at 0"),
            "(x1^2 - x2^2)/(x1^2 + x2^2); 2*x1*x2/(x1^2 + x2^2)",
            _rational_f, _rational_J, _rational_norm, _nonzero_cover,
            identity=lambda x: 1.0, excluded=(ORIGIN,),
        ),
        _entry(
            "trig_4_2", "trigonometric mapping",
            ("f(x) = (sin(x1 + x2), cos(x1 + x2))",
             "J(z) = [[cos(z1 + z2), cos(z1 + z2)], [-sin(z1 + z2), -sin(z1 + z2)]]",
             "0 everywhere"),
            "sin(x1 + x2); cos(x1 + x2)",
            _trig_f, _trig_J, _trig_norm, lambda z: ReferenceCovering("zero", 0.0),
            identity=lambda x: 1.0,
        ),
        _entry(
            "poly_4_3", "polynomial mapping",
            ("f(x) = (x1^2 - x2^2, 2 x1 x2)",
             "J(z) = [[2 z1, -2 z2], [2 z2, 2 z1]]",
             "2 ||z||"),
            "x1^2 - x2^2; 2*x1*x2",
            _poly_f, _poly_J, _poly_norm,
            lambda z: ReferenceCovering("exact", 2.0 * math.hypot(*z)),
            identity=lambda x: float(x[0] ** 2 + x[1] ** 2),
        ),
        _entry(
            "exp_4_4", "exponential mapping",
            ("f(x) = (exp(x1 + x2), exp(-x1 - x2))",
             "J(z) = [[e^(z1 + z2), e^(z1 + z2)], [-e^(-z1 - z2), -e^(-z1 - z2)]]",
             "0 everywhere"),
            "exp(x1 + x2); exp(-x1 - x2)",
            _exp_f, _exp_J, _exp_norm, lambda z: ReferenceCovering("zero", 0.0),
        ),
        _entry(
            "log_4_5", "logarithmic mapping",
            ("f(x) = (ln(1 + x1^2 + x2^2), 1/(1 + x1^2 + x2^2))",
             "J(z) = [[2 z1/q, 2 z2/q], [-2 z1/q^2, -2 z2/q^2]], q = 1 + z1^2 + z2^2",
             "0 everywhere"),
            "ln(1 + x1^2 + x2^2); 1/(1 + x1^2 + x2^2)",
            _log_f, _log_J, _log_norm, lambda z: ReferenceCovering("zero", 0.0),
        ),
        _entry(
            "radical_4_6", "rational mapping with radical",
            ("f(x) = (x1^2/sqrt(x1^2 + x2^2), x2^2/sqrt(x1^2 + x2^2)), f(0) = 0",
             "J(z) = [[z1^3 + 2 z1 z2^2, -z1^2 z2], [-z1 z2^2, z2^3 + 2 z1^2 z2]] / ||z||^3, z != 0",
             "at most min(1/sqrt(2), 2|z1 z2|/sqrt(z1^4 + z2^4)); 0 when z1 z2 = 0"),
            "x1^2/sqrt(x1^2 + x2^2); x2^2/sqrt(x1^2 + x2^2)",
            _radical_f, _radical_J, _radical_norm, _radical_cover, excluded=(ORIGIN,),
        ),
    )
}

CATALOG_IDS = tuple(_ENTRIES)


def get(id: str) -> CatalogEntry:
    try:
        return _ENTRIES[id]
    except KeyError:
        raise KeyError(f"unknown catalog id {id!r}; choose from {', '.join(CATALOG_IDS)}") from None


def closed_form_action_norm(id: str, z, y) -> float:
    return get(id).closed_form_action_norm(z, y)
