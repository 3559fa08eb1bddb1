"""Coderivative computations.

At a Fréchet-differentiable point the coderivative of a single-valued
mapping is the singleton ``{J(x)^T y}``.  At singular points the defining
limsup quotient

    Q(u) = (<z, u - x> - <y, f(u) - f(x)>) / (||u - x|| + ||f(u) - f(x)||)

is probed along rays ``u = x + t d``; a ray whose limit is positive proves
that the candidate ``z`` is not in the coderivative set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .frechet import jacobian_at, probe_directions
from .linalg import adjoint_apply, as_point, inner, norm
from .mapping import EvaluationError, ExcludedPointError, MappingHandle

__all__ = [
    "DEFAULT_STEPS",
    "EmptyEvidence",
    "LimsupProbeReport",
    "RayEstimate",
    "Singleton",
    "Unknown",
    "coderivative",
    "coderivative_action_norm",
    "coderivative_matrix",
    "default_rays",
    "limsup_probe",
]

DEFAULT_STEPS = tuple(1e-1 * 2.0 ** -k for k in range(12))
DEFAULT_TOL = 1e-3


def coderivative_matrix(f: MappingHandle, z) -> np.ndarray:
    """Jacobian whose transpose is the coderivative action at ``z``."""
    z = as_point(z)
    if f.is_excluded(z):
        raise ExcludedPointError(
            f"{z.tolist()} is an excluded point of {f.name}; use limsup_probe there"
        )
    return jacobian_at(f, z)


def coderivative_action_norm(f: MappingHandle, z, y) -> float:
    return norm(adjoint_apply(coderivative_matrix(f, z), as_point(y, "covector")))


def default_rays(n: int) -> np.ndarray:
    """Axis and diagonal rays (no random ones)."""
    return probe_directions(n, 0, np.random.default_rng(0))


@dataclass(frozen=True)
class RayEstimate:
    direction: np.ndarray
    estimate: float
    samples: tuple  # Q at each step
    jump: float  # ||f(x + t d) - f(x)|| at the smallest step

    def to_dict(self) -> dict:
        return {
            "direction": self.direction.tolist(),
            "one_sided_limit_estimate": self.estimate,
            "samples": list(self.samples),
            "jump": self.jump,
        }


@dataclass(frozen=True)
class LimsupProbeReport:
    base_point: np.ndarray
    covector: np.ndarray
    candidate: np.ndarray
    probe_rays: tuple
    random_probe_max: float
    verdict: str  # rejected | plausible
    tol: float
    skipped_rays: tuple = ()

    @property
    def max_estimate(self) -> float:
        return max(r.estimate for r in self.probe_rays)

    def rejecting_rays(self) -> list:
        return [r for r in self.probe_rays if r.estimate > self.tol]

    def to_dict(self) -> dict:
        return {
            "base_point": self.base_point.tolist(),
            "covector": self.covector.tolist(),
            "candidate": self.candidate.tolist(),
            "probe_rays": [r.to_dict() for r in self.probe_rays],
            "random_probe_max": self.random_probe_max,
            "verdict": self.verdict,
            "tol": self.tol,
            "skipped_rays": [{"direction": d, "reason": why} for d, why in self.skipped_rays],
        }


def _quotient(f: MappingHandle, x, fx, y, z, u) -> tuple[float, float]:
    du = u - x
    dfu = f(u) - fx
    jump = norm(dfu)
    return (inner(z, du) - inner(y, dfu)) / (norm(du) + jump), jump


def _extrapolate_to_zero(ts: Sequence[float], qs: Sequence[float]) -> float:
    """Value at t = 0 of the quadratic through the last three samples."""
    if len(ts) < 3:
        return qs[-1]
    t, q = ts[-3:], qs[-3:]
    total = 0.0
    for i in range(3):
        w = 1.0
        for j in range(3):
            if j != i:
                w *= t[j] / (t[j] - t[i])
        total += w * q[i]
    return total


def limsup_probe(
    f: MappingHandle,
    x,
    y,
    z_candidate,
    rays=None,
    steps: Sequence[float] = DEFAULT_STEPS,
    random_count: int = 16,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
) -> LimsupProbeReport:
    """Test whether ``z_candidate`` can belong to the coderivative at ``x``.

    Each ray's one-sided limit of ``Q`` is extrapolated from the last three
    steps.  ``rejected`` means some ray limit exceeds ``tol``; ``plausible``
    does not certify membership.  ``random_probe_max`` is the largest raw
    ``Q`` over seeded random rays at the smallest step (diagnostic only).
    """
    x = as_point(x)
    y = as_point(y, "covector")
    z = as_point(z_candidate, "candidate")
    if x.size != f.n or z.size != f.n or y.size != f.m:
        raise ValueError("dimension mismatch between mapping, point, covector and candidate")
    steps = tuple(float(t) for t in steps)
    if not steps or any(t <= 0 for t in steps) or any(b >= a for a, b in zip(steps, steps[1:])):
        raise ValueError("steps must be positive and strictly descending")
    rays = default_rays(f.n) if rays is None else np.atleast_2d(np.asarray(rays, dtype=float))
    fx = f(x)

    estimates, skipped = [], []
    for d in rays:
        d = d / norm(d)
        try:
            pairs = [_quotient(f, x, fx, y, z, x + t * d) for t in steps]
        except EvaluationError as exc:
            skipped.append((d.tolist(), str(exc)))
            continue
        qs = [q for q, _ in pairs]
        est = _extrapolate_to_zero(steps, qs)
        if not math.isfinite(est):
            skipped.append((d.tolist(), "non-finite extrapolation"))
            continue
        estimates.append(RayEstimate(d, est, tuple(qs), pairs[-1][1]))
    if not estimates:
        raise EvaluationError(f"every probe ray failed at {x.tolist()}")

    rng = np.random.default_rng(seed)
    random_max = -math.inf
    if random_count > 0:
        g = rng.standard_normal((random_count, f.n))
        for d in g / np.linalg.norm(g, axis=1, keepdims=True):
            try:
                random_max = max(random_max, _quotient(f, x, fx, y, z, x + steps[-1] * d)[0])
            except EvaluationError:
                continue

    verdict = "rejected" if any(e.estimate > tol for e in estimates) else "plausible"
    return LimsupProbeReport(x, y, z, tuple(estimates), random_max, verdict, tol, tuple(skipped))


@dataclass(frozen=True)
class Singleton:
    """The coderivative set is ``{point}``."""
    point: np.ndarray


@dataclass(frozen=True)
class EmptyEvidence:
    """A rejecting ray along which ``f`` jumps: every candidate is excluded."""
    report: LimsupProbeReport


@dataclass(frozen=True)
class Unknown:
    report: LimsupProbeReport


CoderivativeOutcome = Union[Singleton, EmptyEvidence, Unknown]


def coderivative(f: MappingHandle, x, y, jump_tol: float = 1e-6, **probe_kwargs) -> CoderivativeOutcome:
    """Coderivative set of ``f`` at ``x`` applied to ``y``, as a tagged outcome.

    Off the excluded points this is the singleton ``{J(x)^T y}``.  At an
    excluded point the rays are probed with candidate 0.  Along a rejecting
    ray where ``f`` has a jump, the ``<z, u - x>`` term vanishes in the limit
    for every ``z``, so the rejection holds for all candidates.
    """
    x = as_point(x)
    y = as_point(y, "covector")
    if not f.is_excluded(x):
        return Singleton(adjoint_apply(coderivative_matrix(f, x), y))
    report = limsup_probe(f, x, y, np.zeros(f.n), **probe_kwargs)
    if any(r.jump > jump_tol for r in report.rejecting_rays()):
        return EmptyEvidence(report)
    return Unknown(report)
