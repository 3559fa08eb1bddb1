"""Finite-difference Jacobians and a residual-decay differentiability audit."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .linalg import as_jacobian, as_point, spectral_norm
from .mapping import EvaluationError, ExcludedPointError, MappingHandle

__all__ = [
    "DEFAULT_RADII",
    "DifferentiabilityReport",
    "check_frechet",
    "fd_jacobian",
    "jacobian_at",
    "probe_directions",
]

DEFAULT_H = 1e-6
DEFAULT_RADII = tuple(1e-1 * 2.0 ** -k for k in range(13))
_EPS = np.finfo(float).eps


def fd_jacobian(f: MappingHandle, z, h: float = DEFAULT_H) -> np.ndarray:
    """Central-difference Jacobian, ``(f(z + h e_j) - f(z - h e_j)) / 2h``."""
    if not h > 0:
        raise ValueError(f"step must be positive, got {h!r}")
    z = as_point(z)
    J = np.empty((f.m, f.n))
    for j in range(f.n):
        step = np.zeros(f.n)
        step[j] = h
        plus, minus = z + step, z - step
        try:
            if f.is_excluded(plus) or f.is_excluded(minus):
                raise ExcludedPointError("stencil touches an excluded point")
            J[:, j] = (f(plus) - f(minus)) / (2.0 * h)
        except EvaluationError as exc:
            raise EvaluationError(
                f"finite-difference stencil failed around {z.tolist()} along x{j + 1}: {exc}"
            ) from exc
    return J


def jacobian_at(f: MappingHandle, z, h: float = DEFAULT_H) -> np.ndarray:
    """Analytic Jacobian if the handle has one, else central differences."""
    if f.is_excluded(z):
        raise ExcludedPointError(f"{np.asarray(z).tolist()} is an excluded point of {f.name}")
    J = f.analytic_jacobian(z)
    return J if J is not None else fd_jacobian(f, z, h)


def probe_directions(n: int, n_random: int, rng: np.random.Generator) -> np.ndarray:
    """Axis rays, pairwise diagonal rays, then seeded random unit rays."""
    dirs = []
    eye = np.eye(n)
    for j in range(n):
        dirs.extend((eye[j], 0.0 - eye[j]))
    for i in range(n):
        for j in range(i + 1, n):
            for si in (1.0, -1.0):
                for sj in (1.0, -1.0):
                    d = np.zeros(n)
                    d[i], d[j] = si, sj
                    dirs.append(d / math.sqrt(2.0))
    if n_random > 0:
        g = rng.standard_normal((n_random, n))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        dirs.extend(g)
    return np.array(dirs)


@dataclass(frozen=True)
class DifferentiabilityReport:
    point: np.ndarray
    jacobian_used: np.ndarray
    radii: tuple
    worst_residual_per_radius: tuple
    verdict: str  # supported | rejected | inconclusive
    tol: float

    @property
    def final_residual(self) -> float:
        return self.worst_residual_per_radius[-1]

    def to_dict(self) -> dict:
        return {
            "point": self.point.tolist(),
            "jacobian_used": self.jacobian_used.tolist(),
            "radii": list(self.radii),
            "worst_residual_per_radius": list(self.worst_residual_per_radius),
            "verdict": self.verdict,
            "tol": self.tol,
        }


def check_frechet(
    f: MappingHandle,
    z,
    J=None,
    radii: Sequence[float] = DEFAULT_RADII,
    probes_per_radius: int = 8,
    tol: float = 1e-3,
    seed: int = 0,
) -> DifferentiabilityReport:
    """Audit the linear-approximation limit of ``f`` at ``z``.

    For each radius ``r`` the worst relative remainder
    ``||f(z + r d) - f(z) - J r d|| / r`` is taken over the probe rays ``d``.
    ``supported`` needs decay and a final value below ``tol``; ``rejected``
    needs the two smallest radii to stay above ``tol``.  Neither verdict is
    a proof.

    An excluded ``z`` is audited only when ``f`` is defined there and ``J``
    is given explicitly.
    """
    z = as_point(z)
    radii = tuple(float(r) for r in radii)
    if len(radii) < 2 or any(r <= 0 for r in radii):
        raise ValueError("need at least two positive radii")
    if any(b >= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly descending")
    if J is None:
        J = jacobian_at(f, z)
    J = as_jacobian(J)
    if J.shape != (f.m, f.n):
        raise ValueError(f"Jacobian shape {J.shape} does not match mapping {(f.m, f.n)}")

    fz = f(z)
    rng = np.random.default_rng(seed)
    worst = []
    for r in radii:
        dirs = probe_directions(f.n, probes_per_radius, rng)
        res = 0.0
        for d in dirs:
            u = z + r * d
            if f.is_excluded(u):
                raise ExcludedPointError(f"probe hit excluded point {u.tolist()}")
            step = u - z
            res = max(res, float(np.linalg.norm(f(u) - fz - J @ step) / np.linalg.norm(step)))
        worst.append(res)

    # roundoff in f(u) - f(z) grows like eps/r and must not count as growth
    scale = 1.0 + float(np.linalg.norm(fz)) + spectral_norm(J) * float(np.linalg.norm(z))
    noise = [100.0 * _EPS * scale / r for r in radii]
    decreasing = all(b <= a + noise[k + 1] for k, (a, b) in enumerate(zip(worst, worst[1:])))
    if decreasing and worst[-1] < tol:
        verdict = "supported"
    elif min(worst[-2:]) > tol:
        verdict = "rejected"
    else:
        verdict = "inconclusive"
    return DifferentiabilityReport(z, J, radii, tuple(worst), verdict, tol)
