"""Covering-constant estimation for smooth single-valued mappings.

For a mapping differentiable near ``zbar`` the covering constant is

    sup_{eta > 0} inf { sigma_min(J(z)) : ||z - zbar|| <= eta, ||f(z) - f(zbar)|| <= eta }

The inner infimum over unit covectors is computed exactly as the smallest
singular value; the infimum over points is estimated on a deterministic
low-discrepancy sample of each ball.  Samples drawn for smaller balls are
reused for larger ones, so the accepted sets are nested and the per-eta
infima can only grow as eta shrinks.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc, norm as normal_dist

from .catalog import radical_bounds, radical_quadratic_form
from .frechet import jacobian_at
from .linalg import DEFAULT_TOLERANCES, Tolerances, as_jacobian, as_point, min_singular_values, sym_eig_2x2
from .mapping import EvaluationError, MappingHandle

__all__ = [
    "CoveringReport",
    "EtaLevel",
    "EtaSchedule",
    "ball_samples",
    "covering_bounds_4_6",
    "covering_constant",
    "lagrange_residuals",
    "radical_sphere_minimizer",
    "sphere_min_oracle",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EtaSchedule:
    eta0: float = 0.1
    factor: float = 0.5
    count: int = 12

    def __post_init__(self) -> None:
        if not (self.eta0 > 0 and math.isfinite(self.eta0)):
            raise ValueError(f"eta0 must be positive, got {self.eta0!r}")
        if not 0 < self.factor < 1:
            raise ValueError(f"factor must lie in (0, 1), got {self.factor!r}")
        if self.count < 1:
            raise ValueError(f"count must be positive, got {self.count!r}")

    def etas(self) -> list[float]:
        return [self.eta0 * self.factor ** k for k in range(self.count)]

    def to_dict(self) -> dict:
        return {"eta0": self.eta0, "factor": self.factor, "count": self.count}


@dataclass(frozen=True)
class EtaLevel:
    eta: float
    inf_estimate: float  # +inf when nothing was accepted
    sample_count: int
    accepted_count: int

    def to_dict(self) -> dict:
        inf = self.inf_estimate
        return {
            "eta": self.eta,
            "inf_estimate": inf if math.isfinite(inf) else None,
            "sample_count": self.sample_count,
            "accepted_count": self.accepted_count,
        }


@dataclass(frozen=True)
class CoveringReport:
    base_point: np.ndarray
    image_point: np.ndarray
    per_eta_inf: tuple
    final_estimate: float
    monotone_flag: bool
    raw_final: float  # before snapping to the singular floor

    def to_dict(self) -> dict:
        return {
            "base_point": self.base_point.tolist(),
            "image_point": self.image_point.tolist(),
            "per_eta_inf": [lvl.to_dict() for lvl in self.per_eta_inf],
            "final_estimate": self.final_estimate,
            "raw_final": self.raw_final,
            "monotone_flag": self.monotone_flag,
        }


def ball_samples(center, radius: float, count: int, seed: int) -> np.ndarray:
    """``count`` scrambled-Halton points in the closed ball, deterministic in ``seed``."""
    center = as_point(center)
    n = center.size
    if count <= 0:
        return np.empty((0, n))
    dims = n if n <= 2 else n + 1
    u = qmc.Halton(d=dims, scramble=True, seed=seed).random(count)
    if n == 1:
        offsets = (2.0 * u - 1.0) * radius
    elif n == 2:
        # area-preserving polar map keeps the points evenly spread
        r = radius * np.sqrt(u[:, 0])
        phi = 2.0 * math.pi * u[:, 1]
        offsets = np.column_stack((r * np.cos(phi), r * np.sin(phi)))
    else:
        g = normal_dist.ppf(np.clip(u[:, :n], 1e-12, 1.0 - 1e-12))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        offsets = g * (radius * u[:, n] ** (1.0 / n))[:, None]
    return center + offsets


def covering_constant(
    f: MappingHandle,
    zbar,
    schedule: EtaSchedule = EtaSchedule(),
    samples_per_eta: int = 256,
    seed: int = 0,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> CoveringReport:
    zbar = as_point(zbar)
    try:
        wbar = f(zbar)
    except EvaluationError as exc:
        raise EvaluationError(f"base image f(zbar) is not evaluable: {exc}") from exc

    etas = schedule.etas()
    pool = [zbar[None, :]]
    for k, eta in enumerate(etas):
        pool.append(ball_samples(zbar, eta, samples_per_eta, seed + k))
    pool = np.vstack(pool)

    keep = np.array([not f.is_excluded(z) for z in pool], dtype=bool)
    pool = pool[keep]
    images = f.evaluate_many(pool)
    Js = f.jacobian_many(pool)
    if Js is None:
        Js = np.full((len(pool), f.m, f.n), np.nan)
        for i, z in enumerate(pool):
            if np.all(np.isfinite(images[i])):
                try:
                    Js[i] = jacobian_at(f, z)
                except EvaluationError:
                    pass
    ok = np.all(np.isfinite(images), axis=1) & np.all(np.isfinite(Js), axis=(1, 2))
    pool, images, Js = pool[ok], images[ok], Js[ok]
    dist = np.linalg.norm(pool - zbar, axis=1)
    image_dist = np.linalg.norm(images - wbar, axis=1)
    sigma = min_singular_values(Js, tol)

    levels = []
    for eta in etas:
        in_ball = dist <= eta
        accepted = in_ball & (image_dist <= eta)
        if accepted.any():
            inf = float(sigma[accepted].min())
        else:
            log.warning("no accepted samples at eta=%g; treating the infimum as +inf", eta)
            inf = math.inf
        levels.append(EtaLevel(eta, inf, int(in_ball.sum()), int(accepted.sum())))

    finite = [lvl.inf_estimate for lvl in levels if math.isfinite(lvl.inf_estimate)]
    if not finite:
        raise EvaluationError(f"no accepted samples at any eta around {zbar.tolist()}")
    monotone = all(b >= a - 1e-9 for a, b in zip(finite, finite[1:]))
    raw = finite[-1]
    return CoveringReport(zbar, wbar, tuple(levels), tol.snap(raw), monotone, raw)


def sphere_min_oracle(J, grid_count: int = 4096):
    """Brute-force ``min ||J^T y||`` over a grid on the unit sphere of covectors.

    A uniform angle grid for two rows, a Fibonacci lattice for three.
    Returns ``(value, argmin)``.
    """
    J = as_jacobian(J)
    m = J.shape[0]
    if grid_count < 64:
        raise ValueError("grid_count must be at least 64")
    if m == 2:
        phi = 2.0 * math.pi * np.arange(grid_count) / grid_count
        ys = np.column_stack((np.cos(phi), np.sin(phi)))
    elif m == 3:
        i = np.arange(grid_count) + 0.5
        polar = np.arccos(1.0 - 2.0 * i / grid_count)
        azim = math.pi * (1.0 + math.sqrt(5.0)) * i
        ys = np.column_stack((np.cos(azim) * np.sin(polar), np.sin(azim) * np.sin(polar), np.cos(polar)))
    else:
        raise ValueError(f"sphere oracle supports 2 or 3 rows, got {m}")
    values = np.linalg.norm(ys @ J, axis=1)
    k = int(np.argmin(values))
    return float(values[k]), ys[k]


def covering_bounds_4_6(zbar) -> tuple[float, float]:
    return radical_bounds(zbar)


def radical_sphere_minimizer(zbar, tol: Tolerances = DEFAULT_TOLERANCES):
    """Minimise ``||J^T y||`` over unit ``y`` for the radical mapping.

    Uses the smallest eigenpair of the quadratic form in ``y``.  Returns
    ``(value, y, multiplier)``, the multiplier being the eigenvalue.
    """
    z1, z2 = (float(v) for v in zbar)
    lam, _, v, _ = sym_eig_2x2(radical_quadratic_form(zbar), tol)
    lam = max(lam, 0.0)
    return math.sqrt(lam) / (z1 * z1 + z2 * z2), v, lam


def lagrange_residuals(zbar, y, lam: float) -> tuple[float, float]:
    """Partial derivatives of the Lagrangian in ``y1`` and ``y2``."""
    z1, z2 = (float(v) for v in zbar)
    y1, y2 = (float(v) for v in y)
    a, b = z1 * z1, z2 * z2
    lin = y1 * a + y2 * b
    L1 = 2.0 * a * lin + 8.0 * a * b * (y1 - y2) - 2.0 * lam * y1
    L2 = 2.0 * b * lin - 8.0 * a * b * (y1 - y2) - 2.0 * lam * y2
    return L1, L2
