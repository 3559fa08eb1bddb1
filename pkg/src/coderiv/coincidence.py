"""Parameterized coincidence equations ``F(x) = G(x, p)``.

If ``G(., p)`` is ``beta``-Lipschitz near ``xbar`` and ``beta < alpha`` with
``alpha`` below the covering constant of ``F`` at ``(xbar, F(xbar))``, a
solution ``sigma(p)`` exists with

    ||sigma(p) - xbar|| <= ||G(xbar, p) - F(xbar)|| / (alpha - beta).

Existence gives no algorithm.  We use damped Gauss-Newton on the residual
``F(x) - G(x, p)``: linearise ``F`` only, take the minimum-norm
least-squares step, cap its length at ``||residual|| / alpha`` (the step a
covering constant ``alpha`` guarantees to be enough) and backtrack until the
residual does not increase.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from . import catalog
from .frechet import jacobian_at
from .linalg import DEFAULT_TOLERANCES, Ball, Tolerances, as_point, min_singular_value, norm
from .mapping import EvaluationError, MappingHandle

__all__ = [
    "CoincidenceCertificate",
    "ConvergenceError",
    "ParameterizedMapping",
    "SingularJacobianError",
    "StepRecord",
    "estimate_lipschitz",
    "solve_coincidence",
    "solve_grid",
    "theorem_5_1_check",
]


class ConvergenceError(RuntimeError):
    pass


class SingularJacobianError(ConvergenceError):
    """Residual stalled where ``F`` has a (numerically) singular Jacobian."""


@dataclass(frozen=True)
class ParameterizedMapping:
    n: int
    m: int
    k: int
    evaluate: Callable[[np.ndarray, np.ndarray], Sequence[float]]
    name: str = "G"

    def __call__(self, x, p) -> np.ndarray:
        x = as_point(x)
        p = np.asarray(p, dtype=float).reshape(-1)
        if x.size != self.n or p.size != self.k:
            raise ValueError(f"{self.name} expects x in R^{self.n} and p in R^{self.k}")
        try:
            out = np.asarray(self.evaluate(x, p), dtype=float).reshape(-1)
        except EvaluationError:
            raise
        except (ArithmeticError, ValueError) as exc:
            raise EvaluationError(f"{self.name} failed at x={x.tolist()}, p={p.tolist()}: {exc}") from exc
        if out.size != self.m or not np.all(np.isfinite(out)):
            raise EvaluationError(f"{self.name} returned an invalid value at x={x.tolist()}")
        return out

    @classmethod
    def from_expr(cls, mapping, name: str = "G") -> "ParameterizedMapping":
        """Wrap an :class:`~coderiv.expr.ExprMapping` (parameters p1..pk)."""
        return cls(mapping.n, mapping.m, mapping.k, mapping.eval, name)


@dataclass(frozen=True)
class StepRecord:
    residual_before: float
    residual_after: float
    step_norm: float
    budget: float
    damping: float


@dataclass(frozen=True)
class CoincidenceCertificate:
    parameter: np.ndarray
    solution: np.ndarray
    residual: float
    bound_rhs: float
    bound_holds: bool
    iterations: int
    converged: bool
    xbar: np.ndarray
    ybar: np.ndarray
    alpha: float
    beta: float
    tol: float
    distance: float
    steps: tuple = ()
    identity_residual: Optional[float] = None

    def to_dict(self) -> dict:
        out = {
            "parameter": self.parameter.tolist(),
            "solution": self.solution.tolist(),
            "residual": self.residual,
            "bound_rhs": self.bound_rhs,
            "bound_holds": self.bound_holds,
            "distance": self.distance,
            "iterations": self.iterations,
            "converged": self.converged,
            "xbar": self.xbar.tolist(),
            "ybar": self.ybar.tolist(),
            "alpha": self.alpha,
            "beta": self.beta,
            "tol": self.tol,
        }
        if self.identity_residual is not None:
            out["identity_residual"] = self.identity_residual
        return out


def _uniform_in_ball(ball: Ball, count: int, rng: np.random.Generator) -> np.ndarray:
    n = ball.center.size
    g = rng.standard_normal((count, n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = ball.radius * rng.random(count) ** (1.0 / n)
    return ball.center + g * r[:, None]


def estimate_lipschitz(G: ParameterizedMapping, ball: Ball, p, pairs: int = 2000, seed: int = 0) -> float:
    """Largest observed difference quotient of ``G(., p)`` on ``ball``.

    A lower bound on the true modulus, never a certificate.
    """
    rng = np.random.default_rng(seed)
    a = _uniform_in_ball(ball, pairs, rng)
    b = _uniform_in_ball(ball, pairs, rng)
    best = 0.0
    for x, xp in zip(a, b):
        d = norm(x - xp)
        if d == 0.0:
            continue
        best = max(best, norm(G(x, p) - G(xp, p)) / d)
    return best


def solve_coincidence(
    F: MappingHandle,
    G: ParameterizedMapping,
    xbar,
    p,
    alpha: float,
    beta: float = 0.0,
    max_iter: int = 50,
    tol: float = 1e-10,
    slack: float = 0.01,
    x0=None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> CoincidenceCertificate:
    """Solve ``F(x) = G(x, p)`` near ``xbar`` and certify the distance bound.

    Raises :class:`SingularJacobianError` when no step reduces the residual
    and ``F``'s Jacobian is singular.  Non-convergence otherwise yields a
    certificate with ``converged=False``.
    """
    if not (0.0 <= beta < alpha):
        raise ValueError(f"need 0 <= beta < alpha, got beta={beta}, alpha={alpha}")
    xbar = as_point(xbar, "xbar")
    p = np.asarray(p, dtype=float).reshape(-1)
    ybar = F(xbar)
    bound_rhs = norm(G(xbar, p) - ybar) / (alpha - beta)

    def residual(x):
        return F(x) - G(x, p)

    x = xbar.copy() if x0 is None else as_point(x0, "x0")
    r = residual(x)
    rnorm = norm(r)
    history = []
    it = 0
    while rnorm > tol and it < max_iter:
        J = jacobian_at(F, x)
        delta = np.linalg.lstsq(J, -r, rcond=None)[0]
        budget = rnorm / alpha * (1.0 + slack)
        dn = norm(delta)
        if dn > budget:
            delta *= budget / dn
        accepted = False
        t = 1.0
        for _ in range(40):
            trial = x + t * delta
            try:
                r_trial = residual(trial)
            except EvaluationError:
                t *= 0.5
                continue
            if norm(r_trial) <= rnorm:
                accepted = True
                break
            t *= 0.5
        if not accepted or t * norm(delta) == 0.0:
            if min_singular_value(J, tolerances) < tolerances.singular_floor:
                raise SingularJacobianError(
                    f"residual stalled at {x.tolist()} where F's Jacobian is singular; "
                    "alpha is probably above the covering constant of F there"
                )
            break
        new_norm = norm(r_trial)
        history.append(StepRecord(rnorm, new_norm, t * norm(delta), budget, t))
        x, r, rnorm = trial, r_trial, new_norm
        it += 1

    distance = norm(x - xbar)
    return CoincidenceCertificate(
        parameter=p,
        solution=x,
        residual=rnorm,
        bound_rhs=bound_rhs,
        bound_holds=bool(distance <= bound_rhs + tol),
        iterations=it,
        converged=bool(rnorm <= tol),
        xbar=xbar,
        ybar=ybar,
        alpha=float(alpha),
        beta=float(beta),
        tol=tol,
        distance=distance,
        steps=tuple(history),
    )


def solve_grid(F, G, xbar, params, alpha, beta=0.0, **kwargs) -> list:
    """Independent solves over a list of parameters."""
    return [solve_coincidence(F, G, xbar, p, alpha, beta, **kwargs) for p in params]


def theorem_5_1_check(
    h: ParameterizedMapping,
    omega: Callable[[np.ndarray], Sequence[float]],
    xbar,
    s,
    alpha: float,
    beta: float = 0.0,
    **kwargs,
) -> CoincidenceCertificate:
    """Solve ``f(x) = h(x, s) + omega(s)`` for the polynomial mapping ``f``.

    Requires ``beta < alpha < ||xbar||``.  The certificate also records the
    residual of ``||h(sigma, s) + omega(s)||^2 = ||sigma||^4``.
    """
    xbar = as_point(xbar, "xbar")
    if not (0.0 <= beta < alpha < norm(xbar)):
        raise ValueError(f"need 0 <= beta < alpha < ||xbar|| = {norm(xbar)}, got beta={beta}, alpha={alpha}")
    s = np.asarray(s, dtype=float).reshape(-1)
    F = catalog.get("poly_4_3").handle
    G = ParameterizedMapping(
        h.n, h.m, h.k,
        lambda x, q: np.asarray(h(x, q)) + np.asarray(omega(q), dtype=float),
        name=f"{h.name}+omega",
    )
    cert = solve_coincidence(F, G, xbar, s, alpha, beta, **kwargs)
    sig = cert.solution
    rhs = G(sig, s)
    identity = float(rhs @ rhs - (sig @ sig) ** 2)
    return replace(cert, identity_residual=abs(identity))
