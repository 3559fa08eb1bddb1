"""Small dense vector/matrix primitives.

Points are 1-D float arrays; Jacobians are 2-D float arrays stored
output-major (``J[i, j] = d f_i / d x_j``).  The coderivative of a smooth
mapping acts on covectors as ``y -> J.T @ y``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Ball",
    "DimensionError",
    "Tolerances",
    "DEFAULT_TOLERANCES",
    "adjoint_apply",
    "as_jacobian",
    "as_point",
    "inner",
    "min_singular_value",
    "min_singular_values",
    "norm",
    "spectral_norm",
    "sym_eig_2x2",
]


class DimensionError(ValueError):
    """Operand shapes are incompatible."""


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances shared by the toolkit.

    ``singular_floor`` is the threshold below which singular values and
    covering estimates are reported as exact zeros.
    """

    abs_tol: float = 1e-12
    rel_tol: float = 1e-12
    singular_floor: float = 1e-9

    def __post_init__(self) -> None:
        for name in ("abs_tol", "rel_tol", "singular_floor"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        if self.singular_floor < self.abs_tol:
            raise ValueError("singular_floor must be >= abs_tol")

    def snap(self, value: float) -> float:
        """Return 0.0 for values under the singular floor."""
        return 0.0 if abs(value) < self.singular_floor else value


DEFAULT_TOLERANCES = Tolerances()


def as_point(x, name: str = "point") -> np.ndarray:
    arr = np.atleast_1d(np.array(x, dtype=float))
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionError(f"{name} must be a non-empty 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries: {arr}")
    return arr


def as_jacobian(J, name: str = "jacobian") -> np.ndarray:
    arr = np.array(J, dtype=float)
    if arr.ndim != 2 or 0 in arr.shape:
        raise DimensionError(f"{name} must be a non-empty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", as_point(self.center, "center"))
        if not (self.radius >= 0 and math.isfinite(self.radius)):
            raise ValueError(f"radius must be finite and >= 0, got {self.radius!r}")

    def contains(self, x) -> bool:
        return norm(np.asarray(x, dtype=float) - self.center) <= self.radius


def inner(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionError(f"inner product of shapes {a.shape} and {b.shape}")
    return float(np.dot(a, b))


def norm(a) -> float:
    """Euclidean norm (overflow-safe)."""
    return math.hypot(*np.asarray(a, dtype=float).ravel())


def adjoint_apply(J, y) -> np.ndarray:
    J = np.asarray(J, dtype=float)
    y = np.asarray(y, dtype=float)
    if J.ndim != 2 or y.ndim != 1 or J.shape[0] != y.shape[0]:
        raise DimensionError(f"cannot apply transpose of {J.shape} to vector of shape {y.shape}")
    return J.T @ y


def spectral_norm(J) -> float:
    J = np.asarray(J, dtype=float)
    return float(np.linalg.norm(J, 2)) if J.size else 0.0


def sym_eig_2x2(A, tol: Tolerances = DEFAULT_TOLERANCES):
    """Eigen-decomposition of a symmetric 2x2 matrix.

    Returns ``(lam_min, lam_max, v_min, v_max)`` with orthonormal
    eigenvectors.  Uses a single Jacobi rotation, so no iteration.
    """
    A = np.asarray(A, dtype=float)
    if A.shape != (2, 2):
        raise DimensionError(f"expected a 2x2 matrix, got {A.shape}")
    a, b, c = A[0, 0], A[0, 1], A[1, 1]
    scale = max(1.0, float(np.max(np.abs(A))))
    if abs(A[0, 1] - A[1, 0]) > tol.abs_tol * scale:
        raise ValueError(f"matrix is not symmetric: {A.tolist()}")
    b = 0.5 * (A[0, 1] + A[1, 0])
    mean = 0.5 * (a + c)
    radius = math.hypot(0.5 * (a - c), b)
    # rotation angle that diagonalises A; (cos, sin) spans the larger eigenvalue
    theta = 0.5 * math.atan2(2.0 * b, a - c)
    ct, st = math.cos(theta), math.sin(theta)
    v_max = np.array([ct, st])
    v_min = np.array([-st, ct])
    return mean - radius, mean + radius, v_min, v_max


def _min_singular_2row(J: np.ndarray) -> float:
    # det(J J^T) by Cauchy-Binet: sum of squared 2x2 minors.  This stays
    # accurate for rank-deficient J where tr^2 - 4 det would cancel; the
    # larger eigenvalue comes from the hypot form for the same reason.
    r0, r1 = J[0], J[1]
    minors = np.outer(r0, r1) - np.outer(r1, r0)
    det = 0.5 * float(np.sum(minors * minors))
    a, b, c = float(r0 @ r0), float(r0 @ r1), float(r1 @ r1)
    lam_max = 0.5 * (a + c) + math.hypot(0.5 * (a - c), b)
    if lam_max == 0.0:
        return 0.0
    return math.sqrt(max(det / lam_max, 0.0))


def _one_sided_jacobi(A: np.ndarray, rel_tol: float, max_sweeps: int = 60) -> np.ndarray:
    """Singular values of ``A`` (columns orthogonalised in place).

    Hestenes one-sided Jacobi; accurate for small singular values because it
    never forms ``A^T A``.
    """
    U = A.copy()
    cols = U.shape[1]
    for _ in range(max_sweeps):
        rotated = False
        for p in range(cols - 1):
            for q in range(p + 1, cols):
                alpha = float(U[:, p] @ U[:, p])
                beta = float(U[:, q] @ U[:, q])
                gamma = float(U[:, p] @ U[:, q])
                if gamma == 0.0 or abs(gamma) <= rel_tol * math.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                up = U[:, p].copy()
                U[:, p] = c * up - s * U[:, q]
                U[:, q] = s * up + c * U[:, q]
        if not rotated:
            break
    return np.sqrt(np.sum(U * U, axis=0))


def min_singular_value(J, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Minimum of ``||J^T y||`` over unit covectors ``y``.

    Zero whenever ``J`` has more rows than columns.  Closed form for one or
    two rows; one-sided Jacobi otherwise.
    """
    J = as_jacobian(J)
    m, n = J.shape
    if m > n:
        return 0.0
    if m == 1:
        return norm(J[0])
    if m == 2:
        return _min_singular_2row(J)
    # columns of J^T are the rows of J; m <= n so all m values are genuine
    return float(np.min(_one_sided_jacobi(J.T.copy(), tol.rel_tol)))


def min_singular_values(Js, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """:func:`min_singular_value` over a stack of shape ``(N, m, n)``."""
    Js = np.asarray(Js, dtype=float)
    N, m, n = Js.shape
    if m > n:
        return np.zeros(N)
    if m == 1:
        return np.linalg.norm(Js[:, 0, :], axis=1)
    if m == 2:
        r0, r1 = Js[:, 0, :], Js[:, 1, :]
        minors = r0[:, :, None] * r1[:, None, :] - r1[:, :, None] * r0[:, None, :]
        det = 0.5 * np.sum(minors * minors, axis=(1, 2))
        a, b, c = (np.einsum("ij,ij->i", u, v) for u, v in ((r0, r0), (r0, r1), (r1, r1)))
        lam_max = 0.5 * (a + c) + np.hypot(0.5 * (a - c), b)
        with np.errstate(invalid="ignore", divide="ignore"):
            lam_min = np.where(lam_max > 0.0, det / lam_max, 0.0)
        return np.sqrt(np.maximum(lam_min, 0.0))
    return np.array([min_singular_value(J, tol) for J in Js])
