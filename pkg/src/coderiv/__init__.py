"""Fréchet derivatives, coderivatives and covering constants of smooth maps R^n -> R^m."""

from .catalog import CATALOG_IDS, get as catalog_entry
from .coderivative import coderivative, coderivative_action_norm, coderivative_matrix, limsup_probe
from .coincidence import ParameterizedMapping, estimate_lipschitz, solve_coincidence, theorem_5_1_check
from .covering import EtaSchedule, covering_constant, sphere_min_oracle
from .expr import parse_mapping
from .frechet import check_frechet, fd_jacobian
from .linalg import Tolerances, adjoint_apply, inner, min_singular_value, norm, sym_eig_2x2
from .mapping import EvaluationError, ExcludedPointError, MappingHandle

__version__ = "0.1.0"

__all__ = [
    "CATALOG_IDS",
    "EtaSchedule",
    "EvaluationError",
    "ExcludedPointError",
    "MappingHandle",
    "ParameterizedMapping",
    "Tolerances",
    "adjoint_apply",
    "catalog_entry",
    "check_frechet",
    "coderivative",
    "coderivative_action_norm",
    "coderivative_matrix",
    "covering_constant",
    "estimate_lipschitz",
    "fd_jacobian",
    "inner",
    "limsup_probe",
    "min_singular_value",
    "norm",
    "parse_mapping",
    "solve_coincidence",
    "sphere_min_oracle",
    "sym_eig_2x2",
    "theorem_5_1_check",
]
