import math

import numpy as np
import pytest

from coderiv import catalog
from coderiv.coincidence import (
    ParameterizedMapping,
    SingularJacobianError,
    estimate_lipschitz,
    solve_coincidence,
    solve_grid,
    theorem_5_1_check,
)
from coderiv.expr import parse_mapping
from coderiv.linalg import Ball

F = catalog.get("poly_4_3").handle
XBAR = np.array([1.0, 0.0])


def shift(s_fn):
    """G(x, s) independent of x."""
    return ParameterizedMapping(2, 2, 1, lambda x, p: np.asarray(s_fn(p), dtype=float))


def wobble(x, s):
    return 0.05 * s[0] * np.array([math.sin(x[0]), math.cos(x[1])])


H = ParameterizedMapping(2, 2, 1, wobble, name="h")


def power_iteration_norm(A, iters=200):
    v = np.ones(A.shape[1])
    for _ in range(iters):
        v = A.T @ (A @ v)
        v /= np.linalg.norm(v)
    return float(np.linalg.norm(A @ v))


# -- Lipschitz estimate -------------------------------------------------------

def test_lipschitz_of_constant_is_zero():
    G = shift(lambda p: [p[0], 1.0])
    assert estimate_lipschitz(G, Ball([0, 0], 1.0), [0.3]) == 0.0


def test_lipschitz_of_small_trig_map():
    G = ParameterizedMapping(2, 2, 0, lambda x, p: 0.1 * np.array([math.sin(x[0]), math.cos(x[1])]))
    beta = estimate_lipschitz(G, Ball([0, 0], 1.0), [])
    assert 0.0 < beta <= 0.1 + 1e-9


def test_lipschitz_of_linear_map_approaches_operator_norm():
    A = np.array([[2.0, 1.0], [0.5, -1.0]])
    G = ParameterizedMapping(2, 2, 0, lambda x, p: A @ x)
    norm = power_iteration_norm(A)
    small = estimate_lipschitz(G, Ball([0, 0], 1.0), [], pairs=50, seed=1)
    large = estimate_lipschitz(G, Ball([0, 0], 1.0), [], pairs=5000, seed=1)
    assert small <= large <= norm + 1e-12
    assert large >= 0.999 * norm


# -- solver -------------------------------------------------------------------

def test_already_coincident():
    cert = solve_coincidence(F, shift(lambda p: F(XBAR)), XBAR, [0.7], alpha=1.5)
    assert cert.iterations == 0 and cert.residual == 0.0
    np.testing.assert_array_equal(cert.solution, XBAR)


def test_shifted_target():
    cert = solve_coincidence(F, shift(lambda p: [1 + p[0], 0.0]), XBAR, [0.1], alpha=1.5, beta=0.0)
    assert cert.converged
    np.testing.assert_allclose(cert.solution, [math.sqrt(1.1), 0.0], atol=1e-10)
    assert cert.distance == pytest.approx(math.sqrt(1.1) - 1, abs=1e-10)
    assert cert.bound_rhs == pytest.approx(0.1 / 1.5)
    assert cert.bound_holds


def test_theorem_instance_as_stated():
    cert = theorem_5_1_check(H, lambda s: [s[0], 0.0], XBAR, [0.1], alpha=0.5, beta=0.005)
    assert cert.converged
    assert cert.identity_residual <= 1e-8
    assert cert.bound_holds


def test_theorem_instance_near_base_point():
    fx = F(XBAR)
    for s in (0.02, -0.05, 0.1):
        cert = theorem_5_1_check(H, lambda q: fx + [q[0], 0.0], XBAR, [s], alpha=0.5, beta=0.005)
        assert cert.converged and cert.bound_holds
        assert cert.identity_residual <= 1e-8


def test_theorem_unperturbed_and_plain_shift():
    fx = F(XBAR)
    zero = ParameterizedMapping(2, 2, 1, lambda x, p: np.zeros(2))
    cert = theorem_5_1_check(zero, lambda s: fx, XBAR, [0.3], alpha=0.9)
    np.testing.assert_array_equal(cert.solution, XBAR)
    for s in (0.05, -0.08):
        cert = theorem_5_1_check(zero, lambda q: fx + [q[0], 0.0], XBAR, [s], alpha=0.9)
        assert cert.distance <= abs(s) / 0.9


def test_theorem_preconditions():
    with pytest.raises(ValueError, match="alpha"):
        theorem_5_1_check(H, lambda s: [s[0], 0.0], XBAR, [0.1], alpha=1.0)
    with pytest.raises(ValueError):
        solve_coincidence(F, H, XBAR, [0.1], alpha=0.5, beta=0.5)


def test_singular_jacobian_reported():
    with pytest.raises(SingularJacobianError, match="covering constant"):
        solve_coincidence(F, shift(lambda p: [p[0], 0.0]), [0.0, 0.0], [0.1], alpha=1.5)


def test_non_convergence_is_flagged_not_hidden():
    cert = solve_coincidence(F, shift(lambda p: [1 + p[0], 0.0]), XBAR, [3.0], alpha=1.5, max_iter=1)
    assert not cert.converged and cert.residual > cert.tol


@pytest.mark.parametrize("s", [0.1, -0.1, 0.05, 0.3])
def test_step_budget_and_monotone_residual(s):
    G = ParameterizedMapping(2, 2, 1, lambda x, p: np.array([1 + p[0], 0.0]) + wobble(x, p))
    cert = solve_coincidence(F, G, XBAR, [s], alpha=1.5, beta=0.05)
    assert cert.converged
    for step in cert.steps:
        assert step.step_norm <= step.residual_before / 1.5 * 1.01
        assert step.residual_after <= step.residual_before


def test_fast_local_convergence():
    target = np.array([math.sqrt(1.1), 0.0])
    G = shift(lambda p: [1 + p[0], 0.0])
    rng = np.random.default_rng(73)
    for _ in range(50):
        d = rng.normal(size=2)
        x0 = target + 0.1 * rng.uniform() * d / np.linalg.norm(d)
        cert = solve_coincidence(F, G, XBAR, [0.1], alpha=1.5, tol=1e-12, x0=x0)
        assert cert.converged and cert.iterations <= 8


def test_certificate_soundness():
    G = ParameterizedMapping(2, 2, 1, lambda x, p: np.array([1 + p[0], p[0]]) + wobble(x, p))
    for cert in solve_grid(F, G, XBAR, [[s] for s in np.linspace(-0.2, 0.2, 9)], alpha=1.5, beta=0.05):
        lhs = np.linalg.norm(cert.solution - XBAR)
        rhs = np.linalg.norm(G(XBAR, cert.parameter) - F(XBAR)) / (1.5 - 0.05)
        assert cert.bound_holds == (lhs <= rhs + cert.tol)
        assert cert.residual == pytest.approx(np.linalg.norm(F(cert.solution) - G(cert.solution, cert.parameter)), abs=1e-15)
        assert cert.bound_holds


def test_from_expression():
    G = ParameterizedMapping.from_expr(parse_mapping("1 + p1; 0", 2, 2, k=1))
    cert = solve_coincidence(F, G, XBAR, [0.1], alpha=1.5)
    np.testing.assert_allclose(cert.solution, [math.sqrt(1.1), 0.0], atol=1e-10)
    d = cert.to_dict()
    assert d["converged"] and "identity_residual" not in d
