import math

import numpy as np
import pytest

from coderiv import catalog
from coderiv.frechet import fd_jacobian
from coderiv.linalg import min_singular_value
from coderiv.mapping import ExcludedPointError


def rand_points(seed, count, low=-2.0, high=2.0, min_norm=1e-3):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(low, high, size=(2 * count, 2))
    return pts[np.linalg.norm(pts, axis=1) > min_norm][:count]


def test_get_examples():
    np.testing.assert_array_equal(catalog.get("poly_4_3").handle([1, 2]), [-3, 4])
    np.testing.assert_array_equal(catalog.get("rational_4_1").handle([1, 0]), [1, 0])
    np.testing.assert_allclose(catalog.get("log_4_5").handle([1, 1]), [math.log(3), 1 / 3])
    with pytest.raises(KeyError, match="unknown catalog id"):
        catalog.get("nope")


def test_origin_values():
    for id in ("rational_4_1", "radical_4_6"):
        h = catalog.get(id).handle
        assert h.is_excluded([0, 0])
        np.testing.assert_array_equal(h([0, 0]), [0, 0])


def test_closed_form_examples():
    assert catalog.closed_form_action_norm("rational_4_1", [1, 0], [0, 1]) == pytest.approx(2.0)
    assert catalog.closed_form_action_norm("poly_4_3", [3, 4], [0.6, 0.8]) == pytest.approx(10.0)
    assert catalog.closed_form_action_norm("exp_4_4", [0, 0], np.array([1, 1]) / math.sqrt(2)) == pytest.approx(0, abs=1e-16)
    with pytest.raises(ExcludedPointError):
        catalog.closed_form_action_norm("radical_4_6", [0, 0], [1, 0])


@pytest.mark.parametrize("id", ["rational_4_1", "trig_4_2", "poly_4_3"])
def test_norm_identities(id):
    entry = catalog.get(id)
    for x in rand_points(51, 1000):
        assert abs(np.linalg.norm(entry.handle(x)) - entry.norm_identity(x)) <= 1e-12


@pytest.mark.parametrize("id", catalog.CATALOG_IDS)
def test_analytic_ad_fd_agree(id):
    entry = catalog.get(id)
    ad = entry.expr_mapping()
    for z in rand_points(53, 100, min_norm=0.05):
        A = entry.handle.analytic_jacobian(z)
        B = ad.ad_jacobian(z)
        C = fd_jacobian(entry.handle, z)
        scale = np.maximum(1.0, np.abs(A))
        for P, Q in ((A, B), (A, C), (B, C)):
            assert np.all(np.abs(P - Q) <= 1e-6 * scale)


@pytest.mark.parametrize("id", catalog.CATALOG_IDS)
def test_closed_form_equals_adjoint_norm(id):
    entry = catalog.get(id)
    rng = np.random.default_rng(59)
    for z in rand_points(61, 1000, min_norm=0.05):
        y = rng.normal(size=2)
        J = entry.handle.analytic_jacobian(z)
        closed = entry.closed_form_action_norm(z, y)
        assert abs(closed - np.linalg.norm(J.T @ y)) <= 1e-10 * (1 + closed)


def test_rational_jacobian_is_rank_one():
    for z in rand_points(67, 500):
        assert min_singular_value(catalog.get("rational_4_1").handle.analytic_jacobian(z)) <= 1e-12


def test_vectorized_evaluation_matches_pointwise():
    pts = rand_points(71, 50)
    for id in catalog.CATALOG_IDS:
        h = catalog.get(id).handle
        np.testing.assert_allclose(h.evaluate_many(pts), [h(x) for x in pts], rtol=1e-15)
        np.testing.assert_allclose(h.jacobian_many(pts), [h.analytic_jacobian(x) for x in pts], rtol=1e-15)


def test_reference_coverings():
    assert catalog.get("poly_4_3").reference_covering(np.array([3.0, 4.0])).value == 10.0
    assert catalog.get("radical_4_6").reference_covering(np.array([1.0, 0.0])).kind == "zero"
    ref = catalog.get("radical_4_6").reference_covering(np.array([1.0, 1.0]))
    assert ref.kind == "upper_bounds" and ref.bounds[0] == pytest.approx(1 / math.sqrt(2))
    with pytest.raises(ExcludedPointError):
        catalog.get("rational_4_1").reference_covering(np.zeros(2))
