import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coderiv import catalog
from coderiv.expr import DomainError, ExprSyntaxError, load_mapping, mapping_from_json, parse_expression, parse_mapping
from coderiv.expr.nodes import BinOp, Call, Const, FUNCTIONS, Neg, Param, Var, to_source, uses_variables
from coderiv.frechet import fd_jacobian

POLY = "x1^2 - x2^2; 2*x1*x2"
TRIG = "sin(x1+x2); cos(x1+x2)"


# -- parsing ------------------------------------------------------------------

def test_polynomial_expression_matches_catalog():
    e = parse_mapping(POLY, 2, 2, 0)
    ref = catalog.get("poly_4_3").handle
    rng = np.random.default_rng(0)
    for x in rng.uniform(-3, 3, size=(50, 2)):
        np.testing.assert_allclose(e.eval(x), ref(x), rtol=1e-14, atol=1e-14)


def test_identity_expression():
    e = parse_mapping("x1", 1, 1, 0)
    assert e.eval([2.5]).tolist() == [2.5]
    assert e.ad_jacobian([-7.0]).tolist() == [[1.0]]


def test_trig_expression_matches_catalog():
    e = parse_mapping(TRIG, 2, 2, 0)
    ref = catalog.get("trig_4_2").handle
    for x in np.random.default_rng(1).uniform(-3, 3, size=(50, 2)):
        np.testing.assert_allclose(e.eval(x), ref(x), atol=1e-15)


@pytest.mark.parametrize(
    "source, x, expected",
    [
        ("2^3^2", [0.0], 64.0),  # left-associative
        ("-x1^2", [3.0], -9.0),  # power binds tighter than unary minus
        ("-2*3 + 4/2", [0.0], -4.0),
        ("x1^-2", [2.0], 0.25),
        ("8 - 3 - 2", [0.0], 3.0),
        ("2e-1 + .5 + 1.", [0.0], 1.7),
        ("abs(-x1) + sqrt(4)", [3.0], 5.0),
    ],
)
def test_precedence_and_literals(source, x, expected):
    assert parse_mapping(source, 1).eval(x)[0] == pytest.approx(expected, abs=1e-15)


def test_parameters():
    e = parse_mapping("p1*x1 + p2", 1, 1, k=2)
    assert e.eval([3.0], [2.0, 1.0]).tolist() == [7.0]
    assert e.ad_jacobian([3.0], [2.0, 1.0]).tolist() == [[2.0]]
    assert parse_mapping("x1^p1", 1, 1, k=1).eval([3.0], [2.0]).tolist() == [9.0]


def test_trailing_semicolon_and_newlines():
    e = parse_mapping("x1;\nx2;\n", 2)
    assert e.m == 2


@pytest.mark.parametrize(
    "source, n, k, fragment, line, column",
    [
        ("x1 +", 1, 0, "end of input", 1, 5),
        ("x1 * y", 1, 0, "unknown identifier 'y'", 1, 6),
        ("x3", 2, 0, "exceeds input dimension", 1, 1),
        ("p1", 1, 0, "exceeds parameter count", 1, 1),
        ("x1 +\n  sin x1", 1, 0, "must be called", 2, 3),
        ("ln(x1, x1)", 1, 0, "exactly one argument", 1, 6),
        ("2^x1", 1, 0, "must not depend", 1, 2),
        ("x1 # 2", 1, 0, "unexpected character", 1, 4),
        ("(x1", 1, 0, "expected ')'", 1, 4),
    ],
)
def test_syntax_errors_carry_position(source, n, k, fragment, line, column):
    with pytest.raises(ExprSyntaxError) as info:
        parse_mapping(source, n, k=k)
    assert fragment in str(info.value)
    assert (info.value.line, info.value.column) == (line, column)


def test_component_count_mismatch():
    with pytest.raises(ExprSyntaxError, match="expected 3 component"):
        parse_mapping(POLY, 2, 3)


# -- evaluation ---------------------------------------------------------------

def test_eval_examples():
    assert parse_mapping(POLY, 2).eval([3, 4]).tolist() == [-7.0, 24.0]
    assert parse_mapping(TRIG, 2).eval([0, 0]).tolist() == [0.0, 1.0]
    assert parse_mapping("ln(1+x1^2+x2^2); 1/(1+x1^2+x2^2)", 2).eval([0, 0]).tolist() == [0.0, 1.0]


@pytest.mark.parametrize(
    "source, x, component, sub",
    [
        ("x1; ln(x1 - 1)", [1.0], 1, "ln((x1-1.0))"),
        ("1/x1", [0.0], 0, "(1.0/x1)"),
        ("x1 + sqrt(x1)", [-1.0], 0, "sqrt(x1)"),
        ("exp(x1)", [1000.0], 0, "exp(x1)"),
    ],
)
def test_domain_errors_name_component_and_subexpression(source, x, component, sub):
    e = parse_mapping(source, 1)
    with pytest.raises(DomainError) as info:
        e.eval(x)
    assert info.value.component == component
    assert info.value.subexpression == sub


@pytest.mark.parametrize("source", ["abs(x1)", "sqrt(x1)", "x1^0.5"])
def test_no_derivative_at_kinks(source):
    e = parse_mapping(source, 1)
    assert e.eval([0.0])[0] == 0.0  # value is fine
    with pytest.raises(DomainError):
        e.ad_jacobian([0.0])


# -- differentiation ----------------------------------------------------------

def test_ad_examples():
    e = parse_mapping(POLY, 2)
    for z1, z2 in [(1.0, 2.0), (-0.5, 3.0)]:
        np.testing.assert_allclose(e.ad_jacobian([z1, z2]), [[2 * z1, -2 * z2], [2 * z2, 2 * z1]], atol=1e-15)
    np.testing.assert_array_equal(parse_mapping("x1;x2;x3", 3).ad_jacobian([1, 2, 3]), np.eye(3))
    np.testing.assert_allclose(parse_mapping("exp(x1+x2); exp(-x1-x2)", 2).ad_jacobian([0, 0]), [[1, 1], [-1, -1]])


@pytest.mark.parametrize("id", catalog.CATALOG_IDS)
def test_ad_matches_central_differences(id):
    entry = catalog.get(id)
    e = entry.expr_mapping()
    h = e.to_handle()
    rng = np.random.default_rng(2)
    pts = rng.uniform(-2, 2, size=(400, 2))
    pts = pts[np.linalg.norm(pts, axis=1) > 0.1][:100]  # away from the singular origin
    assert len(pts) == 100
    for x in pts:
        A = e.ad_jacobian(x)
        F = fd_jacobian(h, x, 1e-6)
        np.testing.assert_array_less(np.abs(A - F), 1e-6 * np.maximum(np.abs(A), 1.0))


@settings(max_examples=100, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-2, 2), st.floats(-2, 2))
def test_ad_is_linear(a, b, x1, x2):
    f, g = "x1^2 - x2^2", "sin(x1 + x2)*exp(x2)"
    Jf = parse_mapping(f, 2).ad_jacobian([x1, x2])
    Jg = parse_mapping(g, 2).ad_jacobian([x1, x2])
    Jc = parse_mapping(f"{a!r}*({f}) + {b!r}*({g})", 2).ad_jacobian([x1, x2])
    np.testing.assert_allclose(Jc, a * Jf + b * Jg, rtol=0, atol=1e-12 * (1 + np.abs(Jf).max() + np.abs(Jg).max()) * 10)


# -- printing -----------------------------------------------------------------

def _trees(n=2, k=1):
    leaves = st.one_of(
        st.builds(Const, st.floats(0, 1e6, allow_nan=False, allow_infinity=False)),
        st.builds(Var, st.integers(0, n - 1)),
        st.builds(Param, st.integers(0, k - 1)),
    )
    no_vars = st.one_of(st.builds(Const, st.floats(0, 10)), st.builds(Param, st.integers(0, k - 1)))

    def extend(children):
        return st.one_of(
            st.builds(Neg, children),
            st.builds(BinOp, st.sampled_from("+-*/"), children, children),
            st.builds(BinOp, st.just("^"), children, st.one_of(no_vars, st.builds(Neg, no_vars))),
            st.builds(Call, st.sampled_from(FUNCTIONS), children),
        )

    return st.recursive(leaves, extend, max_leaves=12)


@settings(max_examples=300, deadline=None)
@given(_trees())
def test_printer_round_trip(tree):
    assert parse_expression(to_source(tree), 2, 1) == tree


def test_round_trip_of_parsed_source():
    e = parse_mapping("-x1^2*3 - (x2 - 1)/2; ln(abs(x1) + 1)^-1.5", 2)
    assert parse_mapping(e.to_source(), 2).components == e.components


# -- JSON ---------------------------------------------------------------------

def test_mapping_from_json(tmp_path):
    doc = {"n": 2, "m": 2, "k": 0, "components": ["x1^2 - x2^2", "2*x1*x2"]}
    path = tmp_path / "poly.json"
    path.write_text(json.dumps(doc))
    e = load_mapping(path)
    assert e.eval([3, 4]).tolist() == [-7.0, 24.0]
    with pytest.raises(ValueError, match="m=3"):
        mapping_from_json({**doc, "m": 3})
    with pytest.raises(ValueError, match="missing"):
        mapping_from_json({"n": 2})


def test_handle_uses_ad_jacobian():
    h = parse_mapping(POLY, 2).to_handle()
    np.testing.assert_allclose(h.analytic_jacobian([1.0, 2.0]), [[2, -4], [4, 2]])
    assert not uses_variables(Const(1.0))
