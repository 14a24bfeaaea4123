import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fractalopt.expr import (
    ArityError, BinOp, Call, EvaluationError, ExprError, ExprSyntaxError, FieldEvaluationError, Neg, Num,
    UnknownIdentifierError, Var, evaluate, evaluate_constant, field_from_expr, parse_expression,
    parse_expression_list, parse_point, to_text, variables,
)


@pytest.mark.parametrize("text, value", [
    ("1 + 2 * 3", 7.0),
    ("(1 + 2) * 3", 9.0),
    ("2 ^ 3 ^ 2", 512.0),
    ("-2 ^ 2", -4.0),
    ("2 ^ -1", 0.5),
    ("8 / 4 / 2", 1.0),
    ("1 - 2 - 3", -4.0),
    ("--3", 3.0),
    ("sqrt(3)/8", math.sqrt(3) / 8),
    ("max(1, 5, 2) - min(4, -1)", 6.0),
    ("abs(-2.5e-1)", 0.25),
    ("exp(0) + cos(0) + sin(0)", 2.0),
    (".5 + 1.", 1.5),
])
def test_constant_values(text, value):
    assert evaluate_constant(text) == value


def test_variables_and_points():
    e = parse_expression("x^2 + y^2 + z")
    assert variables(e) == {"x", "y", "z"}
    assert evaluate(e, [1.0, 2.0, 3.0]) == 8.0
    np.testing.assert_array_equal(parse_point("5/8, sqrt(3)/8"), [5 / 8, math.sqrt(3) / 8])
    assert len(parse_expression_list("1, 2, 3")) == 3


@pytest.mark.parametrize("text, exc, offset", [
    ("1 +", ExprSyntaxError, 3),
    ("(1 + 2", ExprSyntaxError, 6),
    ("1 $ 2", ExprSyntaxError, 2),
    ("2 3", ExprSyntaxError, 2),
    ("foo(1)", UnknownIdentifierError, 0),
    ("1 + w", UnknownIdentifierError, 4),
    ("sqrt(1, 2)", ArityError, 0),
    ("max(1)", ArityError, 0),
    ("sin + 1", ArityError, 0),
    ("   ", ExprSyntaxError, 0),
])
def test_syntax_errors_report_offset(text, exc, offset):
    with pytest.raises(exc) as info:
        parse_expression(text)
    assert info.value.offset == offset


@pytest.mark.parametrize("text", ["1/0", "sqrt(-1)", "(-8)^(1/3)", "0^-1", "exp(1000)", "10^400"])
def test_domain_errors(text):
    with pytest.raises(EvaluationError):
        evaluate_constant(text)


def test_evaluation_error_names_subexpression():
    with pytest.raises(EvaluationError, match=r"in 1 / \(x - 1\)"):
        evaluate(parse_expression("2 + 1/(x - 1)"), [1.0])


def test_constant_required():
    with pytest.raises(ExprError, match="variable"):
        evaluate_constant("x + 1")
    with pytest.raises(ExprError, match="2 coordinates"):
        parse_point("1, 2, 3", 2)


def test_field_errors(graph):
    g = graph("gasket", 1)
    with pytest.raises(ExprError, match="dimension 2"):
        field_from_expr(parse_expression("z"), g)
    with pytest.raises(FieldEvaluationError) as info:
        field_from_expr(parse_expression("1 / x"), g)
    assert g.coords[info.value.vertex][0] == 0.0
    u = field_from_expr(parse_expression("x^2 + y^2"), g)
    np.testing.assert_allclose(u, (g.coords**2).sum(axis=1), rtol=1e-15)


@pytest.mark.parametrize("text, shown", [
    ("(x + y) * z", "(x + y) * z"),
    ("x - (y - z)", "x - (y - z)"),
    ("(x - y) - z", "x - y - z"),
    ("(-x)^2", "(-x)^2"),
    ("-x^2", "-x^2"),
    ("x^(y^z)", "x^y^z"),
    ("(x^y)^z", "(x^y)^z"),
    ("x^-y", "x^-y"),
    ("max(x, (1))", "max(x, 1)"),
])
def test_minimal_parentheses(text, shown):
    assert to_text(parse_expression(text)) == shown


leaves = st.one_of(
    st.sampled_from([Var("x"), Var("y")]),
    st.sampled_from([0.0, 1.0, 2.0, 0.5, 3.25, 10.0]).map(Num),
)


def _trees(children):
    return st.one_of(
        children.map(Neg),
        st.tuples(st.sampled_from("+-*/^"), children, children).map(lambda t: BinOp(*t)),
        st.tuples(st.sampled_from(["abs", "sin", "cos"]), children).map(lambda t: Call(t[0], (t[1],))),
        st.tuples(st.sampled_from(["min", "max"]), children, children).map(lambda t: Call(t[0], t[1:])),
    )


trees = st.recursive(leaves, _trees, max_leaves=12)


@settings(max_examples=300, deadline=None)
@given(trees)
def test_pretty_print_roundtrip(e):
    assert parse_expression(to_text(e)) == e


def _python_value(e, x, y):
    """Independent evaluation through Python's own operators."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return {"x": x, "y": y}[e.name]
    if isinstance(e, Neg):
        return -_python_value(e.operand, x, y)
    if isinstance(e, Call):
        args = [_python_value(a, x, y) for a in e.args]
        return {"abs": abs, "sin": math.sin, "cos": math.cos, "min": min, "max": max}[e.name](*args)
    a, b = _python_value(e.left, x, y), _python_value(e.right, x, y)
    return {"+": a + b, "-": a - b, "*": a * b}.get(e.op) if e.op in "+-*" else (a / b if e.op == "/" else a**b)


@settings(max_examples=300, deadline=None)
@given(trees, st.floats(-3, 3), st.floats(-3, 3))
def test_evaluation_matches_python(e, x, y):
    try:
        got = evaluate(e, [x, y])
    except EvaluationError:
        return
    try:
        want = _python_value(e, x, y)
    except (ZeroDivisionError, OverflowError):
        pytest.fail(f"evaluate succeeded where Python raised: {to_text(e)}")
    assert got == pytest.approx(want, rel=1e-12, abs=1e-300)
