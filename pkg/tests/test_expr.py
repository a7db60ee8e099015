import math

import numpy as np
import pytest

from fisurf import ExprDomainError, ExprSyntaxError, evaluate, field_meta, parse, to_text
from fisurf.expr import BinOp, Call, Neg, Num, Var


def ev(text, x=0.0, y=0.0):
    return evaluate(parse(text), x, y)


# ---------------------------------------------------------------------------
# parsing and evaluation


def test_parse_basic_examples():
    assert ev("0.3+0.4*x*y", 0.5, 0.5) == pytest.approx(0.4)
    assert ev("sin(x)", 0.0, 0.7) == 0.0
    assert ev("x^2+y", 2.0, 1.0) == 5.0
    assert ev("max(x,y)", 0.2, 0.9) == 0.9
    assert ev("min(x,y)", 0.2, 0.9) == 0.2


def test_syntax_error_offsets():
    with pytest.raises(ExprSyntaxError) as err:
        parse("0.3+*y")
    assert err.value.offset == 4
    with pytest.raises(ExprSyntaxError) as err:
        parse("foo(x)")
    assert err.value.offset == 0
    assert "unknown identifier" in str(err.value)
    with pytest.raises(ExprSyntaxError):
        parse("(x+y")
    with pytest.raises(ExprSyntaxError):
        parse("min(x)")
    with pytest.raises(ExprSyntaxError):
        parse("sin(x,y)")
    with pytest.raises(ExprSyntaxError):
        parse("")
    with pytest.raises(ExprSyntaxError):
        parse("   ")
    with pytest.raises(ExprSyntaxError):
        parse("x y")


def test_precedence_and_associativity():
    assert ev("2+3*4") == 14.0
    assert ev("(2+3)*4") == 20.0
    assert ev("2-3-4") == -5.0
    assert ev("12/3/2") == 2.0
    assert ev("2^3^2") == 64.0  # left associative
    assert ev("2^3*2") == 16.0  # power binds tighter than *
    assert ev("-x^2", 2.0) == -4.0  # power binds tighter than unary minus
    assert ev("2*-3") == -6.0
    assert ev("x^-2", 2.0) == 0.25
    assert ev("-(x+y)", 1.0, 2.0) == -3.0


def test_domain_errors():
    with pytest.raises(ExprDomainError) as err:
        ev("1/(x-x)", 0.3, 0.0)
    assert "division by zero" in str(err.value)
    assert err.value.offset == 1
    with pytest.raises(ExprDomainError):
        ev("log(x)", -1.0)
    with pytest.raises(ExprDomainError):
        ev("log(x)", 0.0)
    with pytest.raises(ExprDomainError):
        ev("sqrt(x)", -0.5)
    with pytest.raises(ExprDomainError):
        ev("x^0.5", -2.0)  # negative base, fractional exponent
    with pytest.raises(ExprDomainError):
        ev("x^-1", 0.0)
    with pytest.raises(ExprDomainError):
        ev("exp(x)", 1e4)  # overflow is a domain error, not inf


def test_negative_base_integer_exponent_ok():
    assert ev("x^2", -3.0) == 9.0
    assert ev("x^3", -2.0) == -8.0


def test_parse_eval_determinism():
    a = parse("0.3+0.4*x*y")
    b = parse("0.3+0.4*x*y")
    pts = [(0.1, 0.9), (0.5, 0.5), (0.77, 0.13)]
    assert all(evaluate(a, x, y) == evaluate(b, x, y) for x, y in pts)


def test_array_eval_matches_scalar():
    ast = parse("0.3+0.4*x*y^2-sin(x)/exp(y)")
    xs = np.linspace(0, 1, 7)
    ys = np.linspace(0, 1, 5)
    arr = evaluate(ast, xs[:, None], ys[None, :])
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            assert arr[i, j] == evaluate(ast, float(x), float(y))


def test_scientific_notation_literals():
    assert ev("1e-3") == 1e-3
    assert ev("2.5e2") == 250.0


# ---------------------------------------------------------------------------
# printing


def test_to_text_round_trips_structure():
    cases = ["0.3+0.4*x*y", "2-3-4", "2^3^2", "-x^2", "x^-2", "min(x,max(y,0.5))",
             "-(x+y)*sin(x)", "1/(x+1.5)", "x-(y-1.0)"]
    for text in cases:
        ast = parse(text)
        again = parse(to_text(ast))
        for x, y in [(0.3, 0.8), (0.9, 0.1)]:
            assert evaluate(ast, x, y) == evaluate(again, x, y)


def test_to_text_preserves_subtraction_grouping():
    ast = BinOp("-", Num(1.0), BinOp("-", Num(2.0), Num(3.0)))
    text = to_text(ast)
    assert evaluate(parse(text), 0, 0) == 2.0  # 1-(2-3)


# ---------------------------------------------------------------------------
# field metadata


def test_field_meta_constant():
    meta = field_meta(parse("0.5"), (0, 1, 0, 1), 8)
    assert meta.min_abs == meta.max_abs == 0.5
    assert meta.lipschitz_estimate == 0.0
    assert meta.sample_resolution == 8


def test_field_meta_unit_slope():
    meta = field_meta(parse("x"), (0, 1, 0, 1), 8)
    assert meta.min_abs == 0.0
    assert meta.max_abs == 1.0
    assert meta.lipschitz_estimate == pytest.approx(1.0)


def test_field_meta_vs_dense_oracle():
    # monotone in each variable, so the dense oracle's extrema sit at corners
    ast = parse("0.3+0.4*x*y")
    rect = (0.5, 1.0, 0.5, 1.0)
    meta = field_meta(ast, rect, 64)

    xs = np.linspace(rect[0], rect[1], 1025)
    ys = np.linspace(rect[2], rect[3], 1025)
    dense = np.abs(evaluate(ast, xs[:, None], ys[None, :]))
    assert meta.min_abs == pytest.approx(dense.min(), abs=1e-12)
    assert meta.max_abs == pytest.approx(dense.max(), abs=1e-12)
    assert meta.min_abs == pytest.approx(0.4, abs=1e-12)
    assert meta.max_abs == pytest.approx(0.7, abs=1e-12)


def test_field_meta_corners_exact_for_monotone():
    ast = parse("0.2+0.3*x+0.25*y")
    rect = (0.25, 0.75, 0.0, 0.5)
    meta = field_meta(ast, rect, 16)
    corners = [evaluate(ast, x, y) for x in rect[:2] for y in rect[2:]]
    assert meta.min_abs == min(corners)
    assert meta.max_abs == max(corners)


def test_field_meta_monotone_under_nested_resolutions():
    ast = parse("0.5+0.3*sin(6.0*x)*cos(5.0*y)")
    rect = (0.0, 1.0, 0.0, 1.0)
    metas = [field_meta(ast, rect, res) for res in (8, 16, 32, 64)]
    for a, b in zip(metas, metas[1:]):
        assert b.min_abs <= a.min_abs
        assert b.max_abs >= a.max_abs


def test_field_meta_propagates_domain_errors():
    with pytest.raises(ExprDomainError):
        field_meta(parse("log(x-0.5)"), (0, 1, 0, 1), 8)


def test_ast_nodes_are_frozen():
    ast = parse("x+y")
    with pytest.raises(AttributeError):
        ast.op = "-"
    assert isinstance(ast, BinOp)
    assert isinstance(ast.left, Var) and isinstance(ast.right, Var)
    assert isinstance(parse("-x"), Neg)
    assert isinstance(parse("min(x,y)"), Call)
