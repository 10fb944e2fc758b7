import math

import pytest

from blowup.expressions import ExpressionError, compile_expression


def test_arithmetic_and_precedence():
    f = compile_expression("1 + 2*t - t/2")
    assert abs(f(4.0) - (1 + 8 - 2)) < 1e-15
    g = compile_expression("2^t^2")  # right associative: 2^(t^2)
    assert abs(g(2.0) - 16.0) < 1e-12


def test_unary_minus_and_parens():
    f = compile_expression("-(t - 3)^2")
    assert abs(f(1.0) + 4.0) < 1e-15


def test_functions():
    f = compile_expression("exp(-1/t) * ln(t)")
    t = 0.3
    assert abs(f(t) - math.exp(-1 / t) * math.log(t)) < 1e-15


def test_scientific_literals():
    f = compile_expression("1.5e-3 + t")
    assert abs(f(0.0) - 1.5e-3) < 1e-18


def test_parse_errors_carry_position():
    with pytest.raises(ExpressionError) as exc:
        compile_expression("t^")
    assert exc.value.pos == 2
    with pytest.raises(ExpressionError):
        compile_expression("sin(t)")
    with pytest.raises(ExpressionError):
        compile_expression("t @ 2")
    with pytest.raises(ExpressionError):
        compile_expression("(t + 1")
    with pytest.raises(ExpressionError):
        compile_expression("t 2")
