import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cartan_ode.errors import DimensionTooSmall, DslSyntaxError, IndexOutOfRange, UnknownFunction
from cartan_ode.expr import Const, P, Q, X, Y, render, var
from cartan_ode.jet import OdeSystem, circles_system, trivial_system
from cartan_ode.parser import parse_expr, parse_system, render_system
from cartan_ode.rational import is_zero

from helpers import corpus, random_expr


def test_parse_small_system():
    sys = parse_system("m=2\nf1 = q2^2\nf2 = 0")
    assert sys == OdeSystem(2, (var(Q(2)) ** 2, Const(0)))


def test_index_out_of_range():
    with pytest.raises(IndexOutOfRange) as err:
        parse_system("m=2\nf1 = q3\nf2 = 0")
    assert "line 2" in str(err.value)


def test_f_index_out_of_range():
    with pytest.raises(IndexOutOfRange):
        parse_system("m=2\nf1 = 0\nf2 = 0\nf3 = 0")


def test_dimension_too_small():
    with pytest.raises(DimensionTooSmall):
        parse_system("m = 1\nf1 = 0")


def test_unknown_function():
    with pytest.raises(UnknownFunction) as err:
        parse_system("m=2\nf1 = tan(x)\nf2 = 0")
    assert (err.value.lineno, err.value.offset) == (2, 6)


@pytest.mark.parametrize(
    "text, line, col",
    [
        ("m=2\nf1 = (x + 1\nf2 = 0", 2, 12),
        ("m=2\nf1 = x $ 1\nf2 = 0", 2, 8),
        ("m=2\nf1 = x^(1/2)\nf2 = 0", 2, 8),
        ("m=2\nf1 = x^y1\nf2 = 0", 2, 8),
        ("m=2\nf1 = 0\nf1 = 1\nf2 = 0", 3, 1),
        ("m=2\ng = 0\nf1 = 0\nf2 = 0", 2, 1),
        ("m=2\nf1 = * x\nf2 = 0", 2, 6),
        ("m=2\nf1 = z\nf2 = 0", 2, 6),
    ],
)
def test_syntax_errors_carry_position(text, line, col):
    with pytest.raises(DslSyntaxError) as err:
        parse_system(text)
    assert (err.value.lineno, err.value.offset) == (line, col)
    assert f"line {line}, column {col}" in str(err.value)


def test_missing_definitions_and_declaration():
    with pytest.raises(DslSyntaxError, match="f2"):
        parse_system("m=2\nf1 = 0")
    with pytest.raises(DslSyntaxError, match="m ="):
        parse_system("f1 = 0\nf2 = 0")


def test_comments_semicolons_and_aliases():
    sys = parse_system("# header\nm = 2  # dimension\nf1 = y1'' * y2' ; f2 = y1  # tail")
    assert sys.f[0] == var(Q(1)) * var(P(2))
    assert sys.f[1] == var(Y(1))


def test_operator_precedence():
    assert parse_expr("2^3^2") == Const(512)
    assert parse_expr("-x^2") == -(var(X()) ** 2)
    assert is_zero(parse_expr("1 - 2 - 3") + 4)
    assert is_zero(parse_expr("8/2/2") - 2)
    assert is_zero(parse_expr("x*(y1 + 1)^2") - var(X()) * (var(Y(1)) + 1) ** 2)
    assert parse_expr("0.25") == Const(1) / 4
    assert parse_expr("1e-2") == Const(1) / 100


def test_negative_integer_exponent():
    assert parse_expr("p1^-2") == var(P(1)) ** -2
    assert parse_expr("p1^(-2)") == var(P(1)) ** -2


def test_circles_round_trip():
    for m in (2, 3):
        sys = circles_system(m)
        assert parse_system(render_system(sys)) == sys


@pytest.mark.parametrize("name, sys", list(corpus().items()))
def test_corpus_round_trip(name, sys):
    assert parse_system(render_system(sys)) == sys


@settings(max_examples=200)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_parse_render_fixed_point(seed):
    e = random_expr(random.Random(seed), leaves=7)
    assert parse_expr(render(e)) == e


def test_trivial_render():
    assert render_system(trivial_system(2)) == "m = 2\nf1 = 0\nf2 = 0\n"
