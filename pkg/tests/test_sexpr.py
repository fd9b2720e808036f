import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fractalc.sexpr import SexprError, compile_expr, diff, free_symbols, parse, to_string


def test_parse_nested():
    assert parse("(- s (/ 1 (+ s c)))") == ("-", "s", ("/", 1.0, ("+", "s", "c")))


@pytest.mark.parametrize("text", ["", "(", "(foo s)", "(sin s s)", "(/ 1)", ")", "(+ s) x"])
def test_parse_rejects(text):
    with pytest.raises(SexprError):
        parse(text)


def test_round_trip_text():
    text = "(* s (ln (* cprime s)))"
    assert to_string(parse(text)) == text


def test_free_symbols_and_binding():
    e = parse("(+ (* C s) c)")
    assert free_symbols(e) == {"C", "s", "c"}
    with pytest.raises(SexprError):
        compile_expr(e)
    f = compile_expr(e, env={"C": 2.0, "c": 1.0})
    assert f(3.0) == 7.0
    assert isinstance(f(3.0), float)
    np.testing.assert_array_equal(f(np.array([0.0, 1.0])), [1.0, 3.0])


@pytest.mark.parametrize(
    "text, fn, dfn",
    [
        ("(* s (ln s))", lambda s: s * math.log(s), lambda s: math.log(s) + 1),
        ("(tan s)", math.tan, lambda s: 1 / math.cos(s) ** 2),
        ("(pow s 3)", lambda s: s**3, lambda s: 3 * s**2),
        ("(/ (sin s) (+ 2 (cos s)))", lambda s: math.sin(s) / (2 + math.cos(s)),
         lambda s: (math.cos(s) * (2 + math.cos(s)) + math.sin(s) ** 2) / (2 + math.cos(s)) ** 2),
        ("(exp (* -2 s s))", lambda s: math.exp(-2 * s * s), lambda s: -4 * s * math.exp(-2 * s * s)),
        ("(abs (- s 1))", lambda s: abs(s - 1), lambda s: math.copysign(1.0, s - 1)),
    ],
)
def test_diff_matches_hand_derivative(text, fn, dfn):
    e = parse(text)
    f, df = compile_expr(e), compile_expr(diff(e))
    for s in (0.3, 0.7, 1.3):
        assert f(s) == pytest.approx(fn(s), rel=1e-14)
        assert df(s) == pytest.approx(dfn(s), rel=1e-12)


@given(st.floats(0.1, 3.0), st.floats(-2.0, 2.0))
def test_diff_against_central_difference(s, k):
    e = parse(f"(* (sin (* {k!r} s)) (exp s))")
    f, df = compile_expr(e), compile_expr(diff(e))
    h = 1e-6
    assert df(s) == pytest.approx((f(s + h) - f(s - h)) / (2 * h), abs=1e-6)
