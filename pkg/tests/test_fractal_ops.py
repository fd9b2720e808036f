import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fractalc.errors import AllPointsExcludedError, NonIntegrableError, SingularityError
from fractalc.fractal_ops import (
    FnOfS,
    check_algebra_rules,
    fractal_derivative,
    fractal_derivative2,
    fractal_derivative2_numeric,
    fractal_derivative_numeric,
    fractal_integral,
    fractal_primitive,
    indicator,
    primitive_constant_spread,
    residual_check,
)
from fractalc.fractal_set import endpoint, make_set, sample_fractal_points
from fractalc.staircase import make_staircase, staircase_eval

from .conftest import GAMMA_CANTOR


def test_indicator(cantor):
    assert indicator(cantor, 0.5, 10) == 0.0
    assert indicator(cantor, Fraction(2, 3), 10) == 1.0
    assert indicator(make_set(0.5), 0.5, 10) == 1.0


def test_numeric_derivative_of_staircase_is_one(cantor, cantor_st):
    S = lambda y: staircase_eval(cantor_st, y)  # noqa: E731
    for p in sample_fractal_points(cantor, 16, 200):
        assert fractal_derivative_numeric(cantor, S, p.exact, 16, cantor_st) == 1.0
    assert fractal_derivative_numeric(cantor, S, 0.5, 16, cantor_st) == 0.0


def test_numeric_derivative_of_square(cantor, cantor_st):
    f = lambda y: staircase_eval(cantor_st, y) ** 2  # noqa: E731
    got = fractal_derivative_numeric(cantor, f, Fraction(1, 3), 20, cantor_st)
    assert got == pytest.approx(GAMMA_CANTOR, abs=4 * 2.0**-20)


def test_numeric_second_derivative_of_staircase(cantor, cantor_st):
    S = lambda y: staircase_eval(cantor_st, y)  # noqa: E731
    assert fractal_derivative2_numeric(cantor, S, Fraction(2, 9), 14, cantor_st) == 0.0


def test_analytic_derivatives(cantor_st):
    S = FnOfS.identity(cantor_st)
    assert fractal_derivative(S, Fraction(2, 9)) == 1.0
    assert fractal_derivative(S, 0.5) == 0.0
    assert fractal_derivative2(S, Fraction(2, 9)) == 0.0
    ln = FnOfS.from_sexpr("(ln s)", cantor_st, singular_points=(0.0,))
    assert fractal_derivative(ln, Fraction(1, 3)) == pytest.approx(2 / GAMMA_CANTOR, rel=1e-14)
    cos = FnOfS.from_sexpr("(cos s)", cantor_st)
    assert fractal_derivative2(cos, 0) == -1.0
    with pytest.raises(SingularityError):
        fractal_derivative(ln, 0)


def test_value_is_constant_on_gaps(cantor_st):
    f = FnOfS.from_sexpr("(sin (* 3 s))", cantor_st)
    assert f(0.4) == f(0.5) == f(Fraction(1, 3)) == f(Fraction(2, 3))


smooth = st.tuples(st.floats(-2, 2), st.floats(0.2, 3), st.floats(-1, 1))


@given(smooth)
def test_gradient_check(params):
    a, k, c = params
    f = FnOfS.from_sexpr(f"(+ (* {a!r} (sin (* {k!r} s))) (* {c!r} (* s s)))")
    h = 1e-6
    for s in np.linspace(0.05, 1.2, 100):
        fd = (f.profile(s + h) - f.profile(s - h)) / (2 * h)
        assert f.d1(s) == pytest.approx(fd, rel=1e-5, abs=1e-7)


@pytest.mark.parametrize("seed", range(50))
def test_conjugacy_matches_limit_quotient(seed, cantor, cantor_st):
    rng = np.random.default_rng(seed)
    a, k, c = rng.uniform(-2, 2), rng.uniform(0.2, 3), rng.uniform(-1, 1)
    f = FnOfS.from_sexpr(f"(+ (* {a!r} (sin (* {k!r} s))) (* {c!r} (* s s)))", cantor_st)
    g = lambda y: f(y)  # noqa: E731
    points = sample_fractal_points(cantor, 12, 20, rng)
    errs = {n: 0.0 for n in (12, 16, 20, 24)}
    for p in points:
        exact = fractal_derivative(f, p.exact)
        for n in errs:
            errs[n] = max(errs[n], abs(exact - fractal_derivative_numeric(cantor, g, p.exact, n, cantor_st)))
    assert errs[24] < 1e-4
    assert errs[16] <= 2 * errs[12] and errs[20] <= 2 * errs[16] and errs[24] <= 2 * errs[20]


@given(st.floats(0, 1), smooth)
def test_alpha_one_matches_classical_derivative(t, params):
    a, k, c = params
    st_ = make_staircase(make_set(0.5))
    f = FnOfS.from_sexpr(f"(+ (* {a!r} (sin (* {k!r} s))) (* {c!r} (* s s)))", st_)
    classical = a * k * math.cos(k * t) + 2 * c * t
    assert fractal_derivative(f, t) == pytest.approx(classical, abs=1e-8)


def test_integral_examples(cantor_st):
    one = FnOfS.constant(1.0, cantor_st)
    s_t = staircase_eval(cantor_st, Fraction(2, 9))
    assert fractal_integral(one, 0.0, s_t) == pytest.approx(s_t, abs=1e-12)
    inv = FnOfS.from_sexpr("(/ 1 s)", cantor_st, singular_points=(0.0,))
    assert fractal_integral(inv, 0.1, 0.8) == pytest.approx(math.log(8), abs=1e-10)
    assert fractal_integral(FnOfS.constant(0.0, cantor_st), 0.0, 1.0) == 0.0
    with pytest.raises(NonIntegrableError):
        fractal_integral(FnOfS.from_sexpr("(/ 1 (* s s))", cantor_st, singular_points=(0.0,)), 0.0, 1.0)


def test_primitive_is_antiderivative(cantor_st):
    g = FnOfS.from_sexpr("(cos s)", cantor_st)
    G = fractal_primitive(g)
    for s in (0.2, 0.5, 0.9):
        assert G.value(s) == pytest.approx(math.sin(s), abs=1e-10)
        assert G.d1(s) == g.value(s)


def test_primitive_uniqueness(cantor_st):
    g = FnOfS.from_sexpr("(exp (* -1 s))", cantor_st)
    s_values = np.random.default_rng(0).uniform(0, cantor_st.s_max, 10_000)
    assert primitive_constant_spread(g, s_values[:2000], 0.0, 0.4) < 1e-10


def test_algebra_examples(cantor_st):
    S = FnOfS.identity(cantor_st)
    rep = check_algebra_rules(S, S)
    assert rep.components["product"] < 1e-10
    one = FnOfS.constant(1.0, cantor_st)
    rep = check_algebra_rules(one, S, s_cutoff=0.1)
    assert rep.components["quotient"] < 1e-8
    assert all(reason == "below-cutoff" for _, reason in rep.excluded_points)


@given(smooth, smooth)
def test_algebra_rules_property(p, q):
    st_ = make_staircase(make_set(1 / 3))
    f = FnOfS.from_sexpr(f"(+ (* {p[0]!r} (sin (* {p[1]!r} s))) {p[2]!r})", st_)
    g = FnOfS.from_sexpr(f"(+ 2.5 (* {q[0] / 2!r} (cos (* {q[1]!r} s))))", st_)
    rep = check_algebra_rules(f, g, samples=16)
    assert rep.max_abs_residual < 1e-8 and rep.max_abs_residual >= 0


class _Const:
    def __init__(self, st):
        self.staircase, self.domain_s, self.exclusions = st, (st.s_min, st.s_max), ()

    def residual_at(self, y, s):
        return y.d1(s)


def test_residual_check_trivial_and_excluded(cantor_st):
    rep = residual_check(_Const(cantor_st), FnOfS.constant(3.0, cantor_st))
    assert rep.max_abs_residual == 0.0 and rep.sample_count == 512
    problem = _Const(cantor_st)
    problem.domain_s = (5.0, 6.0)
    with pytest.raises(AllPointsExcludedError):
        residual_check(problem, FnOfS.constant(3.0, cantor_st))


def test_residual_report_reasons(cantor_st):
    problem = _Const(cantor_st)
    problem.exclusions = (0.5,)
    rep = residual_check(problem, FnOfS.constant(1.0, cantor_st))
    assert rep.excluded_points and {r for _, r in rep.excluded_points} == {"pole-neighborhood"}
    assert rep.sample_count + len(rep.excluded_points) == 512


def test_endpoint_derivative_one_sided(cantor, cantor_st):
    S = lambda y: staircase_eval(cantor_st, y)  # noqa: E731
    for t in (endpoint(cantor, 10, 0, 0).exact, endpoint(cantor, 10, 1023, 1).exact):
        assert fractal_derivative_numeric(cantor, S, t, 10, cantor_st) == 1.0
