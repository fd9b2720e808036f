import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fractalc.errors import DomainError
from fractalc.fractal_set import as_exact, endpoint, make_set
from fractalc.staircase import (
    gamma,
    hausdorff_cover_estimate,
    make_staircase,
    measure_cdf,
    staircase_eval,
    staircase_inverse,
)

from .conftest import GAMMA_CANTOR


def cantor_function(t: Fraction, digits: int = 60) -> float:
    """Classical devil's staircase read off the ternary digits of t."""
    if t <= 0.0:
        return 0.0
    if t >= 1.0:
        return 1.0
    total, weight = 0.0, 0.5
    for _ in range(digits):
        t *= 3
        d = int(t)
        t -= d
        if d == 1:
            return total + weight
        if d == 2:
            total += weight
        weight *= 0.5
    return total


@given(st.floats(0.05, 20.0))
def test_gamma_matches_stdlib(x):
    assert gamma(x) == pytest.approx(math.gamma(x), rel=1e-13)


def test_gamma_half_integer_and_integers():
    assert gamma(1.5) == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-15)
    assert [gamma(k) for k in (1, 2, 3, 6)] == [1.0, 1.0, 2.0, 120.0]


def test_cantor_values(cantor_st):
    assert cantor_st.gamma_factor == pytest.approx(GAMMA_CANTOR, rel=1e-14)
    assert staircase_eval(cantor_st, 1) == pytest.approx(GAMMA_CANTOR, abs=1e-12)
    assert staircase_eval(cantor_st, 0.5) == cantor_st.gamma_factor / 2
    assert staircase_eval(cantor_st, 0.25) == pytest.approx(GAMMA_CANTOR / 3, abs=1e-12)
    assert staircase_eval(cantor_st, 0) == 0.0


def test_measure_cdf_exact_on_endpoints(cantor):
    assert measure_cdf(cantor, Fraction(2, 9)) == Fraction(1, 4)
    assert measure_cdf(cantor, Fraction(1, 3)) == Fraction(1, 2)
    assert measure_cdf(cantor, Fraction(7, 9)) == Fraction(3, 4)


@given(st.floats(0, 1))
def test_against_ternary_oracle(t):
    st_ = make_staircase(make_set(1 / 3))
    T = Fraction(t)
    assert staircase_eval(st_, T) / st_.gamma_factor == pytest.approx(cantor_function(T), abs=1e-12)


@given(st.floats(0, 1))
def test_self_similarity(t):
    # S is only α-Hölder, so t/3 must be formed exactly: one ulp of input moves S by ~1e-10
    st_ = make_staircase(make_set(1 / 3))
    T = as_exact(t)
    assert staircase_eval(st_, T / 3) == pytest.approx(staircase_eval(st_, T) / 2, abs=1e-12)
    assert staircase_eval(st_, Fraction(2, 3) + T / 3) == pytest.approx(
        st_.gamma_factor / 2 + staircase_eval(st_, T) / 2, abs=1e-12
    )


@given(st.floats(0, 1), st.floats(0, 1))
def test_monotone(t1, t2):
    st_ = make_staircase(make_set(0.3))
    lo, hi = sorted((t1, t2))
    assert staircase_eval(st_, lo) <= staircase_eval(st_, hi)


@given(st.floats(0, 1))
def test_alpha_one_is_identity(t):
    st_ = make_staircase(make_set(0.5))
    assert staircase_eval(st_, t) == pytest.approx(t, abs=1e-15)


@given(st.integers(1, 12), st.data())
def test_constant_across_gaps(n, data):
    fset = make_set(1 / 3)
    st_ = make_staircase(fset)
    i = data.draw(st.integers(0, 2**n - 2))
    right = endpoint(fset, n, i, 1).exact
    left = endpoint(fset, n, i + 1, 0).exact
    mid = (right + left) / 2
    assert staircase_eval(st_, right) == staircase_eval(st_, mid) == staircase_eval(st_, left)


def test_base_point_shift(cantor):
    st_ = make_staircase(cantor, base_point=Fraction(1, 3))
    assert staircase_eval(st_, Fraction(1, 3)) == 0.0
    assert staircase_eval(st_, 0) == pytest.approx(-GAMMA_CANTOR / 2, rel=1e-14)
    assert st_.s_max - st_.s_min == pytest.approx(GAMMA_CANTOR, rel=1e-14)
    with pytest.raises(DomainError):
        make_staircase(cantor, base_point=2.0)


def test_hausdorff_examples(cantor):
    assert hausdorff_cover_estimate(cantor, 1, 5) == pytest.approx(1.0, abs=1e-12)
    assert abs(hausdorff_cover_estimate(cantor, 0.5, 8) - 0.5) <= 2.0**-7
    assert abs(hausdorff_cover_estimate(cantor, 0.25, 12) - 1 / 3) <= 2.0**-11


@given(st.floats(0, 1), st.sampled_from([4, 8, 12]))
def test_hausdorff_bound(t, n):
    fset = make_set(1 / 3)
    assert abs(hausdorff_cover_estimate(fset, t, n) - float(measure_cdf(fset, t))) <= 2.0 ** (1 - n)


def test_inverse_example(cantor_st):
    assert staircase_inverse(cantor_st, cantor_st.gamma_factor / 2) == Fraction(1, 3)
    with pytest.raises(DomainError):
        staircase_inverse(cantor_st, -1.0)


@given(st.floats(0, 1))
def test_inverse_round_trip(u):
    st_ = make_staircase(make_set(1 / 3))
    s = u * st_.gamma_factor
    t = staircase_inverse(st_, s)
    assert staircase_eval(st_, t) == pytest.approx(s, abs=1e-12)


def test_vectorized_values(cantor_st):
    from fractalc.staircase import staircase_values

    ts = np.linspace(0, 1, 7)
    np.testing.assert_array_equal(staircase_values(cantor_st, ts), [staircase_eval(cantor_st, t) for t in ts])
