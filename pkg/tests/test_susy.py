import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fractalc.errors import MissingDerivativeError, NonPositiveGroundStateError
from fractalc.fractal_ops import FnOfS
from fractalc.susy import (
    Units,
    apply_ladder,
    coulomb_effective_potential,
    coulomb_ground_state,
    coulomb_partners,
    coulomb_system,
    oscillator_system,
    partner_potentials,
    potential_from_superpotential,
    schrodinger_residual,
    shape_invariance_check,
    superpotential_from_ground_state,
)

GRID = np.linspace(0.05, 0.95, 101)


def fn(text, st_=None, sing=()):
    return FnOfS.from_sexpr(text, st_, singular_points=sing)


def test_superpotential_examples():
    assert all(superpotential_from_ground_state(fn("(exp (* -0.5 (* s s)))")).value(s) == pytest.approx(s) for s in GRID)
    assert all(superpotential_from_ground_state(fn("(exp (- s))")).value(s) == pytest.approx(1.0) for s in GRID)
    assert superpotential_from_ground_state(fn("1")).value(0.4) == 0.0


def test_superpotential_rejects_nonpositive():
    with pytest.raises(NonPositiveGroundStateError):
        superpotential_from_ground_state(fn("(- s 0.5)"), (0.0, 1.0))
    W = superpotential_from_ground_state(fn("(- s 0.5)"))
    with pytest.raises(NonPositiveGroundStateError):
        W.value(0.2)
    with pytest.raises(MissingDerivativeError):
        superpotential_from_ground_state(FnOfS(lambda s: 1.0))


def test_potential_examples():
    V = potential_from_superpotential(fn("s"))
    assert V.value(0.3) == pytest.approx(0.09 - 1.0, abs=1e-15)
    assert potential_from_superpotential(fn("2.5")).value(0.7) == 6.25
    for ell in range(4):
        n = ell + 1
        V = potential_from_superpotential(fn(f"(- (/ {n} s) (/ 1 {n}))"))
        for s in (0.2, 0.6):
            assert V.value(s) == pytest.approx(n * (n + 1) / s**2 - 2 / s + 1 / n**2, rel=1e-13)
    with pytest.raises(MissingDerivativeError):
        potential_from_superpotential(FnOfS(lambda s: s))


def test_ladder_examples():
    psi0 = fn("(exp (* -0.5 (* s s)))")
    W = fn("s")
    assert max(abs(apply_ladder(W, psi0, False).value(s)) for s in GRID) < 1e-10
    psi = fn("(sin (* 2 s))")
    assert apply_ladder(fn("0"), psi, False).value(0.3) == pytest.approx(2 * math.cos(0.6), abs=1e-15)


@given(st.floats(-2, 2), st.floats(0.3, 3), st.floats(-1, 1), st.floats(0.1, 2))
def test_hamiltonian_factorizes(a, k, b, w):
    W = fn(f"(+ (* {w!r} s) {b!r})")
    psi = fn(f"(+ 2 (* {a!r} (sin (* {k!r} s))))")
    H_psi = apply_ladder(W, apply_ladder(W, psi, False), True)
    V = potential_from_superpotential(W)
    for s in np.linspace(0.05, 1.0, 100):
        assert H_psi.value(s) == pytest.approx(-psi.d2(s) + V.value(s) * psi.value(s), abs=1e-9)


@given(st.floats(-2, 2), st.floats(0.3, 3))
def test_partner_difference(a, k):
    W = fn(f"(* {a!r} (cos (* {k!r} s)))")
    pair = partner_potentials(W, shift=0.3)
    for s in (0.1, 0.5, 0.9):
        assert pair.v_plus.value(s) - pair.v_minus.value(s) == pytest.approx(2 * W.d1(s), abs=1e-9)


def test_partner_examples():
    pair = partner_potentials(fn("s"))
    assert pair.v_minus.value(0.5) == pytest.approx(-0.75) and pair.v_plus.value(0.5) == pytest.approx(1.25)
    pair = partner_potentials(fn("0"))
    assert pair.v_minus.value(0.5) == 0.0 == pair.v_plus.value(0.5)


@pytest.mark.parametrize("ell", range(9))
def test_coulomb_partners_match_printed_forms(ell, cantor_st):
    system = coulomb_system(ell, cantor_st)
    generic = partner_potentials(system.superpotential, ell, 2.0 / (ell + 1) ** 2)
    closed = coulomb_partners(ell, cantor_st)
    n = ell + 1
    for s in (0.1, 0.4, 0.8):
        assert closed.v_minus.value(s) == pytest.approx(ell * n / s**2 - 2 / s - 1 / n**2, rel=1e-14)
        assert closed.v_plus.value(s) == pytest.approx(n * (n + 1) / s**2 - 2 / s - 1 / n**2, rel=1e-14)
        assert generic.v_minus.value(s) == pytest.approx(closed.v_minus.value(s), abs=1e-9)
        assert generic.v_plus.value(s) == pytest.approx(closed.v_plus.value(s), abs=1e-9)


@pytest.mark.parametrize("ell", range(9))
def test_coulomb_system_consistency(ell, cantor_st):
    system = coulomb_system(ell, cantor_st)
    grid = np.linspace(*system.domain_s, 50)
    assert system.closure_error(grid) < 1e-9
    assert system.ground_state_error(grid) < 1e-8
    a_psi = apply_ladder(system.superpotential, system.ground_state, False)
    assert max(abs(a_psi.value(s)) for s in grid) < 1e-10


@pytest.mark.parametrize("ell, expected", [(0, -0.75), (5, 1 / 49 - 1 / 36)])
def test_shape_invariance_examples(ell, expected):
    from fractalc.susy import shape_invariance_remainder

    assert shape_invariance_remainder(ell) == pytest.approx(expected, abs=1e-15)
    assert shape_invariance_check(ell, np.linspace(0.045, 0.9, 1000)) < 1e-12
    assert shape_invariance_check(ell, [0.3]) < 1e-12


def test_oscillator(cantor_st):
    system = oscillator_system(cantor_st)
    assert system.ground_energy == 0.5
    assert system.closure_error(GRID) < 1e-9
    rep = schrodinger_residual(system.physical_potential, system.ground_state, 0.5)
    assert rep.max_abs_residual < 1e-9


def test_oscillator_units(cantor_st):
    units = Units(hbar=1.0, mass=2.0, omega=3.0)
    system = oscillator_system(cantor_st, units)
    assert system.ground_energy == pytest.approx(1.5)
    rep = schrodinger_residual(system.physical_potential, system.ground_state, 1.5, units=units)
    assert rep.max_abs_residual < 1e-9


def test_trivial_schrodinger(cantor_st):
    rep = schrodinger_residual(FnOfS.constant(0.0, cantor_st), FnOfS.constant(1.0, cantor_st), 0.0)
    assert rep.max_abs_residual == 0.0


def test_hydrogen_ground_state(cantor_st):
    rep = schrodinger_residual(
        coulomb_effective_potential(0, cantor_st),
        coulomb_ground_state(0, cantor_st),
        -0.5,
        domain_s=(0.1, cantor_st.s_max),
    )
    assert rep.max_abs_residual < 1e-8


def test_coulomb_rejects_negative_ell():
    with pytest.raises(NonPositiveGroundStateError):
        coulomb_system(-1)
