"""Factorized Schrödinger operators on a fractal, in the staircase coordinate.

Conventions (all in s = S(t)):
    W = -(ln ψ0)'             superpotential from a positive ground state
    V = W² - W'               factorization potential, A†A = -d²/ds² + V
    A = d/ds + W,  A† = -d/ds + W
The physical Hamiltonian is (ħ²/2m)·A†A + E_ground; ``energy_shift`` stores
E_ground in the factorization scale, i.e. (2m/ħ²)·E_ground.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import MissingDerivativeError, NonPositiveGroundStateError
from .fractal_ops import EPSILON_FRACTION, FnOfS, ResidualReport, _richardson_derivative, residual_check
from .staircase import Staircase


@dataclass(frozen=True)
class Units:
    hbar: float = 1.0
    mass: float = 1.0
    omega: float = 1.0

    @property
    def kinetic(self) -> float:
        """ħ²/2m."""
        return self.hbar**2 / (2.0 * self.mass)


@dataclass(frozen=True)
class SusySystem:
    superpotential: FnOfS
    potential: FnOfS
    ground_state: FnOfS | None = None
    energy_shift: float = 0.0
    units: Units = Units()
    physical_potential: FnOfS | None = None
    domain_s: tuple[float, float] | None = None
    label: str = ""

    @property
    def ground_energy(self) -> float:
        return self.units.kinetic * self.energy_shift

    def closure_error(self, s_values: Sequence[float]) -> float:
        W = self.superpotential
        return max(abs(self.potential.value(s) - (W.value(s) ** 2 - W.d1(s))) for s in s_values)

    def ground_state_error(self, s_values: Sequence[float]) -> float:
        """|W + (ln ψ0)'|, with the log-derivative taken by finite differences."""
        if self.ground_state is None:
            return 0.0
        psi = self.ground_state

        def log_psi(s):
            return math.log(psi.profile(s))

        return max(abs(self.superpotential.value(s) + _richardson_derivative(log_psi, s, 0.02)) for s in s_values)


@dataclass(frozen=True)
class PartnerPair:
    v_minus: FnOfS
    v_plus: FnOfS
    angular_momentum: int | None = None
    shift: float = 0.0


def _require_derivative(f: FnOfS, what: str) -> None:
    if f.profile_derivative is None:
        raise MissingDerivativeError(f"{what} ({f.label or 'profile'}) has no s-derivative")


def superpotential_from_ground_state(psi0: FnOfS, domain: tuple[float, float] | None = None) -> FnOfS:
    _require_derivative(psi0, "ground state")
    if domain is not None:
        for s in np.linspace(domain[0], domain[1], 65):
            if not psi0.profile(float(s)) > 0.0:
                raise NonPositiveGroundStateError(f"ground state is not positive at s={float(s):.6g}")

    def W(s):
        p = psi0.value(s)
        if not p > 0.0:
            raise NonPositiveGroundStateError(f"ground state is not positive at s={s:.6g}")
        return -psi0.d1(s) / p

    dW = None
    if psi0.profile_derivative2 is not None:
        def dW(s):
            p, p1, p2 = psi0.value(s), psi0.d1(s), psi0.d2(s)
            return -(p2 * p - p1 * p1) / (p * p)

    return FnOfS(W, dW, psi0.staircase, None, psi0.singular_points, label=f"-(ln {psi0.label})'")


def potential_from_superpotential(W: FnOfS) -> FnOfS:
    _require_derivative(W, "superpotential")

    def V(s):
        return W.value(s) ** 2 - W.d1(s)

    dV = None
    if W.profile_derivative2 is not None:
        def dV(s):
            return 2.0 * W.value(s) * W.d1(s) - W.d2(s)

    return FnOfS(V, dV, W.staircase, None, W.singular_points, label=f"W^2-W'[{W.label}]")


def apply_ladder(W: FnOfS, psi: FnOfS, dagger: bool) -> FnOfS:
    """A ψ = ψ' + Wψ, or A† ψ = -ψ' + Wψ when ``dagger``."""
    _require_derivative(psi, "wavefunction")
    sign = -1.0 if dagger else 1.0

    def out(s):
        return sign * psi.d1(s) + W.value(s) * psi.value(s)

    d_out = None
    if psi.profile_derivative2 is not None and W.profile_derivative is not None:
        def d_out(s):
            return sign * psi.d2(s) + W.d1(s) * psi.value(s) + W.value(s) * psi.d1(s)

    st = psi.staircase if psi.staircase is not None else W.staircase
    sing = tuple(sorted(set(W.singular_points) | set(psi.singular_points)))
    name = "A+" if dagger else "A"
    return FnOfS(out, d_out, st, None, sing, label=f"{name}[{psi.label}]")


def partner_potentials(W: FnOfS, ell: int | None = None, shift: float = 0.0) -> PartnerPair:
    """(W² - W' - shift, W² + W' - shift)."""
    _require_derivative(W, "superpotential")
    v_minus = FnOfS(lambda s: W.value(s) ** 2 - W.d1(s) - shift, None, W.staircase, None, W.singular_points, "V-")
    v_plus = FnOfS(lambda s: W.value(s) ** 2 + W.d1(s) - shift, None, W.staircase, None, W.singular_points, "V+")
    return PartnerPair(v_minus, v_plus, ell, shift)


class _SchrodingerProblem:
    def __init__(self, V: FnOfS, E: float, kinetic: float, st: Staircase, domain_s):
        self.V, self.E, self.kinetic = V, E, kinetic
        self.staircase = st
        self.domain_s = domain_s if domain_s is not None else (st.s_min, st.s_max)
        self.exclusions = ()

    def residual_at(self, psi: FnOfS, s: float) -> float:
        return -self.kinetic * psi.d2(s) + (self.V.value(s) - self.E) * psi.value(s)


def schrodinger_residual(
    V: FnOfS,
    psi: FnOfS,
    E: float,
    depth: int = 24,
    samples: int = 512,
    units: Units = Units(),
    domain_s: tuple[float, float] | None = None,
) -> ResidualReport:
    """max |-(ħ²/2m)ψ'' + Vψ - Eψ| over sampled fractal points."""
    st = psi.staircase if psi.staircase is not None else V.staircase
    if st is None:
        raise MissingDerivativeError("schrodinger_residual needs a staircase on psi or V")
    return residual_check(_SchrodingerProblem(V, E, units.kinetic, st, domain_s), psi, depth=depth, samples=samples)


# -- presets --------------------------------------------------------------------


def oscillator_system(st: Staircase | None = None, units: Units = Units()) -> SusySystem:
    k = units.mass * units.omega / units.hbar
    psi0 = FnOfS.from_sexpr(f"(exp (* {-k / 2!r} (* s s)))", st, label="psi0")
    W = superpotential_from_ground_state(psi0)
    physical = FnOfS.from_sexpr(f"(* {0.5 * units.mass * units.omega**2!r} (* s s))", st, label="V_phys")
    return SusySystem(
        superpotential=W,
        potential=potential_from_superpotential(W),
        ground_state=psi0,
        energy_shift=k,  # (2m/ħ²)·(ħω/2)
        units=units,
        physical_potential=physical,
        label="oscillator",
    )


def _coulomb_domain(st: Staircase | None) -> tuple[float, float] | None:
    if st is None:
        return None
    return (EPSILON_FRACTION * st.gamma_factor, st.s_max)


def coulomb_ground_state(ell: int, st: Staircase | None = None) -> FnOfS:
    """u = s^{ℓ+1} exp(-s/(ℓ+1)), the nodeless radial state for angular momentum ℓ."""
    n = float(ell + 1)
    return FnOfS.from_sexpr(f"(* (pow s {n!r}) (exp (/ (- s) {n!r})))", st, singular_points=(0.0,), label=f"u_{ell}")


def coulomb_superpotential(ell: int, st: Staircase | None = None) -> FnOfS:
    n = float(ell + 1)
    return FnOfS.from_sexpr(f"(+ (/ {-n!r} s) {1 / n!r})", st, singular_points=(0.0,), label=f"W_{ell}")


def coulomb_effective_potential(ell: int, st: Staircase | None = None) -> FnOfS:
    """ℓ(ℓ+1)/(2s²) - 1/s in atomic units."""
    return FnOfS.from_sexpr(
        f"(- (/ {ell * (ell + 1) / 2!r} (* s s)) (/ 1 s))", st, singular_points=(0.0,), label=f"Veff_{ell}"
    )


def coulomb_partner_shift(ell: int) -> float:
    return 2.0 / (ell + 1) ** 2


def coulomb_system(ell: int, st: Staircase | None = None) -> SusySystem:
    if ell < 0:
        raise NonPositiveGroundStateError(f"angular momentum must be >= 0, got {ell}")
    W = coulomb_superpotential(ell, st)
    return SusySystem(
        superpotential=W,
        potential=potential_from_superpotential(W),
        ground_state=coulomb_ground_state(ell, st),
        energy_shift=-1.0 / (ell + 1) ** 2,
        units=Units(),
        physical_potential=coulomb_effective_potential(ell, st),
        domain_s=_coulomb_domain(st),
        label=f"coulomb(l={ell})",
    )


@dataclass(frozen=True)
class InverseSquareLaw:
    """k2/s² + k1/s + k0, kept as coefficients so differences cancel exactly."""

    k2: float
    k1: float
    k0: float

    def __call__(self, s: float) -> float:
        return self.k2 / (s * s) + self.k1 / s + self.k0

    def __sub__(self, other: "InverseSquareLaw") -> "InverseSquareLaw":
        return InverseSquareLaw(self.k2 - other.k2, self.k1 - other.k1, self.k0 - other.k0)

    def as_fn(self, st: Staircase | None = None, label: str = "") -> FnOfS:
        k2, k1 = self.k2, self.k1
        return FnOfS(self, lambda s: -2.0 * k2 / s**3 - k1 / (s * s), st, None, (0.0,), label)


def coulomb_partner_laws(ell: int) -> tuple[InverseSquareLaw, InverseSquareLaw]:
    tail = -1.0 / (ell + 1) ** 2
    return (
        InverseSquareLaw(float(ell * (ell + 1)), -2.0, tail),
        InverseSquareLaw(float((ell + 1) * (ell + 2)), -2.0, tail),
    )


def coulomb_partners(ell: int, st: Staircase | None = None) -> PartnerPair:
    """Closed-form partners ℓ(ℓ+1)/s² - 2/s - 1/(ℓ+1)² and (ℓ+1)(ℓ+2)/s² - 2/s - 1/(ℓ+1)²."""
    minus, plus = coulomb_partner_laws(ell)
    return PartnerPair(minus.as_fn(st, f"V-_{ell}"), plus.as_fn(st, f"V+_{ell}"), ell, coulomb_partner_shift(ell))


def shape_invariance_remainder(ell: int) -> float:
    return 1.0 / (ell + 2) ** 2 - 1.0 / (ell + 1) ** 2


def shape_invariance_check(ell: int, s_grid: Sequence[float]) -> float:
    """max |V+(s; ℓ) - V-(s; ℓ+1) - R(ℓ)| over the grid."""
    gap = coulomb_partner_laws(ell)[1] - coulomb_partner_laws(ell + 1)[0]
    R = shape_invariance_remainder(ell)
    return max((abs(gap(s) - R) for s in s_grid), default=0.0)
