"""Fractal derivative, second derivative and integral.

Every function handled here is a profile g composed with the staircase,
f(t) = g(S(t)).  On F the fractal derivative of f is g'(S(t)); off F it is 0.
The limit-quotient form is kept as :func:`fractal_derivative_numeric`, which
is the validation oracle for the profile route.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import (
    AllPointsExcludedError,
    DegenerateDenominatorError,
    FractalcError,
    NonIntegrableError,
    SingularityError,
)
from .fractal_set import (
    FractalPoint,
    FractalSet,
    as_exact,
    bracketing_neighbors,
    contains,
    sample_fractal_points,
)
from .sexpr import Expr, compile_expr, diff, parse, to_string
from .staircase import Staircase, make_staircase, staircase_at_point, staircase_eval

MEMBERSHIP_DEPTH = 48
SINGULAR_TOL = 1e-12
EPSILON_FRACTION = 0.05  # singular cutoff as a fraction of Γ(α+1)

Profile = Callable[[float], float]


def _richardson_derivative(g: Profile, s: float, h0: float) -> float:
    """Ridders' extrapolated central difference."""
    ntab = 10
    con, con2 = 1.4, 1.96
    a = np.zeros((ntab, ntab))
    h = _usable_step(g, s, h0)
    a[0, 0] = (g(s + h) - g(s - h)) / (2.0 * h)
    best, err = a[0, 0], math.inf
    for i in range(1, ntab):
        h /= con
        a[0, i] = (g(s + h) - g(s - h)) / (2.0 * h)
        fac = con2
        for j in range(1, i + 1):
            a[j, i] = (a[j - 1, i] * fac - a[j - 1, i - 1]) / (fac - 1.0)
            fac *= con2
            errt = max(abs(a[j, i] - a[j - 1, i]), abs(a[j, i] - a[j - 1, i - 1]))
            if errt <= err:
                err, best = errt, a[j, i]
        # early columns can misjudge err when the coarse differences are still poor
        if i >= 3 and abs(a[i, i] - a[i - 1, i - 1]) >= 2.0 * err:
            break
    return float(best)


def _usable_step(g: Profile, s: float, h: float) -> float:
    """Shrink h until g is finite at s ± h."""
    for _ in range(40):
        try:
            with np.errstate(all="ignore"):
                if math.isfinite(g(s + h)) and math.isfinite(g(s - h)):
                    return h
        except (ValueError, ZeroDivisionError, SingularityError):
            pass
        h *= 0.5
    raise SingularityError(f"profile is not finite anywhere near s={s!r}", s)


@dataclass(frozen=True)
class FnOfS:
    """f(t) = profile(S(t)), optionally with analytic s-derivatives.

    Without ``profile_derivative`` the s-derivative falls back to Ridders'
    extrapolated finite differences.  ``singular_points`` lists s values where
    the profile or its derivative is undefined.
    """

    profile: Profile
    profile_derivative: Profile | None = None
    staircase: Staircase | None = None
    profile_derivative2: Profile | None = None
    singular_points: tuple[float, ...] = ()
    label: str = ""
    fd_step: float = 0.05

    # -- evaluation ---------------------------------------------------------

    def __call__(self, t) -> float:
        if self.staircase is None:
            raise FractalcError(f"{self.label or 'function'} has no staircase attached")
        return self.value(staircase_eval(self.staircase, t))

    def _guard(self, s: float) -> None:
        for p in self.singular_points:
            if abs(s - p) <= SINGULAR_TOL * max(1.0, abs(p)):
                raise SingularityError(f"{self.label or 'profile'} is singular at s={p!r}", p)

    def value(self, s: float) -> float:
        self._guard(s)
        return float(self.profile(s))

    def _fd_step(self, s: float) -> float:
        h = self.fd_step
        for p in self.singular_points:
            h = min(h, 0.5 * abs(s - p))
        return h

    def d1(self, s: float) -> float:
        self._guard(s)
        if self.profile_derivative is not None:
            return float(self.profile_derivative(s))
        return _richardson_derivative(self.profile, s, self._fd_step(s))

    def d2(self, s: float) -> float:
        self._guard(s)
        if self.profile_derivative2 is not None:
            return float(self.profile_derivative2(s))
        return _richardson_derivative(self.d1, s, self._fd_step(s))

    @property
    def has_derivative(self) -> bool:
        return self.profile_derivative is not None

    # -- construction -------------------------------------------------------

    def with_staircase(self, st: Staircase | None) -> "FnOfS":
        return replace(self, staircase=st)

    @classmethod
    def identity(cls, st: Staircase | None = None) -> "FnOfS":
        return cls(lambda s: s, lambda s: 1.0, st, lambda s: 0.0, label="S")

    @classmethod
    def constant(cls, value: float, st: Staircase | None = None) -> "FnOfS":
        v = float(value)
        return cls(lambda s: v, lambda s: 0.0, st, lambda s: 0.0, label=repr(v))

    @classmethod
    def from_sexpr(
        cls,
        text: str | Expr,
        st: Staircase | None = None,
        env: dict[str, float] | None = None,
        singular_points: Sequence[float] = (),
        label: str | None = None,
    ) -> "FnOfS":
        expr = parse(text) if isinstance(text, str) else text
        d1 = diff(expr)
        d2 = diff(d1)
        return cls(
            compile_expr(expr, "s", env),
            compile_expr(d1, "s", env),
            st,
            compile_expr(d2, "s", env),
            tuple(float(p) for p in singular_points),
            label=to_string(expr) if label is None else label,
        )

    def _combine(self, other, op, symbol: str) -> "FnOfS":
        if isinstance(other, FnOfS):
            g1, g2 = self.profile, other.profile
            st = self.staircase if self.staircase is not None else other.staircase
            sing = tuple(sorted(set(self.singular_points) | set(other.singular_points)))
            olabel = other.label
        else:
            c = float(other)
            g1, g2 = self.profile, (lambda s, _c=c: _c)
            st, sing, olabel = self.staircase, self.singular_points, repr(c)
        # derivatives are left to the finite-difference fallback on purpose:
        # the algebra-rule checks must not assume the rules they verify
        return FnOfS(lambda s: op(g1(s), g2(s)), None, st, None, sing, f"({symbol} {self.label} {olabel})")

    def __add__(self, other):
        return self._combine(other, operator.add, "+")

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, operator.sub, "-")

    def __mul__(self, other):
        return self._combine(other, operator.mul, "*")

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._combine(other, operator.truediv, "/")

    def __neg__(self):
        return self._combine(-1.0, operator.mul, "*")


@dataclass(frozen=True)
class ResidualReport:
    max_abs_residual: float
    sample_count: int
    excluded_points: list[tuple[float, str]] = field(default_factory=list)
    depth: int = 0
    components: dict[str, float] = field(default_factory=dict)

    def passed(self, threshold: float) -> bool:
        return self.sample_count > 0 and self.max_abs_residual < threshold


def indicator(fset: FractalSet, t, depth: int = MEMBERSHIP_DEPTH) -> float:
    """χ_F truncated at a pre-fractal depth."""
    return 1.0 if contains(fset, t, depth) else 0.0


def fractal_derivative_numeric(fset: FractalSet, f: Callable, t, depth: int, st: Staircase | None = None) -> float:
    """Secant estimate of the F-limit quotient at t.

    Uses the nearest depth-n endpoints y- < t < y+ (one-sided at the ends of
    the interval).  ``f`` is called with exact rationals; plain math functions
    accept them.  Off the depth-n pre-fractal the result is exactly 0.
    """
    if depth < 2:
        raise FractalcError(f"numeric derivative needs depth >= 2, got {depth}")
    if not contains(fset, t, depth):
        return 0.0
    st = make_staircase(fset) if st is None else st
    texact = as_exact(t)
    below, above = bracketing_neighbors(fset, texact, depth)
    if below is not None and above is not None:
        y0, y1 = below.exact, above.exact
    elif above is not None:
        y0, y1 = texact, above.exact
    else:
        y0, y1 = below.exact, texact
    ds = staircase_eval(st, y1) - staircase_eval(st, y0)
    if abs(ds) < 1e-300:
        raise DegenerateDenominatorError(
            f"staircase increment vanishes between fractal endpoints {float(y0)!r} and {float(y1)!r}"
        )
    return (f(y1) - f(y0)) / ds


def fractal_derivative2_numeric(fset: FractalSet, f: Callable, t, depth: int, st: Staircase | None = None) -> float:
    """Secant estimate of D²f: the limit quotient applied to the numeric first derivative."""
    st = make_staircase(fset) if st is None else st
    return fractal_derivative_numeric(fset, lambda y: fractal_derivative_numeric(fset, f, y, depth, st), t, depth, st)


def fractal_derivative(f: FnOfS, t, depth: int = MEMBERSHIP_DEPTH) -> float:
    """g'(S(t))·χ_F(t)."""
    st = _need_staircase(f)
    if not contains(st.set, t, depth):
        return 0.0
    return f.d1(staircase_eval(st, t))


def fractal_derivative2(f: FnOfS, t, depth: int = MEMBERSHIP_DEPTH) -> float:
    st = _need_staircase(f)
    if not contains(st.set, t, depth):
        return 0.0
    return f.d2(staircase_eval(st, t))


def _need_staircase(f: FnOfS) -> Staircase:
    if f.staircase is None:
        raise FractalcError(f"{f.label or 'function'} has no staircase attached")
    return f.staircase


def fractal_integral(f: FnOfS, s_lo: float, s_hi: float, tol: float = 1e-10) -> float:
    """∫ g(s) ds over [s_lo, s_hi] in the staircase coordinate.

    This is the increment of any fractal primitive of f between the points
    where S equals s_lo and s_hi.
    """
    lo, hi = float(s_lo), float(s_hi)
    if lo == hi:
        return 0.0
    sign = 1.0
    if lo > hi:
        lo, hi, sign = hi, lo, -1.0
    inside = [p for p in f.singular_points if lo <= p <= hi]

    def g(s):
        try:
            return f.profile(s)
        except (ZeroDivisionError, ValueError) as exc:
            raise NonIntegrableError(f"integrand undefined at s={s!r}") from exc

    with np.errstate(all="ignore"):
        out = integrate.quad(
            g, lo, hi, epsabs=tol, epsrel=0.0, limit=200, points=[p for p in inside if lo < p < hi] or None,
            full_output=True,
        )
    value, abserr = out[0], out[1]
    # a fourth element is quadpack's warning message (divergence, roundoff, subdivision limit)
    if len(out) > 3 or not math.isfinite(value) or abserr > 10 * tol:
        raise NonIntegrableError(
            f"integral of {f.label or 'profile'} over [{lo}, {hi}] did not converge (error estimate {abserr:.3g})"
        )
    return sign * value


def fractal_primitive(f: FnOfS, s0: float = 0.0, constant: float = 0.0) -> FnOfS:
    """Ψ with Ψ(S(t)) = constant + ∫_{s0}^{S(t)} g, whose derivative is g."""
    return FnOfS(
        lambda s: constant + fractal_integral(f, s0, s),
        f.profile,
        f.staircase,
        f.profile_derivative,
        f.singular_points,
        label=f"(primitive {f.label})",
    )


def _sample_points(st: Staircase, depth: int, samples: int, rng=None) -> list[FractalPoint]:
    return sample_fractal_points(st.set, depth, samples, rng)


def check_algebra_rules(
    f: FnOfS,
    g: FnOfS,
    samples: int = 64,
    depth: int = 20,
    s_cutoff: float = 0.0,
    denominator_tol: float = 1e-8,
) -> ResidualReport:
    """Max residual of the sum, product and quotient rules at fractal points.

    Left-hand sides differentiate the combined function by finite differences;
    right-hand sides use the derivatives of f and g separately.
    """
    st = f.staircase or g.staircase
    if st is None:
        raise FractalcError("check_algebra_rules needs a staircase on f or g")
    f, g = f.with_staircase(st), g.with_staircase(st)
    sum_fn, prod_fn, quot_fn = f + g, f * g, f / g
    worst = {"sum": 0.0, "product": 0.0, "quotient": 0.0}
    excluded: list[tuple[float, str]] = []
    used = 0
    for p in _sample_points(st, depth, samples):
        s = staircase_at_point(st, p)
        if s < s_cutoff:
            excluded.append((p.t, "below-cutoff"))
            continue
        try:
            fv, gv, df, dg = f.value(s), g.value(s), f.d1(s), g.d1(s)
            worst["sum"] = max(worst["sum"], abs(sum_fn.d1(s) - (df + dg)))
            worst["product"] = max(worst["product"], abs(prod_fn.d1(s) - (fv * dg + gv * df)))
        except SingularityError:
            excluded.append((p.t, "singular"))
            continue
        used += 1
        if abs(gv) < denominator_tol:
            excluded.append((p.t, "quotient-denominator"))
            continue
        rhs = (gv * df - fv * dg) / gv**2
        worst["quotient"] = max(worst["quotient"], abs(quot_fn.d1(s) - rhs))
    return ResidualReport(max(worst.values()), used, excluded, depth, worst)


def residual_check(
    problem,
    candidate: FnOfS,
    depth: int = 24,
    samples: int = 512,
    pole_radius: float = 0.1,
    rng=None,
) -> ResidualReport:
    """Max |LHS - RHS| of ``problem`` for ``candidate`` at fractal endpoints.

    ``problem`` supplies ``staircase``, ``domain_s`` (closed s-interval),
    ``exclusions`` (s centers of pole neighborhoods) and ``residual_at``.
    Points outside the domain, within ``pole_radius`` of a pole, or where the
    candidate is singular are skipped and reported with a reason.
    """
    st = problem.staircase
    lo, hi = problem.domain_s
    # singular points at or past the domain edge are already cut off
    poles = list(problem.exclusions) + [c for c in candidate.singular_points if lo < c < hi]
    excluded: list[tuple[float, str]] = []
    worst = 0.0
    used = 0
    for p in _sample_points(st, depth, samples, rng):
        s = staircase_at_point(st, p)
        if s < lo or s > hi:
            excluded.append((p.t, "singular-cutoff" if s < lo else "outside-domain"))
            continue
        if any(abs(s - c) < pole_radius for c in poles):
            excluded.append((p.t, "pole-neighborhood"))
            continue
        try:
            res = abs(problem.residual_at(candidate, s))
        except (SingularityError, ZeroDivisionError):
            excluded.append((p.t, "singular"))
            continue
        if not math.isfinite(res):
            excluded.append((p.t, "non-finite"))
            continue
        worst = max(worst, res)
        used += 1
    if used == 0:
        raise AllPointsExcludedError(
            f"all {len(excluded)} sample points were excluded for {candidate.label or 'candidate'}"
        )
    return ResidualReport(worst, used, excluded, depth)


def primitive_constant_spread(g: FnOfS, s_values: Sequence[float], s0_a: float, s0_b: float) -> float:
    """max - min of (G1 - G2) for primitives anchored at two base points."""
    g1 = fractal_primitive(g, s0_a)
    g2 = fractal_primitive(g, s0_b, constant=1.0)
    diffs = [g1.value(s) - g2.value(s) for s in s_values]
    return max(diffs) - min(diffs)

