"""Integral staircase S(t) = Γ(α+1)·μ([p, t]) for two-map self-similar sets.

μ is the normalized self-similar measure (each depth-n interval carries
2**-n), which equals the α-dimensional Hausdorff measure for the middle-third
Cantor set and differs from it only by a constant factor otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DomainError, ResourceError
from .fractal_set import (
    ENUMERATION_CAP,
    FractalPoint,
    FractalSet,
    _check_depth,
    as_exact,
    prefractal,
)

DEFAULT_RECURSION_DEPTH = 60

# Lanczos approximation, g = 7, n = 9 (Godfrey's coefficients)
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma(x: float) -> float:
    """Γ(x) for x > 0 via the Lanczos series (relative error ~1e-15)."""
    x = float(x)
    if not x > 0.0 or not math.isfinite(x):
        raise DomainError(f"gamma is only defined here for finite x > 0, got {x!r}")
    if x.is_integer() and x <= 171:
        return float(math.factorial(int(x) - 1))
    if x < 0.5:
        # reflection keeps the series in its accurate range
        return math.pi / (math.sin(math.pi * x) * gamma(1.0 - x))
    z = x - 1.0
    acc = _LANCZOS_COEF[0]
    for i in range(1, len(_LANCZOS_COEF)):
        acc += _LANCZOS_COEF[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (z + 0.5) * math.exp(-t) * acc


@dataclass(frozen=True)
class Staircase:
    set: FractalSet
    base_point: float
    gamma_factor: float
    total_measure: float = 1.0
    depth: int = DEFAULT_RECURSION_DEPTH
    _base_mass: Fraction = field(default=Fraction(0), repr=False, compare=False)

    @property
    def s_max(self) -> float:
        """S(b): the top of the staircase image."""
        return self.gamma_factor * float(1 - self._base_mass)

    @property
    def s_min(self) -> float:
        return 0.0 - self.gamma_factor * float(self._base_mass)

    def __call__(self, t) -> float:
        return staircase_eval(self, t)


def make_staircase(fset: FractalSet, base_point: float | None = None, depth: int = DEFAULT_RECURSION_DEPTH) -> Staircase:
    if depth < 1:
        raise DomainError(f"recursion depth must be positive, got {depth}")
    p = fset.a if base_point is None else float(base_point)
    if not fset.a <= p <= fset.b:
        raise DomainError(f"base point {p!r} lies outside {fset.interval}")
    base_mass = measure_cdf(fset, p, depth) if p != fset.a else Fraction(0)
    return Staircase(fset, p, gamma(fset.alpha + 1.0), 1.0, depth, base_mass)


def measure_cdf(fset: FractalSet, t, depth: int = DEFAULT_RECURSION_DEPTH) -> Fraction:
    """μ(F ∩ [a, t]) as an exact dyadic rational, truncated after ``depth`` levels.

    Truncation leaves an error below 2**-depth.  Points in a gap, or exactly on
    a pre-fractal endpoint, terminate early with the exact value.
    """
    a, b = fset.exact_interval
    T = as_exact(t)
    if T <= a:
        return Fraction(0)
    if T >= b:
        return Fraction(1)
    u = (T - a) / (b - a)
    r = fset.exact_ratio
    q = 1 - r
    num = 0
    for k in range(depth):
        num <<= 1
        if u < r:
            u = u / r
            if u == 0:
                return Fraction(num, 1 << (k + 1))
        elif u <= q:
            # central gap (closed): the whole left child lies below t
            return Fraction(num + 1, 1 << (k + 1))
        else:
            num += 1
            u = (u - q) / r
            if u == 0:
                return Fraction(num, 1 << (k + 1))
    return Fraction(num, 1 << depth)


def staircase_eval(st: Staircase, t) -> float:
    """S(t); values outside [a, b] clamp to the endpoint values."""
    mass = measure_cdf(st.set, t, st.depth)
    return st.gamma_factor * float(mass - st._base_mass)


def staircase_values(st: Staircase, ts) -> np.ndarray:
    return np.array([staircase_eval(st, t) for t in np.atleast_1d(ts)], dtype=float)


def staircase_at_point(st: Staircase, point: FractalPoint) -> float:
    """S at a pre-fractal endpoint, using its known mass when available."""
    if point.mass is None:
        return staircase_eval(st, point.exact)
    return st.gamma_factor * float(point.mass - st._base_mass)


def hausdorff_cover_estimate(fset: FractalSet, t: float, depth: int) -> float:
    """Covering sum Σ (len I)^α over depth-n intervals meeting [a, t].

    Normalized by (b - a)^α so the whole set has measure 1.  Each interval
    contributes 2**-n, so the estimate is within 2**(1-n) of μ([a, t]).
    """
    depth = _check_depth(depth)
    if depth < 1:
        raise DomainError("hausdorff_cover_estimate needs depth >= 1")
    if 2**depth > ENUMERATION_CAP:
        raise ResourceError(f"depth {depth} exceeds the enumeration cap {ENUMERATION_CAP}")
    pf = prefractal(fset, depth)
    t = float(t)
    if t < fset.a:
        return 0.0
    hit = pf.intervals[pf.intervals[:, 0] <= t]
    lengths = (hit[:, 1] - hit[:, 0]) / fset.width
    return math.fsum(lengths**fset.alpha)


def staircase_inverse(st: Staircase, s: float, depth: int | None = None) -> Fraction:
    """Smallest t with S(t) >= s, as an exact rational.

    Built digit by digit from the binary expansion of the target mass, taking
    the expansion that ends in ones at dyadic masses; that choice lands on the
    left edge of a gap rather than inside it.  The result is always a point of
    F (up to the truncation width r**depth).
    """
    depth = st.depth if depth is None else depth
    s_exact = Fraction(float(s))
    lo, hi = Fraction(st.s_min), Fraction(st.s_max)
    if not lo <= s_exact <= hi:
        raise DomainError(f"s={s!r} lies outside the staircase image [{st.s_min}, {st.s_max}]")
    m = s_exact / Fraction(st.gamma_factor) + st._base_mass
    m = min(max(m, Fraction(0)), Fraction(1))
    fset = st.set
    a, b = fset.exact_interval
    r = fset.exact_ratio
    left = Fraction(0)
    width = Fraction(1)
    for _ in range(depth):
        if m == 0:
            break
        if m == 1:
            left += width
            break
        parent = width
        width = parent * r
        if m > Fraction(1, 2):
            left += parent - width
            m = 2 * m - 1
        else:
            m = 2 * m
    return a + (b - a) * left
