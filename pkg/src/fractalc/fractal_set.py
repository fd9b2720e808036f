"""Two-map symmetric Cantor-like sets in an interval [a, b].

The set is the attractor of ``x -> a + r(x - a)`` and ``x -> b - r(b - x)``.
Membership and addresses are computed by exact digit descent on rationals:
float inputs are read as the simplest rational that rounds to the same double
(see :func:`as_exact`), so ``2/9`` typed as a float is recognised as the
depth-2 endpoint it denotes.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, InsufficientNeighborsError, ResourceError

DEFAULT_MAX_DEPTH = 48
ENUMERATION_CAP = 2**24
# largest denominator tried when snapping a float to a rational
SNAP_DENOMINATOR = 10**12


def max_depth() -> int:
    """Depth cap, overridable through ``FRACTALC_MAX_DEPTH``."""
    raw = os.environ.get("FRACTALC_MAX_DEPTH")
    if raw is None:
        return DEFAULT_MAX_DEPTH
    try:
        value = int(raw)
    except ValueError:
        raise DomainError(f"FRACTALC_MAX_DEPTH must be an integer, got {raw!r}") from None
    if value < 0:
        raise DomainError(f"FRACTALC_MAX_DEPTH must be nonnegative, got {value}")
    return value


def as_exact(x) -> Fraction:
    """Exact rational for ``x``.

    Fractions and ints pass through.  A float becomes the rational with the
    smallest denominator (up to ``SNAP_DENOMINATOR``) that rounds to it, and
    falls back to the float's exact binary value otherwise.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    xf = float(x)
    if not math.isfinite(xf):
        raise DomainError(f"non-finite coordinate {x!r}")
    exact = Fraction(xf)
    snapped = exact.limit_denominator(SNAP_DENOMINATOR)
    return snapped if float(snapped) == xf else exact


@dataclass(frozen=True)
class FractalSet:
    ratio: float
    interval: tuple[float, float] = (0.0, 1.0)
    alpha: float = field(init=False)
    exact_ratio: Fraction = field(init=False, repr=False, compare=False)
    exact_interval: tuple[Fraction, Fraction] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        r = float(self.ratio)
        if not (0.0 < r <= 0.5) or not math.isfinite(r):
            raise DomainError(f"ratio must lie in (0, 1/2], got {self.ratio!r}")
        a, b = (float(v) for v in self.interval)
        if not (math.isfinite(a) and math.isfinite(b)) or not a < b:
            raise DomainError(f"interval must satisfy a < b, got {self.interval!r}")
        object.__setattr__(self, "interval", (a, b))
        object.__setattr__(self, "exact_ratio", as_exact(self.ratio))
        object.__setattr__(self, "exact_interval", (as_exact(a), as_exact(b)))
        alpha = 1.0 if self.exact_ratio == Fraction(1, 2) else math.log(2.0) / math.log(1.0 / r)
        object.__setattr__(self, "alpha", alpha)

    @property
    def a(self) -> float:
        return self.interval[0]

    @property
    def b(self) -> float:
        return self.interval[1]

    @property
    def width(self) -> float:
        return self.interval[1] - self.interval[0]


@dataclass(frozen=True)
class PreFractal:
    """The 2**depth closed intervals of the depth-n approximation, sorted."""

    depth: int
    intervals: np.ndarray  # shape (2**depth, 2): columns left, right

    def __len__(self) -> int:
        return len(self.intervals)

    @property
    def total_length(self) -> float:
        return float(np.sum(self.intervals[:, 1] - self.intervals[:, 0]))


@dataclass(frozen=True)
class FractalPoint:
    """A point certified to lie in an interval of the depth-`depth` pre-fractal.

    ``exact`` is the rational coordinate; ``mass`` is the normalized measure of
    ``F ∩ [a, t]`` when the point is a pre-fractal endpoint (None otherwise).
    """

    t: float
    depth: int
    exact: Fraction = field(repr=False)
    index: int = field(default=-1, repr=False)
    mass: Fraction | None = field(default=None, repr=False)


def make_set(ratio: float = 1 / 3, interval: tuple[float, float] = (0.0, 1.0)) -> FractalSet:
    return FractalSet(ratio, tuple(interval))


def set_from_alpha(alpha: float, interval: tuple[float, float] = (0.0, 1.0)) -> FractalSet:
    """Two-map symmetric set of similarity dimension ``alpha`` (r = 2**(-1/alpha))."""
    if not (0.0 < alpha <= 1.0):
        raise DomainError(f"alpha must lie in (0, 1], got {alpha!r}")
    return FractalSet(2.0 ** (-1.0 / alpha), tuple(interval))


def _check_depth(depth: int, cap: int | None = None) -> int:
    if isinstance(depth, bool) or int(depth) != depth or depth < 0:
        raise DomainError(f"depth must be a nonnegative integer, got {depth!r}")
    limit = max_depth() if cap is None else cap
    if depth > limit:
        raise DomainError(f"depth {depth} exceeds the configured maximum {limit}")
    return int(depth)


def prefractal(fset: FractalSet, depth: int) -> PreFractal:
    depth = _check_depth(depth)
    if 2**depth > ENUMERATION_CAP:
        raise ResourceError(
            f"depth {depth} gives 2**{depth} intervals, above the cap {ENUMERATION_CAP}; "
            "use contains() for membership instead"
        )
    r = fset.ratio
    lefts = np.array([fset.a])
    width = fset.width
    for _ in range(depth):
        lefts = np.column_stack((lefts, lefts + (1.0 - r) * width)).ravel()
        width *= r
    return PreFractal(depth, np.column_stack((lefts, lefts + width)))


def _normalize(fset: FractalSet, t) -> Fraction:
    a, b = fset.exact_interval
    return (as_exact(t) - a) / (b - a)


def _descend(fset: FractalSet, u: Fraction, depth: int) -> int | None:
    """Index of the depth-`depth` interval holding normalized coordinate u.

    Returns None when u falls in a gap or outside [0, 1].  At the touching
    point of the ratio-1/2 set the left interval wins.
    """
    if u < 0 or u > 1:
        return None
    r = fset.exact_ratio
    q = 1 - r
    index = 0
    for k in range(depth):
        if u == 0:
            return index << (depth - k)
        if u == 1:
            return ((index + 1) << (depth - k)) - 1
        if u <= r:
            index <<= 1
            u = u / r
        elif u >= q:
            index = (index << 1) | 1
            u = (u - q) / r
        else:
            return None
    return index


def interval_index(fset: FractalSet, t, depth: int) -> int | None:
    """Position of the depth-n interval containing t, or None."""
    depth = _check_depth(depth)
    return _descend(fset, _normalize(fset, t), depth)


def contains(fset: FractalSet, t, depth: int) -> bool:
    depth = _check_depth(depth)
    try:
        u = _normalize(fset, t)
    except DomainError:
        return False
    return _descend(fset, u, depth) is not None


def interval_bounds(fset: FractalSet, depth: int, index: int) -> tuple[Fraction, Fraction]:
    """Exact [left, right] of interval ``index`` at ``depth``."""
    if not 0 <= index < 2**depth:
        raise DomainError(f"index {index} out of range for depth {depth}")
    a, b = fset.exact_interval
    r = fset.exact_ratio
    p, q = r.numerator, r.denominator
    # integer numerators over q**depth; one normalization at the end
    num = 0
    p_pow = 1
    q_pows = [q**k for k in range(depth)]
    for level in range(depth):
        if (index >> (depth - 1 - level)) & 1:
            num += (q - p) * p_pow * q_pows[depth - 1 - level]
        p_pow *= p
    den = q**depth
    w = b - a
    return a + w * Fraction(num, den), a + w * Fraction(num + p_pow, den)


def endpoint(fset: FractalSet, depth: int, index: int, side: int) -> FractalPoint:
    """Left (side=0) or right (side=1) endpoint of interval ``index``."""
    lo, hi = interval_bounds(fset, depth, index)
    exact = hi if side else lo
    mass = Fraction(index + side, 2**depth)
    return FractalPoint(float(exact), depth, exact, index, mass)


def _endpoint_count(fset: FractalSet, depth: int) -> int:
    if fset.exact_ratio == Fraction(1, 2):
        return 2**depth + 1
    return 2 ** (depth + 1)


def nearest_fractal_neighbors(fset: FractalSet, t, depth: int, count: int) -> list[FractalPoint]:
    """The ``count`` depth-n endpoints closest to t (t itself excluded).

    Ties are broken toward the smaller coordinate.
    """
    depth = _check_depth(depth)
    if count < 1:
        raise DomainError(f"count must be positive, got {count}")
    texact = as_exact(t)
    idx = _descend(fset, _normalize(fset, texact), depth)
    if idx is None:
        raise DomainError(f"t={float(texact)!r} is not in the depth-{depth} pre-fractal")
    available = _endpoint_count(fset, depth) - (1 if _is_endpoint(fset, texact, depth, idx) else 0)
    if available < count:
        raise InsufficientNeighborsError(
            f"only {available} endpoints besides t exist at depth {depth}, asked for {count}"
        )
    lo = max(0, idx - count - 1)
    hi = min(2**depth - 1, idx + count + 1)
    seen: dict[Fraction, FractalPoint] = {}
    for i in range(lo, hi + 1):
        for side in (0, 1):
            p = endpoint(fset, depth, i, side)
            if p.exact != texact and p.exact not in seen:
                seen[p.exact] = p
    ranked = sorted(seen.values(), key=lambda p: (abs(p.exact - texact), p.exact))
    return ranked[:count]


def _is_endpoint(fset: FractalSet, texact: Fraction, depth: int, idx: int) -> bool:
    lo, hi = interval_bounds(fset, depth, idx)
    return texact in (lo, hi)


def bracketing_neighbors(fset: FractalSet, t, depth: int) -> tuple[FractalPoint | None, FractalPoint | None]:
    """Nearest depth-n endpoints strictly below and strictly above t."""
    texact = as_exact(t)
    idx = _descend(fset, _normalize(fset, texact), _check_depth(depth))
    if idx is None:
        raise DomainError(f"t={float(texact)!r} is not in the depth-{depth} pre-fractal")
    below = above = None
    for i in range(max(0, idx - 2), min(2**depth - 1, idx + 2) + 1):
        for side in (0, 1):
            p = endpoint(fset, depth, i, side)
            if p.exact < texact and (below is None or p.exact > below.exact):
                below = p
            elif p.exact > texact and (above is None or p.exact < above.exact):
                above = p
    return below, above


def sample_fractal_points(
    fset: FractalSet,
    depth: int,
    samples: int,
    rng: np.random.Generator | None = None,
) -> list[FractalPoint]:
    """Depth-n pre-fractal endpoints chosen uniformly by index.

    Without ``rng`` the indices are evenly spaced (deterministic); with one
    they are drawn without replacement.  Endpoints are enumerated left to
    right as (interval 0 left, interval 0 right, interval 1 left, ...).
    """
    depth = _check_depth(depth)
    if samples < 1:
        raise DomainError(f"samples must be at least 1, got {samples}")
    n_end = 2 ** (depth + 1)
    if rng is None:
        ks = np.unique(np.round(np.linspace(0, n_end - 1, min(samples, n_end))).astype(np.int64))
        ks = [int(k) for k in ks]
    else:
        ks = sorted(int(k) for k in rng.choice(n_end, size=min(samples, n_end), replace=False))
    return [endpoint(fset, depth, k >> 1, k & 1) for k in ks]


def box_counting_dimension(fset: FractalSet, depth: int = 10, scales: Sequence[int] | None = None) -> float:
    """Least-squares box-counting estimate of the dimension.

    Counts dyadic boxes of side 2**-j (j in ``scales``) meeting the depth-n
    pre-fractal.  The boxes are not aligned with the IFS, so this is an
    independent check on ``alpha``.
    """
    pf = prefractal(fset, depth)
    finest = fset.width * fset.ratio**depth
    if scales is None:
        jmax = int(math.floor(-math.log2(finest / fset.width))) - 1
        scales = range(2, max(jmax, 4))
    u = (pf.intervals - fset.a) / fset.width
    logs_inv_eps, logs_n = [], []
    for j in scales:
        n = 2**j
        first = np.floor(u[:, 0] * n).astype(np.int64)
        last = np.minimum(np.floor(u[:, 1] * n).astype(np.int64), n - 1)
        boxes: set[int] = set()
        for f0, l0 in zip(first.tolist(), last.tolist()):
            boxes.update(range(f0, l0 + 1))
        logs_inv_eps.append(j * math.log(2.0))
        logs_n.append(math.log(len(boxes)))
    slope, _ = np.polyfit(logs_inv_eps, logs_n, 1)
    return float(slope)


def is_sorted_disjoint(intervals: Iterable[Sequence[float]], touching_ok: bool) -> bool:
    prev_hi = -math.inf
    for lo, hi in intervals:
        if lo > hi or lo < prev_hi or (lo == prev_hi and not touching_ok):
            return False
        prev_hi = hi
    return True
