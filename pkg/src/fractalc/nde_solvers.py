"""Solvers for fractal differential equations in the staircase coordinate.

Because D_F acts on g(S(t)) as d/ds on F, each equation class below becomes an
ordinary differential equation in s.  Solutions are returned as FnOfS so they
can be evaluated at fractal points t directly.
"""

from __future__ import annotations

import bisect
import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from numpy.polynomial import legendre
from scipy import interpolate, optimize

from .errors import (
    BlowUpError,
    DomainError,
    InvalidParticularError,
    OverflowGuardError,
    StepSizeError,
    ZeroCrossingError,
)
from .fractal_ops import FnOfS, ResidualReport, residual_check
from .staircase import Staircase

BLOW_UP = 1e12
RK4_STABILITY = 2.785  # real-axis stability bound of classical RK4
STEPS_PER_UNIT = 10_000
LINEAR_CELLS_PER_UNIT = 2_000
EXP_GUARD = 700.0
ANALYTIC_THRESHOLD = 1e-9


class Kind(str, enum.Enum):
    SUBSTITUTION1 = "Substitution1"
    SUBSTITUTION2 = "Substitution2"
    RICCATI = "Riccati"
    BERNOULLI = "Bernoulli"
    LINEAR_FIRST_ORDER = "LinearFirstOrder"
    SECOND_ORDER_LINEAR = "SecondOrderLinear"
    SEPARABLE = "Separable"


_ROLES = {
    Kind.SUBSTITUTION1: (),
    Kind.SUBSTITUTION2: (),
    Kind.RICCATI: ("a", "b", "c"),
    Kind.BERNOULLI: ("P", "Q"),
    Kind.LINEAR_FIRST_ORDER: ("P", "Q"),
    Kind.SECOND_ORDER_LINEAR: ("p", "q"),
    Kind.SEPARABLE: ("k",),
}


@dataclass(frozen=True)
class FdeProblem:
    """One fractal differential equation, written in the s-coordinate.

    Substitution1: y' = g(y/s).  Substitution2: y' = g(a s + b y) with scalar
    params a, b.  Riccati: y' = a y + b y² + c.  Bernoulli: y' = P y + Q y².
    LinearFirstOrder: y' = P y + Q.  SecondOrderLinear: y'' = p y' + q y.
    Separable: y' = h(y) k(s) with h given as ``rhs``.
    """

    kind: Kind
    staircase: Staircase
    coefficients: Mapping[str, FnOfS] = field(default_factory=dict)
    rhs: Callable[[float], float] | None = None
    params: Mapping[str, float] = field(default_factory=dict)
    domain_s: tuple[float, float] | None = None
    exclusions: tuple[float, ...] = ()
    label: str = ""
    closed_form: Callable[[Mapping[str, float]], FnOfS] | None = field(default=None, compare=False)

    def __post_init__(self):
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        missing = [r for r in _ROLES[kind] if r not in self.coefficients]
        if missing:
            raise DomainError(f"{kind.value} problem is missing coefficients {missing}")
        if kind in (Kind.SUBSTITUTION1, Kind.SUBSTITUTION2, Kind.SEPARABLE) and self.rhs is None:
            raise DomainError(f"{kind.value} problem needs an rhs map")
        if kind is Kind.SUBSTITUTION2:
            a, b = self.params.get("a", 0.0), self.params.get("b", 0.0)
            if a == 0.0 and b == 0.0:
                raise DomainError("Substitution2 needs a != 0 or b != 0")
        if self.domain_s is None:
            object.__setattr__(self, "domain_s", (self.staircase.s_min, self.staircase.s_max))
        lo, hi = self.domain_s
        if not lo < hi:
            raise DomainError(f"domain_s must be a nondegenerate interval, got {self.domain_s}")
        coeffs = {r: c.with_staircase(self.staircase) for r, c in self.coefficients.items()}
        object.__setattr__(self, "coefficients", coeffs)
        if kind is Kind.RICCATI and _identically_zero(coeffs["b"], self.domain_s):
            raise DomainError(
                "Riccati coefficient b is identically zero; the equation is linear, use the linear solver"
            )

    @property
    def set(self):
        return self.staircase.set

    def coefficient(self, role: str) -> FnOfS:
        return self.coefficients[role]

    def residual_at(self, y: FnOfS, s: float) -> float:
        kind = self.kind
        c = self.coefficients
        if kind is Kind.SECOND_ORDER_LINEAR:
            return y.d2(s) - (c["p"].value(s) * y.d1(s) + c["q"].value(s) * y.value(s))
        dy = y.d1(s)
        yv = y.value(s)
        if kind is Kind.SUBSTITUTION1:
            return dy - self.rhs(yv / s)
        if kind is Kind.SUBSTITUTION2:
            return dy - self.rhs(self.params["a"] * s + self.params["b"] * yv)
        if kind is Kind.RICCATI:
            return dy - (c["a"].value(s) * yv + c["b"].value(s) * yv * yv + c["c"].value(s))
        if kind is Kind.BERNOULLI:
            return dy - (c["P"].value(s) * yv + c["Q"].value(s) * yv * yv)
        if kind is Kind.LINEAR_FIRST_ORDER:
            return dy - (c["P"].value(s) * yv + c["Q"].value(s))
        return dy - self.rhs(yv) * c["k"].value(s)

    def default_grid(self, steps_per_unit: int = STEPS_PER_UNIT) -> np.ndarray:
        lo, hi = self.domain_s
        n = max(8, int(math.ceil(steps_per_unit * (hi - lo))))
        return np.linspace(lo, hi, n + 1)


@dataclass(frozen=True)
class FdeSolution:
    solution: FnOfS
    constants: dict[str, float]
    method: str
    residual: ResidualReport | None = None
    poles: tuple[float, ...] = ()


def _identically_zero(fn: FnOfS, domain: tuple[float, float]) -> bool:
    lo, hi = domain
    for s in np.linspace(lo, hi, 33)[1:-1]:
        try:
            if fn.value(float(s)) != 0.0:
                return False
        except ArithmeticError:
            return False
    return True


def _as_profile(fn) -> Callable[[float], float]:
    if isinstance(fn, FnOfS):
        return fn.profile
    if callable(fn):
        return fn
    value = float(fn)
    return lambda s: value


def _vectorized(fn: Callable) -> Callable[[np.ndarray], np.ndarray]:
    def call(x: np.ndarray) -> np.ndarray:
        try:
            out = np.asarray(fn(x), dtype=float)
            if out.shape == np.shape(x):
                return out
        except (TypeError, ValueError):
            pass
        flat = np.array([float(fn(float(v))) for v in np.ravel(x)])
        return flat.reshape(np.shape(x))

    return call


# -- fixed-step RK4 -----------------------------------------------------------


def rk4(f: Callable[[float, float], float], z0: float, s_grid: Sequence[float], check_stability: bool = True) -> np.ndarray:
    """Classical RK4 on the given (possibly decreasing) grid."""
    grid = np.asarray(s_grid, dtype=float)
    z = np.empty_like(grid)
    z[0] = z0
    zk = float(z0)
    for i in range(len(grid) - 1):
        s, h = grid[i], grid[i + 1] - grid[i]
        k1 = f(s, zk)
        if check_stability:
            dz = 1e-7 * max(1.0, abs(zk))
            lip = abs(f(s, zk + dz) - k1) / dz
            if abs(h) * lip > RK4_STABILITY:
                raise StepSizeError(
                    f"step {abs(h):.3g} at s={s:.6g} exceeds the RK4 stability bound "
                    f"(local Lipschitz estimate {lip:.3g})"
                )
        k2 = f(s + h / 2, zk + h * k1 / 2)
        k3 = f(s + h / 2, zk + h * k2 / 2)
        k4 = f(s + h, zk + h * k3)
        zk = zk + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6
        if not math.isfinite(zk) or abs(zk) > BLOW_UP:
            raise BlowUpError(f"solution exceeded {BLOW_UP:g} near s={grid[i + 1]:.6g}", float(grid[i + 1]))
        z[i + 1] = zk
    return z


def _split_grid(s0: float, s_grid: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    grid = np.asarray(s_grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 2:
        raise DomainError("s_grid needs at least two points")
    if np.any(np.diff(grid) <= 0):
        raise DomainError("s_grid must be strictly increasing")
    forward = np.concatenate(([s0], grid[grid > s0]))
    backward = np.concatenate(([s0], grid[grid < s0][::-1]))
    return forward, backward


def _ode_on_grid(f, z0: float, s0: float, s_grid) -> tuple[np.ndarray, np.ndarray]:
    forward, backward = _split_grid(s0, s_grid)
    zf = rk4(f, z0, forward) if len(forward) > 1 else np.array([z0])
    zb = rk4(f, z0, backward) if len(backward) > 1 else np.array([z0])
    s = np.concatenate((backward[::-1], forward[1:]))
    z = np.concatenate((zb[::-1], zf[1:]))
    return s, z


def _hermite_fn(s: np.ndarray, z: np.ndarray, slopes: np.ndarray, st: Staircase | None, label: str) -> FnOfS:
    spline = interpolate.CubicHermiteSpline(s, z, slopes, extrapolate=True)
    d1 = spline.derivative()
    d2 = spline.derivative(2)
    return FnOfS(lambda x: float(spline(x)), lambda x: float(d1(x)), st, lambda x: float(d2(x)), label=label)


def solve_separable(
    h: Callable[[float], float],
    k: Callable[[float], float],
    z0: float,
    s0: float,
    s_grid: Sequence[float],
    staircase: Staircase | None = None,
) -> FnOfS:
    """dz/ds = h(z)·k(s), z(s0) = z0, by RK4 on ``s_grid``.

    The result interpolates the nodes with cubic Hermite pieces whose slopes
    come from the equation itself.
    """
    hp, kp = _as_profile(h), _as_profile(k)

    def f(s, z):
        return hp(z) * kp(s)

    s, z = _ode_on_grid(f, float(z0), float(s0), s_grid)
    slopes = np.array([f(si, zi) for si, zi in zip(s, z)])
    return _hermite_fn(s, z, slopes, staircase, "separable")


def rk4_convergence(f, z0: float, s0: float, s1: float, exact: Callable[[float], float], n: int) -> tuple[float, float, float]:
    """Endpoint errors at n and 2n steps and their ratio."""
    e1 = abs(rk4(f, z0, np.linspace(s0, s1, n + 1))[-1] - exact(s1))
    e2 = abs(rk4(f, z0, np.linspace(s0, s1, 2 * n + 1))[-1] - exact(s1))
    return e1, e2, e1 / e2 if e2 > 0 else math.inf


# -- substitution classes -----------------------------------------------------


def _residual(problem: FdeProblem, y: FnOfS, depth: int, samples: int) -> ResidualReport:
    return residual_check(problem, y, depth=depth, samples=samples)


def _initial_from(problem: FdeProblem, constant, initial) -> tuple[float, float]:
    lo = problem.domain_s[0]
    if initial is not None:
        s0, y0 = initial
        return float(s0), float(y0)
    if problem.closed_form is None:
        raise DomainError(f"{problem.label or problem.kind.value}: numeric route needs initial=(s0, y0)")
    return lo, problem.closed_form(_constants(problem, constant)).value(lo)


def _constants(problem: FdeProblem, constant) -> dict[str, float]:
    if constant is None:
        return {}
    if isinstance(constant, Mapping):
        return dict(constant)
    return {"c": float(constant)}


def solve_substitution1(
    problem: FdeProblem,
    constant=None,
    *,
    method: str = "auto",
    initial: tuple[float, float] | None = None,
    steps_per_unit: int = STEPS_PER_UNIT,
    depth: int = 24,
    samples: int = 512,
) -> FdeSolution:
    """y' = g(y/s) via y = s·z, which leaves s z' + z = g(z)."""
    if problem.kind is not Kind.SUBSTITUTION1:
        raise DomainError(f"expected a Substitution1 problem, got {problem.kind.value}")
    lo, hi = problem.domain_s
    if lo <= 0.0:
        raise DomainError(f"Substitution1 divides by s; domain_s must start above 0, got {lo}")
    consts = _constants(problem, constant)
    if method in ("auto", "closed") and problem.closed_form is not None and initial is None:
        y = problem.closed_form(consts)
        return FdeSolution(y, consts, "Sub1", _residual(problem, y, depth, samples))
    if method == "closed":
        raise DomainError("no closed form is attached to this problem")
    s0, y0 = _initial_from(problem, constant, initial)
    if s0 <= 0.0:
        raise DomainError(f"initial point s0={s0} must be positive")
    g = problem.rhs
    z = solve_separable(lambda w: g(w) - w, lambda s: 1.0 / s, y0 / s0, s0, problem.default_grid(steps_per_unit))
    y = FnOfS(
        lambda s: s * z.value(s),
        lambda s: z.value(s) + s * z.d1(s),
        problem.staircase,
        label=f"s*z[{problem.label}]",
    )
    return FdeSolution(y, {"s0": s0, "y0": y0}, "Sub1-numeric", _residual(problem, y, depth, samples))


def solve_substitution2(
    problem: FdeProblem,
    constant=None,
    *,
    method: str = "auto",
    initial: tuple[float, float] | None = None,
    steps_per_unit: int = STEPS_PER_UNIT,
    depth: int = 24,
    samples: int = 512,
) -> FdeSolution:
    """y' = g(a s + b y) via z = a s + b y, which leaves z' = a + b g(z)."""
    if problem.kind is not Kind.SUBSTITUTION2:
        raise DomainError(f"expected a Substitution2 problem, got {problem.kind.value}")
    a, b = problem.params["a"], problem.params["b"]
    if b == 0.0:
        raise DomainError("b must be nonzero to recover y = (z - a s)/b")
    consts = _constants(problem, constant)
    if method in ("auto", "closed") and problem.closed_form is not None and initial is None:
        y = problem.closed_form(consts)
        return FdeSolution(y, consts, "Sub2", _residual(problem, y, depth, samples))
    if method == "closed":
        raise DomainError("no closed form is attached to this problem")
    s0, y0 = _initial_from(problem, constant, initial)
    g = problem.rhs
    z = solve_separable(lambda w: a + b * g(w), 1.0, a * s0 + b * y0, s0, problem.default_grid(steps_per_unit))
    y = FnOfS(
        lambda s: (z.value(s) - a * s) / b,
        lambda s: (z.d1(s) - a) / b,
        problem.staircase,
        label=f"(z-as)/b[{problem.label}]",
    )
    return FdeSolution(y, {"s0": s0, "y0": y0}, "Sub2-numeric", _residual(problem, y, depth, samples))


# -- linear and Bernoulli -----------------------------------------------------

_GL_N = 12
_GL_X, _GL_W = legendre.leggauss(_GL_N)
_GL_VANDER = legendre.legvander(_GL_X, _GL_N - 1)
_GL_VANDER_INT = legendre.legvander(_GL_X, _GL_N)
# row k holds the power-basis coefficients of the Legendre polynomial L_k
_LEG2POW = np.array([np.pad(legendre.leg2poly(np.eye(_GL_N + 1)[k]), (0, _GL_N - k)) for k in range(_GL_N + 1)])


def _power_eval(xi, coef: np.ndarray):
    """Σ coef[j] ξ^j for ξ in [-1, 1]; at degree 12 the monomial basis costs under three digits."""
    xi = np.asarray(xi, dtype=float)
    return (xi[..., None] ** np.arange(len(coef))) @ coef


class _IntegratingFactor:
    """v(s) = e^{I(s)} (v0 + ∫_{s0}^{s} e^{-I} Q),  I(s) = ∫_{s0}^{s} P.

    P and Q are sampled once at 12 Gauss-Legendre nodes per grid cell and
    kept as per-cell Legendre series (exact for degree 11), so evaluating v
    never calls back into the coefficient profiles.  Node values of I and J
    accumulate cell by cell; off-node values integrate from the cell's left
    node.  Both are smooth in s, so finite differences of v stay clean.
    """

    def __init__(self, P, Q, v0: float, s0: float, s_grid):
        grid = np.asarray(s_grid, dtype=float)
        if np.any(np.diff(grid) <= 0):
            raise DomainError("s_grid must be strictly increasing")
        if not np.any(grid == s0):
            grid = np.sort(np.append(grid, s0))
        self.P = _vectorized(_as_profile(P))
        self.Q = _vectorized(_as_profile(Q))
        self.v0 = float(v0)
        self.grid = grid
        self.grid_list = grid.tolist()
        j0 = int(np.searchsorted(grid, s0))
        lo, hi = grid[:-1], grid[1:]
        self.mid, self.half = (hi + lo) / 2, (hi - lo) / 2
        x = self.mid[:, None] + self.half[:, None] * _GL_X
        P_nodes, Q_nodes = self.P(x), self.Q(x)
        to_series = _GL_VANDER * _GL_W[:, None] * (np.arange(_GL_N) + 0.5)
        # antiderivative of P on ξ ∈ [-1, 1], zero at ξ = -1, as power-basis coefficients
        I_series = legendre.legint(P_nodes @ to_series, lbnd=-1, axis=1)
        self.I_power = I_series @ _LEG2POW[: _GL_N + 1, : _GL_N + 1]
        self.Q_power = (Q_nodes @ to_series) @ _LEG2POW[:_GL_N, :_GL_N]
        dI = self.half * (P_nodes @ _GL_W)
        I_nodes = self._accumulate(dI, j0)
        if np.max(np.abs(I_nodes)) > EXP_GUARD:
            k = int(np.argmax(np.abs(I_nodes)))
            raise OverflowGuardError(
                f"integrating factor exponent reaches {I_nodes[k]:.3g} at s={grid[k]:.6g} (guard {EXP_GUARD})"
            )
        self.I_nodes = I_nodes
        I_at_x = I_nodes[:-1, None] + self.half[:, None] * (I_series @ _GL_VANDER_INT.T)
        dJ = self.half * ((np.exp(-I_at_x) * Q_nodes) @ _GL_W)
        self.J_nodes = self._accumulate(dJ, j0)

    @staticmethod
    def _accumulate(cell: np.ndarray, j0: int) -> np.ndarray:
        out = np.zeros(len(cell) + 1)
        out[j0 + 1:] = np.cumsum(cell[j0:])
        if j0 > 0:
            out[:j0] = -np.cumsum(cell[:j0][::-1])[::-1]
        return out

    def _cell(self, s: float) -> int:
        k = bisect.bisect_right(self.grid_list, s) - 1
        return min(max(k, 0), len(self.grid_list) - 2)

    def _local_I(self, k: int, x):
        xi = (x - self.mid[k]) / self.half[k]
        return self.I_nodes[k] + self.half[k] * _power_eval(xi, self.I_power[k])

    def I(self, s: float) -> float:
        k = self._cell(s)
        if not self.grid[0] <= s <= self.grid[-1]:
            mid, half = (self.grid[k] + s) / 2, (s - self.grid[k]) / 2
            return float(self.I_nodes[k] + half * np.dot(_GL_W, self.P(mid + half * _GL_X)))
        return float(self._local_I(k, s))

    def __call__(self, s: float) -> float:
        k = self._cell(s)
        base = self.grid[k]
        mid, half = (base + s) / 2, (s - base) / 2
        x = mid + half * _GL_X
        if self.grid[0] <= s <= self.grid[-1]:
            I_x = self._local_I(k, x)
            Q_x = _power_eval((x - self.mid[k]) / self.half[k], self.Q_power[k])
        else:
            # extrapolation: integrate the true profiles from the end node
            I_x = np.array([self.I(float(xi)) for xi in x])
            Q_x = self.Q(x)
        J = self.J_nodes[k] + half * np.dot(_GL_W, np.exp(-I_x) * Q_x)
        return float(np.exp(self.I(s)) * (self.v0 + J))


def solve_linear_first_order(P, Q, v0: float, s0: float, s_grid: Sequence[float], staircase: Staircase | None = None) -> FnOfS:
    """v' = P(s) v + Q(s), v(s0) = v0, by the integrating factor."""
    factor = _IntegratingFactor(P, Q, v0, float(s0), s_grid)
    return FnOfS(factor, None, staircase, label="linear")


def _sign_changes(fn: Callable[[float], float], grid: np.ndarray) -> list[float]:
    vals = np.array([fn(float(s)) for s in grid])
    roots = []
    for i in range(len(grid) - 1):
        if vals[i] == 0.0:
            roots.append(float(grid[i]))
        elif vals[i] * vals[i + 1] < 0.0:
            roots.append(float(optimize.brentq(fn, grid[i], grid[i + 1], xtol=1e-15)))
    if vals[-1] == 0.0:
        roots.append(float(grid[-1]))
    return roots


def solve_bernoulli(P, Q, v0: float, s0: float, s_grid: Sequence[float], staircase: Staircase | None = None) -> FnOfS:
    """v' = P v + Q v² through w = 1/v, which is linear: w' = -P w - Q."""
    if v0 == 0.0:
        raise DomainError("Bernoulli substitution w = 1/v needs v0 != 0")
    Pp, Qp = _as_profile(P), _as_profile(Q)
    w = solve_linear_first_order(lambda s: -Pp(s), lambda s: -Qp(s), 1.0 / v0, s0, s_grid)
    grid = np.asarray(s_grid, dtype=float)
    zeros = _sign_changes(w.profile, grid)
    if zeros:
        raise ZeroCrossingError(f"v passes through 0 (w = 1/v crosses zero) near s={zeros[0]:.6g}", zeros[0])
    return FnOfS(lambda s: 1.0 / w.profile(s), None, staircase, label="bernoulli")


# -- Riccati routes -----------------------------------------------------------


def _check_particular(problem: FdeProblem, u: FnOfS, depth: int, samples: int) -> None:
    rep = residual_check(problem, u.with_staircase(problem.staircase), depth=depth, samples=samples)
    if not rep.passed(ANALYTIC_THRESHOLD):
        raise InvalidParticularError(
            f"particular solution {u.label or ''} has residual {rep.max_abs_residual:.3g} >= {ANALYTIC_THRESHOLD}"
        )


def _coefficient_singularities(problem: FdeProblem) -> tuple[float, ...]:
    pts = set()
    for c in problem.coefficients.values():
        pts.update(c.singular_points)
    return tuple(sorted(pts))


def _riccati_parts(problem: FdeProblem):
    if problem.kind is not Kind.RICCATI:
        raise DomainError(f"expected a Riccati problem, got {problem.kind.value}")
    c = problem.coefficients
    return c["a"], c["b"], c["c"]


def solve_riccati_prop1(
    problem: FdeProblem,
    particular: FnOfS,
    v0: float,
    *,
    s0: float | None = None,
    s_grid: Sequence[float] | None = None,
    depth: int = 24,
    samples: int = 512,
) -> FdeSolution:
    """y = u + v with v' = (a + 2bu) v + b v²."""
    a, b, _ = _riccati_parts(problem)
    _check_particular(problem, particular, depth, samples)
    s0 = problem.domain_s[0] if s0 is None else float(s0)
    grid = problem.default_grid(LINEAR_CELLS_PER_UNIT) if s_grid is None else s_grid
    u = particular
    v = solve_bernoulli(
        lambda s: a.profile(s) + 2.0 * b.profile(s) * u.profile(s), b.profile, v0, s0, grid, problem.staircase
    )
    y = FnOfS(
        lambda s: u.value(s) + v.value(s),
        None,
        problem.staircase,
        singular_points=_coefficient_singularities(problem),
        label=f"u+v[{problem.label}]",
    )
    return FdeSolution(y, {"v0": float(v0), "s0": s0}, "RiccatiProp1", _residual(problem, y, depth, samples))


def solve_riccati_prop2(
    problem: FdeProblem,
    particular: FnOfS,
    v0: float,
    *,
    s0: float | None = None,
    s_grid: Sequence[float] | None = None,
    depth: int = 24,
    samples: int = 512,
) -> FdeSolution:
    """y = u + 1/v with the linear equation v' = -(a + 2bu) v - b.

    Zeros of v are poles of y; they are reported on the solution rather than
    raised, so the rest of the domain stays usable.
    """
    a, b, _ = _riccati_parts(problem)
    _check_particular(problem, particular, depth, samples)
    s0 = problem.domain_s[0] if s0 is None else float(s0)
    grid = problem.default_grid(LINEAR_CELLS_PER_UNIT) if s_grid is None else np.asarray(s_grid, dtype=float)
    u = particular
    v = solve_linear_first_order(
        lambda s: -(a.profile(s) + 2.0 * b.profile(s) * u.profile(s)),
        lambda s: -b.profile(s),
        v0,
        s0,
        grid,
        problem.staircase,
    )
    poles = tuple(_sign_changes(v.profile, grid))
    y = FnOfS(
        lambda s: u.value(s) + 1.0 / v.profile(s),
        None,
        problem.staircase,
        singular_points=_coefficient_singularities(problem) + poles,
        label=f"u+1/v[{problem.label}]",
    )
    return FdeSolution(
        y, {"v0": float(v0), "s0": s0}, "RiccatiProp2", _residual(problem, y, depth, samples), poles
    )


def solve_riccati_prop3(
    problem: FdeProblem,
    z: FnOfS,
    *,
    depth: int = 24,
    samples: int = 512,
    scan_points: int = 2001,
) -> FdeSolution:
    """y = -z'/(b z) where z'' = (b'/b + a) z' - b c z.

    ``z`` must be a solution of that second-order equation (checked by
    residual); its zeros become poles of y.
    """
    a, b, c = _riccati_parts(problem)
    lo, hi = problem.domain_s
    probe = np.linspace(lo, hi, 65)[1:-1]
    if any(b.value(float(s)) <= 0.0 for s in probe):
        raise DomainError("Prop-3 route needs b > 0 on the domain")
    z = z.with_staircase(problem.staircase)
    if _identically_zero(z, problem.domain_s):
        raise DomainError("z must not vanish identically")
    reduced = FdeProblem(
        Kind.SECOND_ORDER_LINEAR,
        problem.staircase,
        {
            "p": FnOfS(lambda s: b.d1(s) / b.value(s) + a.value(s), label="b'/b+a"),
            "q": FnOfS(lambda s: -b.value(s) * c.value(s), label="-bc"),
        },
        domain_s=problem.domain_s,
        label=f"reduced[{problem.label}]",
    )
    grid = np.linspace(lo, hi, scan_points)
    poles = tuple(_sign_changes(z.profile, grid))
    z_check = FnOfS(z.profile, z.profile_derivative, z.staircase, z.profile_derivative2, z.singular_points + poles, z.label)
    rep = residual_check(reduced, z_check, depth=depth, samples=samples)
    if not rep.passed(1e-8):
        raise InvalidParticularError(f"z does not solve the reduced equation (residual {rep.max_abs_residual:.3g})")

    def y(s):
        return -z.d1(s) / (b.value(s) * z.value(s))

    dy = None
    if z.profile_derivative2 is not None and b.profile_derivative is not None:
        def dy(s):
            zv, z1, z2 = z.value(s), z.d1(s), z.d2(s)
            bv, b1 = b.value(s), b.d1(s)
            return (-z2 * bv * zv + z1 * (b1 * zv + bv * z1)) / (bv * zv) ** 2

    sing = _coefficient_singularities(problem) + poles
    sol = FnOfS(y, dy, problem.staircase, singular_points=sing, label=f"-z'/(bz)[{problem.label}]")
    return FdeSolution(sol, {}, "RiccatiProp3", _residual(problem, sol, depth, samples), poles)


def solve_second_order_constant(coeff0: float, z0: float, dz0: float, staircase: Staircase | None = None) -> FnOfS:
    """z'' + coeff0·z = 0 with z(0) = z0, z'(0) = dz0, in closed form."""
    k = float(coeff0)
    z0, dz0 = float(z0), float(dz0)
    if k > 0:
        w = math.sqrt(k)
        return FnOfS(
            lambda s: z0 * math.cos(w * s) + dz0 / w * math.sin(w * s),
            lambda s: -z0 * w * math.sin(w * s) + dz0 * math.cos(w * s),
            staircase,
            lambda s: -k * (z0 * math.cos(w * s) + dz0 / w * math.sin(w * s)),
            label=f"{z0}cos({w}s)+{dz0 / w}sin({w}s)",
        )
    if k < 0:
        w = math.sqrt(-k)
        return FnOfS(
            lambda s: z0 * math.cosh(w * s) + dz0 / w * math.sinh(w * s),
            lambda s: z0 * w * math.sinh(w * s) + dz0 * math.cosh(w * s),
            staircase,
            lambda s: -k * (z0 * math.cosh(w * s) + dz0 / w * math.sinh(w * s)),
            label=f"{z0}cosh({w}s)+{dz0 / w}sinh({w}s)",
        )
    return FnOfS(lambda s: z0 + dz0 * s, lambda s: dz0, staircase, lambda s: 0.0, label=f"{z0}+{dz0}s")
