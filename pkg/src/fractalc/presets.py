"""Worked-example equations with closed-form solutions, keyed by label.

Each preset stores its coefficients, closed-form solution and pole
denominator as s-expressions, so it round-trips through a flat key=value
config file.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np
from scipy import optimize

from . import nde_solvers as nde
from .errors import DomainError
from .fractal_ops import EPSILON_FRACTION, FnOfS, residual_check
from .fractal_set import FractalSet, make_set
from .sexpr import compile_expr, parse
from .staircase import Staircase, make_staircase

POLE_SCAN_POINTS = 4001


@dataclass(frozen=True)
class Preset:
    label: str
    kind: nde.Kind
    equation: str
    solution: str
    constants: Mapping[str, float]
    coefficients: Mapping[str, str] = field(default_factory=dict)
    rhs: str | None = None
    params: Mapping[str, float] = field(default_factory=dict)
    particular: str | None = None
    denominator: str | None = None
    singular_at_zero: bool = False
    route: str = "closed"
    ratio: float = 1 / 3
    epsilon_fraction: float = EPSILON_FRACTION

    def with_constants(self, **values: float) -> "Preset":
        unknown = set(values) - set(self.constants)
        if unknown:
            raise DomainError(f"preset {self.label} has no constants {sorted(unknown)}")
        return replace(self, constants={**self.constants, **{k: float(v) for k, v in values.items()}})

    def domain(self, st: Staircase) -> tuple[float, float]:
        lo = self.epsilon_fraction * st.gamma_factor if self.singular_at_zero else st.s_min
        return (max(lo, st.s_min), st.s_max)

    def poles(self, domain: tuple[float, float]) -> tuple[float, ...]:
        """Zeros of the solution's denominator inside ``domain``."""
        if self.denominator is None:
            return ()
        den = compile_expr(parse(self.denominator), "s", self.constants)
        lo, hi = domain
        grid = np.linspace(lo, hi, POLE_SCAN_POINTS)
        vals = np.asarray(den(grid), dtype=float)
        roots = [float(s) for s, v in zip(grid, vals) if v == 0.0]
        for i in np.nonzero(vals[:-1] * vals[1:] < 0.0)[0]:
            roots.append(float(optimize.brentq(den, grid[i], grid[i + 1], xtol=1e-15)))
        return tuple(sorted(roots))

    def closed_form(self, st: Staircase, constants: Mapping[str, float] | None = None) -> FnOfS:
        env = {**self.constants, **(constants or {})}
        sing = replace(self, constants=env).poles((st.s_min, st.s_max))
        if self.singular_at_zero:
            sing = (0.0, *sing)
        return FnOfS.from_sexpr(self.solution, st, env, sing, label=f"{self.label}:{self.solution}")

    def build(self, fset: FractalSet | None = None, st: Staircase | None = None) -> nde.FdeProblem:
        if st is None:
            st = make_staircase(fset if fset is not None else make_set(self.ratio))
        domain = self.domain(st)
        coeffs = {
            role: FnOfS.from_sexpr(text, st, dict(self.constants), (0.0,) if self.singular_at_zero else ())
            for role, text in self.coefficients.items()
        }
        rhs = compile_expr(parse(self.rhs), "w", dict(self.constants)) if self.rhs else None
        return nde.FdeProblem(
            self.kind,
            st,
            coeffs,
            rhs,
            dict(self.params),
            domain,
            self.poles(domain),
            self.label,
            lambda consts: self.closed_form(st, consts),
        )

    def to_text(self) -> str:
        lines = [
            f"label={self.label}",
            f"kind={self.kind.value}",
            f"equation={self.equation}",
            f"ratio={self.ratio!r}",
            f"epsilon_fraction={self.epsilon_fraction!r}",
            f"singular_at_zero={str(self.singular_at_zero).lower()}",
            f"route={self.route}",
            f"solution={self.solution}",
        ]
        if self.rhs is not None:
            lines.append(f"rhs={self.rhs}")
        if self.particular is not None:
            lines.append(f"particular={self.particular}")
        if self.denominator is not None:
            lines.append(f"denominator={self.denominator}")
        lines += [f"coef.{k}={v}" for k, v in self.coefficients.items()]
        lines += [f"param.{k}={v!r}" for k, v in self.params.items()]
        lines += [f"const.{k}={v!r}" for k, v in self.constants.items()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Preset":
        kv = parse_key_values(text)
        coeffs = {k[5:]: v for k, v in kv.items() if k.startswith("coef.")}
        params = {k[6:]: float(v) for k, v in kv.items() if k.startswith("param.")}
        consts = {k[6:]: float(v) for k, v in kv.items() if k.startswith("const.")}
        try:
            return cls(
                label=kv["label"],
                kind=nde.Kind(kv["kind"]),
                equation=kv.get("equation", ""),
                solution=kv["solution"],
                constants=consts,
                coefficients=coeffs,
                rhs=kv.get("rhs"),
                params=params,
                particular=kv.get("particular"),
                denominator=kv.get("denominator"),
                singular_at_zero=kv.get("singular_at_zero", "false") == "true",
                route=kv.get("route", "closed"),
                ratio=float(kv.get("ratio", 1 / 3)),
                epsilon_fraction=float(kv.get("epsilon_fraction", EPSILON_FRACTION)),
            )
        except KeyError as exc:
            raise DomainError(f"preset config is missing key {exc.args[0]!r}") from None


def parse_key_values(text: str) -> dict[str, str]:
    """Flat key=value lines; blank lines and '#' comments are ignored."""
    out: dict[str, str] = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DomainError(f"line {n}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


PRESETS: dict[str, Preset] = {
    "iu657": Preset(
        label="iu657",
        kind=nde.Kind.SUBSTITUTION1,
        equation="D y = 1 + y/S",
        rhs="(+ 1 w)",
        solution="(* s (ln (* cprime s)))",
        constants={"cprime": 1.0},
        singular_at_zero=True,
        route="Sub1",
    ),
    "9oo": Preset(
        label="9oo",
        kind=nde.Kind.SUBSTITUTION2,
        equation="D y = (S + y)^2",
        rhs="(* w w)",
        params={"a": 1.0, "b": 1.0},
        solution="(- (tan (+ s c)) s)",
        denominator="(cos (+ s c))",
        constants={"c": 0.0},
        route="Sub2",
    ),
    "r1": Preset(
        label="r1",
        kind=nde.Kind.RICCATI,
        equation="D y = -2S y + y^2 + 1 + S^2",
        coefficients={"a": "(* -2 s)", "b": "1", "c": "(+ 1 (* s s))"},
        particular="s",
        solution="(- s (/ 1 (+ s c)))",
        denominator="(+ s c)",
        constants={"c": 1.0},
        route="RiccatiProp1",
    ),
    "r10": Preset(
        label="r10",
        kind=nde.Kind.RICCATI,
        equation="D y = y/S + y^2 - 4S^2",
        coefficients={"a": "(/ 1 s)", "b": "1", "c": "(* -4 s s)"},
        particular="(* 2 s)",
        solution="(+ (* 2 s) (/ s (- (* C (exp (* -2 s s))) 0.25)))",
        denominator="(- (* C (exp (* -2 s s))) 0.25)",
        constants={"C": 2.0},
        singular_at_zero=True,
        route="RiccatiProp2",
    ),
    "e1": Preset(
        label="e1",
        kind=nde.Kind.RICCATI,
        equation="D y = -3y/S + S^3 y^2 + 1/S^3",
        coefficients={"a": "(/ -3 s)", "b": "(pow s 3)", "c": "(pow s -3)"},
        solution="(/ (- (sin s) (* c (cos s))) (* (pow s 3) (+ (cos s) (* c (sin s)))))",
        denominator="(+ (cos s) (* c (sin s)))",
        constants={"c": 1.0},
        singular_at_zero=True,
        route="RiccatiProp3",
    ),
}


def get_preset(label: str) -> Preset:
    try:
        return PRESETS[label]
    except KeyError:
        raise DomainError(f"unknown preset {label!r}; choose from {sorted(PRESETS)}") from None


def solve_preset(
    label: str | Preset,
    fset: FractalSet | None = None,
    constants: Mapping[str, float] | None = None,
    route: str | None = None,
    depth: int = 24,
    samples: int = 512,
) -> nde.FdeSolution:
    """Solve a preset by its own route (or ``route``) and attach a residual report.

    Routes: closed, numeric, Sub1, Sub2, RiccatiProp1, RiccatiProp2,
    RiccatiProp3.
    """
    preset = get_preset(label) if isinstance(label, str) else label
    if constants:
        preset = preset.with_constants(**constants)
    problem = preset.build(fset)
    st = problem.staircase
    route = route or preset.route
    consts = dict(preset.constants)
    kw = {"depth": depth, "samples": samples}
    if route in ("closed", "Sub1", "Sub2") and preset.kind in (nde.Kind.SUBSTITUTION1, nde.Kind.SUBSTITUTION2):
        solver = nde.solve_substitution1 if preset.kind is nde.Kind.SUBSTITUTION1 else nde.solve_substitution2
        return solver(problem, consts, method="closed", **kw)
    if route == "numeric":
        if preset.kind is nde.Kind.SUBSTITUTION1:
            return nde.solve_substitution1(problem, consts, method="numeric", **kw)
        if preset.kind is nde.Kind.SUBSTITUTION2:
            return nde.solve_substitution2(problem, consts, method="numeric", **kw)
        raise DomainError(f"no RK4 reduction for preset {preset.label}; use a Riccati route")
    if route == "closed":
        y = problem.closed_form(consts)
        return nde.FdeSolution(y, consts, "closed", residual_check(problem, y, **kw), problem.exclusions)
    s0 = problem.domain_s[0]
    closed = problem.closed_form(consts)
    if route in ("RiccatiProp1", "RiccatiProp2"):
        if preset.particular is None:
            raise DomainError(f"preset {preset.label} has no particular solution")
        u = FnOfS.from_sexpr(preset.particular, st, consts)
        gap = closed.value(s0) - u.value(s0)
        if route == "RiccatiProp1":
            return nde.solve_riccati_prop1(problem, u, gap, s0=s0, **kw)
        return nde.solve_riccati_prop2(problem, u, 1.0 / gap, s0=s0, **kw)
    if route == "RiccatiProp3":
        if preset.label != "e1":
            raise DomainError("the second-order route is wired for preset e1 only")
        z = nde.solve_second_order_constant(1.0, 1.0, consts["c"], st)
        return nde.solve_riccati_prop3(problem, z, **kw)
    raise DomainError(f"unknown route {route!r}")


def classical_rhs(label: str, constants: Mapping[str, float] | None = None):
    """Right-hand side F(t, y) of the preset as a classical ODE (S = t)."""
    preset = get_preset(label)
    env = {**preset.constants, **(constants or {})}
    if preset.kind is nde.Kind.SUBSTITUTION1:
        g = compile_expr(parse(preset.rhs), "w", env)
        return lambda t, y: g(y / t)
    if preset.kind is nde.Kind.SUBSTITUTION2:
        g = compile_expr(parse(preset.rhs), "w", env)
        a, b = preset.params["a"], preset.params["b"]
        return lambda t, y: g(a * t + b * y)
    a, b, c = (compile_expr(parse(preset.coefficients[k]), "s", env) for k in "abc")
    return lambda t, y: a(t) * y + b(t) * y * y + c(t)


__all__ = ["PRESETS", "Preset", "classical_rhs", "get_preset", "parse_key_values", "solve_preset"]
