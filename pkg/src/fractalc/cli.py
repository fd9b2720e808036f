"""fractalc command line.

Exit status: 0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import reporting, susy
from .errors import DomainError, FractalcError, ResourceError
from .fractal_ops import EPSILON_FRACTION, FnOfS, fractal_derivative, fractal_derivative_numeric, fractal_integral
from .fractal_set import FractalSet, make_set, sample_fractal_points, set_from_alpha
from .presets import PRESETS, get_preset, parse_key_values, solve_preset
from .sexpr import SexprError
from .staircase import make_staircase, staircase_at_point

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3
COMMANDS = ("staircase", "derive", "integrate", "solve", "residual", "susy", "suite", "figure")


class UsageError(DomainError):
    pass


@dataclass
class RunConfig:
    command: str
    ratio: float | None = None
    alpha: float | None = None
    interval: tuple[float, float] = (0.0, 1.0)
    depth: int = reporting.FIGURE_DEPTH
    samples: int = reporting.FIGURE_SAMPLES
    preset: str | None = None
    route: str | None = None
    constants: dict[str, float] = field(default_factory=dict)
    out: str = "-"
    format: str = "csv"
    epsilon: float = EPSILON_FRACTION
    seed: int | None = None
    expr: str | None = None
    lo: float | None = None
    hi: float | None = None
    ell: int = 0
    hbar: float = 1.0
    mass: float = 1.0
    omega: float = 1.0
    name: str | None = None

    def validate(self) -> None:
        if self.ratio is not None and self.alpha is not None:
            raise UsageError("--ratio/--alpha: give exactly one of them")
        if self.samples < 1:
            raise UsageError(f"--samples: must be >= 1, got {self.samples}")
        if self.depth < 1:
            raise UsageError(f"--depth: must be >= 1, got {self.depth}")
        if self.format not in ("csv", "json", "svg"):
            raise UsageError(f"--format: expected csv, json or svg, got {self.format!r}")
        if not 0.0 <= self.epsilon < 1.0:
            raise UsageError(f"--epsilon: must lie in [0, 1), got {self.epsilon}")
        if self.ell < 0:
            raise UsageError(f"--ell: must be >= 0, got {self.ell}")

    def fractal_set(self) -> FractalSet:
        try:
            if self.alpha is not None:
                return set_from_alpha(self.alpha, self.interval)
            return make_set(1 / 3 if self.ratio is None else self.ratio, self.interval)
        except DomainError as exc:
            raise UsageError(f"--{'alpha' if self.alpha is not None else 'ratio'}: {exc}") from None

    def rng(self):
        return None if self.seed is None else np.random.default_rng(self.seed)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fractalc", description="Calculus on Cantor-like fractal sets.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        g = p.add_argument_group("set and sampling")
        g.add_argument("--ratio", type=float, help="contraction ratio r in (0, 1/2]")
        g.add_argument("--alpha", type=float, help="dimension; the ratio becomes 2**(-1/alpha)")
        g.add_argument("--interval", type=float, nargs=2, metavar=("A", "B"))
        g.add_argument("--depth", type=int)
        g.add_argument("--samples", type=int)
        g.add_argument("--seed", type=int, help="random sampling of endpoints (default: evenly by index)")
        g.add_argument("--epsilon", type=float, help="singular cutoff as a fraction of gamma(alpha+1)")
        g.add_argument("--out", help="output path, '-' for stdout")
        g.add_argument("--format", choices=("csv", "json", "svg"))
        g.add_argument("--config", help="key=value file; flags override it")
        c = p.add_argument_group("constants")
        c.add_argument("--cprime", type=float)
        c.add_argument("--c", dest="c", type=float)
        c.add_argument("--C", dest="C", type=float)
        c.add_argument("--const", action="append", default=[], metavar="NAME=VALUE")
        return p

    common(sub.add_parser("staircase", help="tabulate S at fractal endpoints"))
    p = common(sub.add_parser("derive", help="fractal derivative of a profile or preset solution"))
    p.add_argument("--expr", help="profile g(s) as an s-expression")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p = common(sub.add_parser("integrate", help="fractal integral of a profile over [lo, hi] in s"))
    p.add_argument("--expr", required=True)
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    for name in ("solve", "residual"):
        p = common(sub.add_parser(name, help=f"{name} a preset equation"))
        p.add_argument("--preset", choices=sorted(PRESETS))
        p.add_argument("--route", help="closed, numeric, Sub1, Sub2, RiccatiProp1, RiccatiProp2, RiccatiProp3")
    p = common(sub.add_parser("susy", help="superpotential/partner tables"))
    p.add_argument("--preset", choices=("oscillator", "coulomb"))
    p.add_argument("--ell", type=int)
    p.add_argument("--hbar", type=float)
    p.add_argument("--mass", type=float)
    p.add_argument("--omega", type=float)
    p = common(sub.add_parser("suite", help="run invariant batteries"))
    p.add_argument("name", nargs="?", choices=("algebra", "staircase", "solvers", "susy", "all"), default="all")
    p = common(sub.add_parser("figure", help="reproduce fig1..fig4 (CSV, SVG, JSON)"))
    p.add_argument("name", choices=(*reporting.FIGURES, "all"))
    return parser


_FLOAT_KEYS = ("ratio", "alpha", "epsilon", "lo", "hi", "hbar", "mass", "omega")
_INT_KEYS = ("depth", "samples", "seed", "ell")
_STR_KEYS = ("preset", "route", "out", "format", "expr")


def _parse_number(key: str, text: str, kind):
    try:
        return kind(text)
    except ValueError:
        raise UsageError(f"--{key}: cannot parse {text!r}") from None


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    constants: dict[str, float] = {}
    if getattr(args, "config", None):
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"--config: {exc}") from None
        for key, val in parse_key_values(text).items():
            if key.startswith("const."):
                constants[key[6:]] = _parse_number(key, val, float)
            elif key in _FLOAT_KEYS:
                values[key] = _parse_number(key, val, float)
            elif key in _INT_KEYS:
                values[key] = _parse_number(key, val, int)
            elif key in _STR_KEYS:
                values[key] = val
            elif key == "interval":
                a, b = (_parse_number(key, v, float) for v in val.split(","))
                values[key] = (a, b)
            else:
                raise UsageError(f"--config: unknown key {key!r}")
    for key in (*_FLOAT_KEYS, *_INT_KEYS, *_STR_KEYS):
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    if getattr(args, "interval", None):
        values["interval"] = tuple(args.interval)
    for item in getattr(args, "const", []) or []:
        if "=" not in item:
            raise UsageError(f"--const: expected NAME=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        constants[k.strip()] = _parse_number("const", v, float)
    for k in ("cprime", "c", "C"):
        v = getattr(args, k, None)
        if v is not None:
            constants[k] = v
    cfg = RunConfig(command=args.command, constants=constants, name=getattr(args, "name", None), **values)
    cfg.validate()
    return cfg


# -- commands -------------------------------------------------------------------


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out == "-":
        sys.stdout.write(text)
    else:
        reporting.write_text(cfg.out, text)


def _preset_constants(cfg: RunConfig, label: str) -> dict[str, float]:
    known = get_preset(label).constants
    unknown = set(cfg.constants) - set(known)
    if unknown:
        raise UsageError(f"--const: preset {label} takes {sorted(known)}, not {sorted(unknown)}")
    return dict(cfg.constants)


def _require(cfg: RunConfig, key: str):
    value = getattr(cfg, key)
    if value is None:
        raise UsageError(f"--{key}: required for {cfg.command}")
    return value


def cmd_staircase(cfg: RunConfig) -> int:
    fset = cfg.fractal_set()
    st = make_staircase(fset)
    rows = [(p.t, staircase_at_point(st, p)) for p in sample_fractal_points(fset, cfg.depth, cfg.samples, cfg.rng())]
    if cfg.format == "json":
        _emit(cfg, reporting.json_text({"alpha": reporting.fmt(fset.alpha), "rows": [[reporting.fmt(x) for x in r] for r in rows]}))
    elif cfg.format == "svg":
        _emit(cfg, reporting.svg_plot([reporting.Series("S", [r[0] for r in rows], [r[1] for r in rows])], "staircase"))
    else:
        _emit(cfg, reporting.csv_text(("t", "S"), rows))
    return EXIT_OK


def _profile(cfg: RunConfig, fset: FractalSet) -> FnOfS:
    st = make_staircase(fset)
    if cfg.preset:
        return solve_preset(cfg.preset, fset, _preset_constants(cfg, cfg.preset), depth=cfg.depth).solution
    try:
        return FnOfS.from_sexpr(_require(cfg, "expr"), st, cfg.constants)
    except SexprError as exc:
        raise UsageError(f"--expr: {exc}") from None


def cmd_derive(cfg: RunConfig) -> int:
    fset = cfg.fractal_set()
    f = _profile(cfg, fset)
    st = f.staircase
    rows = []
    for p in sample_fractal_points(fset, cfg.depth, cfg.samples, cfg.rng()):
        s = staircase_at_point(st, p)
        try:
            rows.append((p.t, s, f.value(s), fractal_derivative_numeric(fset, f, p.exact, cfg.depth, st),
                         fractal_derivative(f, p.exact, cfg.depth)))
        except ArithmeticError:
            continue
    _emit(cfg, reporting.csv_text(("t", "S", "f", "D_numeric", "D_conjugacy"), rows))
    return EXIT_OK


def cmd_integrate(cfg: RunConfig) -> int:
    fset = cfg.fractal_set()
    f = _profile(cfg, fset)
    value = fractal_integral(f, cfg.lo, cfg.hi)
    _emit(cfg, reporting.json_text({"expr": cfg.expr, "lo": reporting.fmt(cfg.lo), "hi": reporting.fmt(cfg.hi),
                                    "integral": reporting.fmt(value)}))
    return EXIT_OK


def cmd_solve(cfg: RunConfig) -> int:
    label = _require(cfg, "preset")
    fset = cfg.fractal_set()
    preset = get_preset(label)
    consts = _preset_constants(cfg, label)
    preset = preset.with_constants(**consts)
    if cfg.epsilon != EPSILON_FRACTION:
        preset = replace(preset, epsilon_fraction=cfg.epsilon)
    sol = solve_preset(preset, fset, route=cfg.route, samples=min(cfg.samples, 512))
    threshold = 1e-9 if sol.method in ("Sub1", "Sub2", "RiccatiProp1", "closed") else 1e-8
    if not sol.residual.passed(threshold):
        raise reporting.ResidualGateError(
            f"--preset {label}: residual {sol.residual.max_abs_residual:.3g} >= {threshold:g}"
        )
    rows, _ = reporting.tabulate(sol.solution, fset, cfg.depth, cfg.samples, cfg.rng())
    if cfg.format == "svg":
        _emit(cfg, reporting.svg_plot([reporting.Series(label, [r[0] for r in rows], [r[2] for r in rows])], label))
    elif cfg.format == "json":
        _emit(cfg, reporting.json_text(_solution_report(label, sol)))
    else:
        _emit(cfg, reporting.csv_text(("t", "S", "y"), rows))
    return EXIT_OK


def _solution_report(label, sol) -> dict:
    rep = sol.residual
    return {
        "preset": label,
        "method": sol.method,
        "constants": {k: reporting.fmt(v) for k, v in sol.constants.items()},
        "max_abs_residual": reporting.fmt(rep.max_abs_residual),
        "sample_count": rep.sample_count,
        "depth": rep.depth,
        "poles": [reporting.fmt(p) for p in sol.poles],
        "excluded": [[reporting.fmt(t), why] for t, why in rep.excluded_points],
    }


def cmd_residual(cfg: RunConfig) -> int:
    label = _require(cfg, "preset")
    fset = cfg.fractal_set()
    sol = solve_preset(label, fset, _preset_constants(cfg, label), cfg.route, samples=cfg.samples)
    _emit(cfg, reporting.json_text(_solution_report(label, sol)))
    return EXIT_OK


def cmd_susy(cfg: RunConfig) -> int:
    label = cfg.preset or "oscillator"
    fset = cfg.fractal_set()
    st = make_staircase(fset)
    if label == "oscillator":
        system = susy.oscillator_system(st, susy.Units(cfg.hbar, cfg.mass, cfg.omega))
        pair = susy.partner_potentials(system.superpotential)
        lo = st.s_min
    else:
        system = susy.coulomb_system(cfg.ell, st)
        pair = susy.coulomb_partners(cfg.ell, st)
        lo = cfg.epsilon * st.gamma_factor
    rows = []
    for p in sample_fractal_points(fset, cfg.depth, cfg.samples, cfg.rng()):
        s = staircase_at_point(st, p)
        if s < lo:
            continue
        W, V, psi = system.superpotential, system.potential, system.ground_state
        rows.append((p.t, s, W.value(s), V.value(s), psi.value(s), pair.v_minus.value(s), pair.v_plus.value(s)))
    _emit(cfg, reporting.csv_text(("t", "S", "W", "V", "psi0", "V_minus", "V_plus"), rows))
    return EXIT_OK


def cmd_suite(cfg: RunConfig) -> int:
    report = reporting.run_suite(cfg.name or "all", 0 if cfg.seed is None else cfg.seed)
    _emit(cfg, reporting.json_text(report))
    return EXIT_OK if report["passed"] else EXIT_NUMERIC


def cmd_figure(cfg: RunConfig) -> int:
    out_dir = "." if cfg.out in (None, "-") else cfg.out
    names = list(reporting.FIGURES) if cfg.name == "all" else [cfg.name]
    for name in names:
        res = reporting.reproduce_figure(name, out_dir)
        print(f"{name}: {res.csv_path} {res.svg_path} {res.json_path}")
    return EXIT_OK


HANDLERS = {
    "staircase": cmd_staircase,
    "derive": cmd_derive,
    "integrate": cmd_integrate,
    "solve": cmd_solve,
    "residual": cmd_residual,
    "susy": cmd_susy,
    "suite": cmd_suite,
    "figure": cmd_figure,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        return HANDLERS[cfg.command](cfg)
    except (DomainError, ResourceError, SexprError) as exc:
        print(f"fractalc: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (FractalcError, ArithmeticError) as exc:
        print(f"fractalc: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
