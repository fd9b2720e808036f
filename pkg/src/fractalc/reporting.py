"""CSV/SVG/JSON writers, figure reproduction and the invariant suites."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import integrate

from . import nde_solvers as nde
from . import susy
from .errors import DomainError, FractalcError
from .fractal_ops import FnOfS, check_algebra_rules, fractal_derivative2_numeric, fractal_derivative_numeric
from .fractal_set import FractalSet, make_set, sample_fractal_points, set_from_alpha
from .presets import PRESETS, classical_rhs, get_preset, solve_preset
from .staircase import (
    hausdorff_cover_estimate,
    make_staircase,
    staircase_at_point,
)

FIGURE_DEPTH = 20
FIGURE_SAMPLES = 2048
FIGURE_POLE_RADIUS = 1e-3


class ResidualGateError(FractalcError, ArithmeticError):
    """A solution failed its residual check and was not written."""


# -- writers --------------------------------------------------------------------


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def json_text(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=True) + "\n"


def write_text(path: str | os.PathLike, text: str) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with open(p, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return p


@dataclass(frozen=True)
class Series:
    name: str
    t: Sequence[float]
    y: Sequence[float]


def svg_plot(series: Sequence[Series], title: str = "", width: int = 640, height: int = 400) -> str:
    """Line plot over t, held constant across gaps and broken at non-finite values."""
    pad = 40
    xs = [x for s in series for x, y in zip(s.t, s.y) if math.isfinite(y)]
    ys = [y for s in series for y in s.y if math.isfinite(y)]
    if not xs:
        xs, ys = [0.0, 1.0], [0.0, 1.0]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    x1 = x1 if x1 > x0 else x0 + 1.0
    y1 = y1 if y1 > y0 else y0 + 1.0

    def px(x):
        return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

    def py(y):
        return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)

    colors = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        f'<text x="{pad}" y="{height - pad + 16}" font-size="10">{x0:.3g}</text>',
        f'<text x="{width - pad}" y="{height - pad + 16}" font-size="10" text-anchor="end">{x1:.3g}</text>',
        f'<text x="{pad - 4}" y="{height - pad}" font-size="10" text-anchor="end">{y0:.3g}</text>',
        f'<text x="{pad - 4}" y="{pad + 4}" font-size="10" text-anchor="end">{y1:.3g}</text>',
    ]
    for i, s in enumerate(series):
        color = colors[i % len(colors)]
        pieces: list[list[tuple[float, float]]] = [[]]
        prev = None
        for x, y in zip(s.t, s.y):
            if not math.isfinite(y):
                pieces.append([])
                prev = None
                continue
            if prev is not None:
                pieces[-1].append((x, prev))  # constant across the gap
            pieces[-1].append((x, y))
            prev = y
        for piece in pieces:
            if len(piece) < 2:
                continue
            pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in piece)
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1" points="{pts}"/>')
        out.append(
            f'<text x="{width - pad}" y="{pad + 14 * i}" font-size="11" text-anchor="end" fill="{color}">{s.name}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


# -- tables ---------------------------------------------------------------------


def tabulate(f: FnOfS, fset: FractalSet, depth: int, samples: int, rng=None, pole_radius: float = FIGURE_POLE_RADIUS):
    """Rows (t, S, y) at fractal endpoints plus the excluded points with reasons."""
    st = f.staircase
    rows, excluded = [], []
    for p in sample_fractal_points(fset, depth, samples, rng):
        s = staircase_at_point(st, p)
        if any(abs(s - c) < pole_radius for c in f.singular_points):
            excluded.append((p.t, "pole-neighborhood"))
            continue
        try:
            y = f.value(s)
        except ArithmeticError:
            excluded.append((p.t, "singular"))
            continue
        if not math.isfinite(y):
            excluded.append((p.t, "non-finite"))
            continue
        rows.append((p.t, s, y))
    return rows, excluded


# -- figures --------------------------------------------------------------------


@dataclass(frozen=True)
class FigureSpec:
    figure_id: str
    preset: str
    constants: Mapping[str, float]
    alphas: tuple[float | None, ...] = (None,)
    threshold: float = 1e-9
    depth: int = FIGURE_DEPTH
    samples: int = FIGURE_SAMPLES


FIGURES: dict[str, FigureSpec] = {
    "fig1": FigureSpec("fig1", "iu657", {"cprime": 1.0}),
    "fig2": FigureSpec("fig2", "9oo", {"c": 0.0}),
    "fig3": FigureSpec("fig3", "r10", {"C": 2.0}, alphas=(0.5, 0.6), threshold=1e-8),
    "fig4": FigureSpec("fig4", "e1", {"c": 1.0}, threshold=1e-8),
}


@dataclass
class FigureResult:
    figure_id: str
    csv_path: Path
    svg_path: Path
    json_path: Path
    residuals: dict[str, float] = field(default_factory=dict)
    excluded: dict[str, list] = field(default_factory=dict)


def reproduce_figure(spec: FigureSpec | str, out_dir: str | os.PathLike = ".") -> FigureResult:
    """Solve, gate on the residual, then write <id>.csv, <id>.svg and <id>.json."""
    if isinstance(spec, str):
        if spec not in FIGURES:
            raise DomainError(f"figure: unknown id {spec!r}; choose from {sorted(FIGURES)}")
        spec = FIGURES[spec]
    out = Path(out_dir)
    rows, series, residuals, excluded, poles = [], [], {}, {}, {}
    for alpha in spec.alphas:
        fset = make_set() if alpha is None else set_from_alpha(alpha)
        name = f"alpha={fset.alpha:.6g}"
        sol = solve_preset(spec.preset, fset, dict(spec.constants))
        rep = sol.residual
        if rep is None or not rep.passed(spec.threshold):
            value = math.nan if rep is None else rep.max_abs_residual
            raise ResidualGateError(f"{spec.figure_id} ({name}): residual {value:.3g} >= {spec.threshold:g}")
        residuals[name] = rep.max_abs_residual
        table, skipped = tabulate(sol.solution, fset, spec.depth, spec.samples)
        excluded[name] = [[fmt(t), why] for t, why in skipped]
        poles[name] = [fmt(p) for p in sol.poles]
        rows += [(fset.alpha, t, s, y) for t, s, y in table]
        series.append(Series(name, [r[0] for r in table], [r[2] for r in table]))
    csv_path = write_text(out / f"{spec.figure_id}.csv", csv_text(("alpha", "t", "S", "y"), rows))
    svg_path = write_text(out / f"{spec.figure_id}.svg", svg_plot(series, f"{spec.figure_id}: preset {spec.preset}"))
    summary = {
        "figure": spec.figure_id,
        "preset": spec.preset,
        "constants": {k: fmt(v) for k, v in spec.constants.items()},
        "threshold": fmt(spec.threshold),
        "residuals": {k: fmt(v) for k, v in residuals.items()},
        "poles": poles,
        "excluded": excluded,
    }
    json_path = write_text(out / f"{spec.figure_id}.json", json_text(summary))
    return FigureResult(spec.figure_id, csv_path, svg_path, json_path, residuals, excluded)


# -- suites ---------------------------------------------------------------------


def _check(name: str, value: float, threshold: float, passed: bool | None = None) -> dict:
    ok = (value < threshold) if passed is None else passed
    return {"name": name, "passed": bool(ok), "value": fmt(value), "threshold": fmt(threshold)}


def suite_staircase(rng: np.random.Generator) -> list[dict]:
    fset = make_set()
    st = make_staircase(fset)
    g = st.gamma_factor
    checks = [
        _check("S(1) = gamma", abs(st(1.0) - g), 1e-12),
        _check("S(1/2) = gamma/2 exactly", abs(st(0.5) - g / 2), 0.0, st(0.5) == g / 2),
        _check("S(1/4) = gamma/3", abs(st(0.25) - g / 3), 1e-12),
    ]
    ts = rng.random(1000)
    worst = max(abs(st(t / 3) - st(t) / 2) for t in ts)
    checks.append(_check("self-similarity S(t/3) = S(t)/2", worst, 1e-12))
    for n in (6, 10):
        ts = rng.random(100)
        gap = max(abs(hausdorff_cover_estimate(fset, t, n) * g - st(t)) - g * 2.0 ** (2 - n) for t in ts)
        checks.append(_check(f"covering oracle depth {n}", gap, 0.0, gap <= 0.0))
    return checks


def _battery(st) -> list[FnOfS]:
    texts = [
        "s", "(* s s)", "(sin s)", "(cos s)", "(exp s)",
        "(+ 1 (* s s))", "(exp (* -1 s))", "(+ 2 (sin (* 3 s)))", "(pow (+ 1 s) 3)", "(+ 2 (cos s))",
    ]
    return [FnOfS.from_sexpr(t, st) for t in texts]


def suite_algebra(rng: np.random.Generator) -> list[dict]:
    fset = make_set()
    st = make_staircase(fset)
    pts = sample_fractal_points(fset, 20, 200, rng)
    quotient = max(abs(fractal_derivative_numeric(fset, st, p.exact, 20, st) - 1.0) for p in pts)
    second = max(abs(fractal_derivative2_numeric(fset, st, p.exact, 20, st)) for p in pts[:50])
    checks = [
        _check("numeric quotient of S equals 1", quotient, 0.0, quotient == 0.0),
        _check("second derivative of S vanishes", second, 1e-8),
    ]
    fns = _battery(st)
    # denominators bounded away from zero on [0, S(1)]
    nonvanishing = fns[4:]
    worst = 0.0
    for i, f in enumerate(fns):
        g = nonvanishing[i % len(nonvanishing)]
        worst = max(worst, check_algebra_rules(f, g, samples=16, depth=16).max_abs_residual)
    checks.append(_check("sum/product/quotient rules", worst, 1e-8))
    return checks


def alpha_one_oracle(label: str, samples: int = 64) -> float:
    """Sup difference between the preset solution on the ratio-1/2 set and a classical integrator."""
    fset = make_set(0.5)
    sol = solve_preset(label, fset, samples=128)
    y = sol.solution
    problem = get_preset(label).build(fset)
    lo, hi = problem.domain_s
    rhs = classical_rhs(label)
    ivp = integrate.solve_ivp(rhs, (lo, hi), [y.value(lo)], method="DOP853", rtol=1e-12, atol=1e-12, dense_output=True)
    ts = np.linspace(lo, hi, samples)
    return float(max(abs(y.value(t) - ivp.sol(t)[0]) for t in ts))


def suite_solvers(rng: np.random.Generator) -> list[dict]:
    checks = []
    for label in PRESETS:
        sol = solve_preset(label)
        threshold = 1e-9 if label in ("iu657", "9oo", "r1") else 1e-8
        checks.append(_check(f"{label} residual ({sol.method})", sol.residual.max_abs_residual, threshold))
    p1 = solve_preset("r1", route="RiccatiProp1").solution
    p2 = solve_preset("r1", route="RiccatiProp2").solution
    lo, hi = get_preset("r1").build().domain_s
    diff = max(abs(p1.value(s) - p2.value(s)) for s in np.linspace(lo, hi, 200))
    checks.append(_check("r1 route agreement", diff, 1e-8))
    for label in ("iu657", "9oo"):
        ratio = rk4_order_ratio(label)
        checks.append(_check(f"{label} RK4 halving ratio", ratio, 20.0, 12.0 <= ratio <= 20.0))
    for label in PRESETS:
        checks.append(_check(f"{label} ratio-1/2 classical oracle", alpha_one_oracle(label), 1e-6))
    return checks


def rk4_order_ratio(label: str, steps: int = 64) -> float:
    problem = get_preset(label).build()
    lo, hi = problem.domain_s
    exact = problem.closed_form({})
    if label == "iu657":
        # z = y/s solves z' = (g(z) - z)/s
        z_exact = lambda s: exact.value(s) / s  # noqa: E731
        f = lambda s, z: (problem.rhs(z) - z) / s  # noqa: E731
    elif label == "9oo":
        a, b = problem.params["a"], problem.params["b"]
        z_exact = lambda s: a * s + b * exact.value(s)  # noqa: E731
        f = lambda s, z: a + b * problem.rhs(z)  # noqa: E731
    else:
        raise DomainError(f"no RK4 reduction for preset {label}")
    return float(nde.rk4_convergence(f, z_exact(lo), lo, hi, z_exact, steps)[2])


def suite_susy(rng: np.random.Generator) -> list[dict]:
    st = make_staircase(make_set())
    grid = np.linspace(0.05 * st.gamma_factor, st.s_max, 100)
    osc = susy.oscillator_system(st)
    systems = [osc] + [susy.coulomb_system(ell, st) for ell in range(3)]
    checks = []
    for sys_ in systems:
        checks.append(_check(f"{sys_.label} closure V = W^2 - W'", sys_.closure_error(grid), 1e-9))
        A = susy.apply_ladder(sys_.superpotential, sys_.ground_state, False)
        checks.append(_check(f"{sys_.label} A annihilates ground state", max(abs(A.value(s)) for s in grid), 1e-10))
    res = susy.schrodinger_residual(osc.physical_potential, osc.ground_state, 0.5, samples=256)
    checks.append(_check("oscillator Schrodinger residual at E=1/2", res.max_abs_residual, 1e-9))
    worst = max(susy.shape_invariance_check(ell, grid) for ell in range(9))
    checks.append(_check("Coulomb shape invariance l=0..8", worst, 1e-12))
    return checks


SUITES = {
    "staircase": suite_staircase,
    "algebra": suite_algebra,
    "solvers": suite_solvers,
    "susy": suite_susy,
}


def run_suite(name: str, seed: int = 0) -> dict:
    names = list(SUITES) if name == "all" else [name]
    if any(n not in SUITES for n in names):
        raise DomainError(f"suite: unknown name {name!r}; choose from {sorted(SUITES) + ['all']}")
    report = {"suite": name, "seed": seed, "groups": {}}
    for n in names:
        report["groups"][n] = SUITES[n](np.random.default_rng(seed))
    report["passed"] = all(c["passed"] for g in report["groups"].values() for c in g)
    return report
