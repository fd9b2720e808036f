"""Two convergence tables.

1. RK4 on the reduced substitution equations: endpoint error against the
   closed form as the step count doubles (the ratio should approach 16).
2. Limit-quotient derivative against the conjugacy derivative as the
   pre-fractal depth grows.
"""

import argparse
import math
from dataclasses import dataclass

import numpy as np

from fractalc.fractal_ops import FnOfS, fractal_derivative, fractal_derivative_numeric
from fractalc.fractal_set import make_set, sample_fractal_points
from fractalc.nde_solvers import rk4
from fractalc.reporting import csv_text
from fractalc.staircase import make_staircase


@dataclass
class Config:
    ratio: float = 1 / 3
    steps: tuple[int, ...] = (16, 32, 64, 128, 256, 512)
    depths: tuple[int, ...] = (8, 12, 16, 20, 24)
    profile: str = "(* (sin (* 2 s)) (exp s))"
    points: int = 40
    seed: int = 0


def rk4_table(cfg: Config, gamma: float) -> list[tuple]:
    lo = 0.05 * gamma
    cases = {
        "iu657": (lambda s, z: 1.0 / s, math.log(lo), lo, math.log),
        "9oo": (lambda s, z: 1.0 + z * z, 0.0, 0.0, math.tan),
    }
    rows = []
    for name, (f, z0, s0, exact) in cases.items():
        prev = None
        for n in cfg.steps:
            err = abs(rk4(f, z0, np.linspace(s0, gamma, n + 1))[-1] - exact(gamma))
            rows.append((name, n, err, prev / err if prev else math.nan))
            prev = err
    return rows


def depth_table(cfg: Config) -> list[tuple]:
    fset = make_set(cfg.ratio)
    st = make_staircase(fset)
    f = FnOfS.from_sexpr(cfg.profile, st)
    pts = sample_fractal_points(fset, max(cfg.depths[0], 2), cfg.points, np.random.default_rng(cfg.seed))
    rows = []
    for depth in cfg.depths:
        worst = max(abs(fractal_derivative(f, p.exact) - fractal_derivative_numeric(fset, f, p.exact, depth, st))
                    for p in pts)
        rows.append((depth, worst))
    return rows


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--ratio", type=float, default=Config.ratio)
    parser.add_argument("--seed", type=int, default=Config.seed)
    args = parser.parse_args()
    cfg = Config(ratio=args.ratio, seed=args.seed)
    gamma = make_staircase(make_set(cfg.ratio)).gamma_factor
    print(csv_text(("preset", "steps", "endpoint_error", "ratio"), rk4_table(cfg, gamma)))
    print(csv_text(("depth", "max_derivative_gap"), depth_table(cfg)))


if __name__ == "__main__":
    main()
