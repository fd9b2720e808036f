"""Write fig1..fig4 (CSV, SVG, JSON) and print the residual behind each gate."""

import argparse
import time
from dataclasses import dataclass

from fractalc.reporting import FIGURES, reproduce_figure


@dataclass
class Config:
    out_dir: str = "figures"
    figures: tuple[str, ...] = tuple(FIGURES)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default=Config.out_dir)
    parser.add_argument("figures", nargs="*", help=f"subset of {', '.join(FIGURES)} (default: all)")
    args = parser.parse_args()
    unknown = set(args.figures) - set(FIGURES)
    if unknown:
        parser.error(f"unknown figures: {sorted(unknown)}")
    cfg = Config(args.out_dir, tuple(args.figures) or Config.figures)
    for name in cfg.figures:
        start = time.perf_counter()
        res = reproduce_figure(name, cfg.out_dir)
        took = time.perf_counter() - start
        worst = max(res.residuals.values())
        skipped = sum(len(v) for v in res.excluded.values())
        print(f"{name}: residual {worst:.2e}, {skipped} points excluded, {took:.2f}s -> {res.csv_path}")


if __name__ == "__main__":
    main()
