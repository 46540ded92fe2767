#!/usr/bin/env python3
"""Run every figure recipe and write CSV/SVG outputs under one directory.

    python scripts/reproduce_figures.py --out results/ [--only fig-robust-filter]
"""

import argparse
import time
from pathlib import Path

from gridprice.recipes import RECIPES, repro_recipe


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results", help="output directory")
    ap.add_argument("--only", action="append", choices=sorted(RECIPES),
                    help="run only these recipes (repeatable)")
    ap.add_argument("--threads", type=int, default=None)
    args = ap.parse_args()
    for name in args.only or RECIPES:
        t0 = time.perf_counter()
        written = repro_recipe(name).run(Path(args.out) / name, args.threads)
        print(f"{name}: {len(written)} files in {time.perf_counter() - t0:.2f} s")


if __name__ == "__main__":
    main()
