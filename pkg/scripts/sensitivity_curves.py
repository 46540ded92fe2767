#!/usr/bin/env python3
"""Tabulate sensitivity magnitudes and worst-case frequencies at the reference market.

Writes one CSV per (curve, eta) and prints the worst-case frequency of each.
"""

import argparse
from pathlib import Path

from gridprice import io as gio
from gridprice.market import MarketParams, clearing_price, linearize
from gridprice.sensitivity import CURVES, LoopParams, cutoff_frequency, sweep, worst_case_frequency


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/sensitivity")
    ap.add_argument("--etas", type=float, nargs="+", default=[0.1, 0.5, 0.8])
    ap.add_argument("--rho", type=float, default=0.5)
    ap.add_argument("--phi", type=float, default=0.5)
    ap.add_argument("--grid", type=int, default=1024)
    args = ap.parse_args()

    m = MarketParams()
    plant = linearize(m, clearing_price(m, m.baseline_at(0)))
    print(f"lambda0={plant.lambda0:.6f} w_dot={plant.w_dot:.6f} "
          f"omega_c(phi={args.phi})={cutoff_frequency(args.phi, m.T):.4f} rad/h")
    for eta in args.etas:
        lp = LoopParams.from_plant(plant, eta, m.T, rho=args.rho, n_compromised=m.n_consumers,
                                   phi=args.phi)
        for name, fn in CURVES.items():
            gio.write_sweep_csv(sweep(fn, lp, args.grid), Path(args.out) / f"{name}-eta{eta}.csv")
            w, mag = worst_case_frequency(fn, lp, args.grid)
            print(f"eta={eta:<4} {name:<20} worst omega={w:.4f} rad/h  |S|={mag:.6g}")


if __name__ == "__main__":
    main()
