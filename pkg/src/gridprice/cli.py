"""Command-line entry point: ``gridprice <command> [options]``.

Exit codes: 0 success, 2 configuration error, 3 model error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import math
import sys
from pathlib import Path

from . import io as gio
from .config import load_config
from .control import design_lowpass
from .errors import ConfigError, ModelError
from .market import clearing_price, linearize
from .recipes import RECIPES, repro_recipe
from .sensitivity import CURVES, DEFAULT_GRID, LoopParams, cutoff_frequency, sweep
from .simulation import (Scenario, compare_price_vs_sensor, default_threads, detection_sweep, run,
                         synth_baseline)

EXIT_OK, EXIT_CONFIG, EXIT_MODEL, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("gridprice")


def _floats(text: str) -> list:
    try:
        return [float(eval_pi(t)) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad number list {text!r}: {exc}") from exc


def eval_pi(token: str) -> float:
    """Parse a number, allowing the forms 'pi', '2pi', 'pi/4' and '3pi/2'."""
    t = token.strip().replace("*", "")
    if "pi" not in t:
        return float(t)
    num, _, den = t.partition("/")
    coef = num.replace("pi", "") or "1"
    return float(coef) * math.pi / (float(den) if den else 1.0)


def _scenario(args) -> Scenario:
    if not args.config:
        raise ConfigError("--config is required")
    sc = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        sc = dataclasses.replace(sc, seed=args.seed)
    return sc


def _loop_params(sc: Scenario) -> LoopParams:
    m = sc.market
    plant = linearize(m, clearing_price(m, m.baseline_at(0)))
    atk = sc.attack
    rho = atk.rho if atk is not None and atk.channel == "price" else 1.0
    n = atk.n_compromised if atk is not None and atk.channel == "sensor" else 1.0
    return LoopParams.from_plant(plant, sc.controller.eta, m.T, rho=rho, n_compromised=n,
                                 phi=sc.controller.phi)


def cmd_simulate(args) -> int:
    out = Path(args.out)
    threads = args.threads or default_threads()
    if args.recipe:
        written = repro_recipe(args.recipe).run(out, threads)
    else:
        sc = _scenario(args)
        tr = run(sc)
        written = gio.emit_trace(tr, out, stem=sc.name or "trace")
        if sc.controller.mode == "robust_with_filter":
            wc = sc.filter.cutoff or cutoff_frequency(sc.controller.phi, sc.market.T)
            written.append(gio.write_filter_csv(design_lowpass(wc, sc.market.T, sc.filter.order),
                                                out / "filter_coefficients.csv"))
        if tr.clamp_count:
            log.warning("price clamped at lambda_min %d time(s)", tr.clamp_count)
        if tr.alarm_step is not None:
            log.info("CUSUM alarm at step %d", tr.alarm_step)
    for p in written:
        print(p)
    return EXIT_OK


def cmd_sweep(args) -> int:
    sc = _scenario(args)
    if args.curve not in CURVES:
        raise ConfigError(f"unknown curve {args.curve!r}; choose from {', '.join(CURVES)}")
    curve = sweep(CURVES[args.curve], _loop_params(sc), args.grid)
    print(gio.write_sweep_csv(curve, Path(args.out)))
    return EXIT_OK


def cmd_detect(args) -> int:
    sc = _scenario(args)
    rows = detection_sweep(sc, _floats(args.omegas), _floats(args.etas) if args.etas else (),
                           amplitude=args.amplitude, rho=args.rho,
                           threads=args.threads or default_threads())
    print(gio.write_table_csv(rows, Path(args.out)))
    return EXIT_OK


def cmd_compare(args) -> int:
    sc = _scenario(args)
    rows = compare_price_vs_sensor(sc, _floats(args.fractions), _floats(args.etas),
                                   threads=args.threads or default_threads())
    print(gio.write_table_csv(rows, Path(args.out)))
    return EXIT_OK


def cmd_gen_baseline(args) -> int:
    if args.days < 1:
        raise ConfigError("days must be >= 1")
    print(gio.write_baseline_csv(synth_baseline(args.seed, args.days, args.T), Path(args.out)))
    return EXIT_OK


def cmd_list(args) -> int:
    for name, make in RECIPES.items():
        print(f"{name}\t{make().description}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gridprice", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, out_help):
        p.add_argument("--config", help="scenario TOML file")
        p.add_argument("--out", required=True, help=out_help)
        p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (default: $GRIDPRICE_THREADS or 1)")

    p = sub.add_parser("simulate", help="run one scenario or a named recipe")
    common(p, "output directory")
    p.add_argument("--recipe", choices=sorted(RECIPES), help="run a figure recipe instead")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep-sensitivity", help="export a sensitivity magnitude curve")
    common(p, "output CSV file")
    p.add_argument("--curve", default="error-price", help=f"one of {', '.join(CURVES)}")
    p.add_argument("--grid", type=int, default=DEFAULT_GRID)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("detect-sweep", help="CUSUM detection delay vs attack frequency")
    common(p, "output CSV file")
    p.add_argument("--omegas", default="pi/8,pi/4,pi/2,pi,2pi")
    p.add_argument("--etas", default="")
    p.add_argument("--amplitude", type=float, default=0.1)
    p.add_argument("--rho", type=float, default=0.5)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("compare-channels", help="price vs sensor attack impact table")
    common(p, "output CSV file")
    p.add_argument("--fractions", default="0,0.25,0.5,0.75,1")
    p.add_argument("--etas", default="0.1,0.5,0.8")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("gen-baseline", help="write a synthetic baseline profile CSV")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--days", type=int, default=7)
    p.add_argument("--T", type=float, default=0.5, help="sampling period in hours")
    p.set_defaults(func=cmd_gen_baseline)

    p = sub.add_parser("list-recipes", help="list figure recipes")
    p.set_defaults(func=cmd_list)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ModelError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
