"""Named scenario bundles that regenerate the data behind the standard figures.

Sinusoidal attacks at the Nyquist frequency pi/T are issued with a pi/2
phase: sampled at k*T the sine form vanishes identically there, the cosine
form does not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from . import io as gio
from .attacks import AttackSpec
from .market import MarketParams
from .simulation import (ControllerConfig, Scenario, attack_comparison, compare_price_vs_sensor,
                         detection_sweep, price_wave, run_many, synth_baseline)

T_REF = 0.5
DETECTION_OMEGAS = (math.pi / 8, math.pi / 4, math.pi / 2, math.pi, 2 * math.pi)


def _phase(omega, T=T_REF):
    return math.pi / 2 if math.isclose(omega * T, math.pi) else 0.0


def _wave(amplitude, omega, T=T_REF):
    return price_wave(amplitude, omega, _phase(omega, T))


def _weekly(seed=0):
    return MarketParams(baseline=synth_baseline(seed, 7, T_REF))


@dataclass
class Recipe:
    name: str
    description: str
    scenarios: dict
    tables: dict = field(default_factory=dict)  # file stem -> callable(threads) -> rows

    def run(self, out_dir, threads: Optional[int] = None) -> list:
        out_dir = Path(out_dir)
        labels = list(self.scenarios)
        traces = run_many([self.scenarios[k] for k in labels], threads)
        written = []
        for label, tr in zip(labels, traces):
            written += gio.emit_trace(tr, out_dir, stem=label)
        for stem, fn in self.tables.items():
            written.append(gio.write_table_csv(fn(threads), out_dir / f"{stem}.csv"))
        return written


def attack_comparison_recipe() -> Recipe:
    base = Scenario(market=_weekly(), plant_mode="nonlinear", name="attack-comparison")
    sc = {
        "scaling": base.with_attack(AttackSpec(shape="scaling", gamma=0.95, rho=0.5)),
        "delay": base.with_attack(AttackSpec(shape="delay", tau=8, rho=0.5)),
        "additive-worst": base.with_attack(
            AttackSpec(signal=_wave(1.0, math.pi / T_REF), rho=0.5)),
    }
    return Recipe("fig-attack-comparison",
                  "scaling (gamma=0.95), delay (tau=8) and worst-frequency additive attacks",
                  sc, {"matched_comparison": lambda th: attack_comparison(base, threads=th)})


def eta_tradeoff_recipe() -> Recipe:
    atk = AttackSpec(signal=_wave(1.0, 1.5 * math.pi), rho=0.5)
    sc = {}
    for eta in (0.8, 0.1):
        sc[f"eta-{eta}"] = Scenario(plant_mode="nonlinear", attack=atk, name=f"eta={eta}",
                                    controller=ControllerConfig(eta=eta))
    for eta in (0.8, 0.1):
        sc[f"convergence-eta-{eta}"] = Scenario(plant_mode="nonlinear", initial_offset_mw=41.0,
                                                horizon=96, controller=ControllerConfig(eta=eta),
                                                name=f"convergence eta={eta}")
    return Recipe("fig-eta-tradeoff", "d_k = sin(1.5*pi*k*T) under eta=0.8 and eta=0.1", sc)


def robust_vs_nominal_recipe() -> Recipe:
    atk = AttackSpec(signal=_wave(1.0, math.pi / 4), rho=0.5)
    sc = {mode: Scenario(plant_mode="nonlinear", attack=atk, name=mode,
                         controller=ControllerConfig(mode=mode))
          for mode in ("nominal", "robust")}
    return Recipe("fig-robust-vs-nominal", "d_k = sin(pi/4*k*T), nominal vs robust", sc)


def robust_filter_recipe() -> Recipe:
    atk = AttackSpec(signal=_wave(1.0, 2 * math.pi), rho=0.5)
    sc = {mode: Scenario(plant_mode="nonlinear", attack=atk, name=mode,
                         controller=ControllerConfig(mode=mode))
          for mode in ("nominal", "robust", "robust_with_filter")}
    return Recipe("fig-robust-filter", "attack at 2*pi rad/h: nominal, robust, robust+filter", sc)


def price_vs_sensor_recipe() -> Recipe:
    omega = math.pi / (2 * T_REF)
    base = Scenario(plant_mode="linearized", name="price-vs-sensor")
    sc = {
        "price": base.with_attack(AttackSpec(channel="price", signal=_wave(0.25, omega), rho=1.0)),
        "sensor": base.with_attack(AttackSpec(channel="sensor", signal=_wave(0.2, omega),
                                              n_compromised=base.market.n_consumers)),
    }
    table = lambda th: compare_price_vs_sensor(base, (0.0, 0.25, 0.5, 0.75, 1.0),
                                               (0.1, 0.5, 0.8), threads=th)
    return Recipe("fig-price-vs-sensor", "matched price (0.25 $/MWh) and sensor (0.2 kW) attacks",
                  sc, {"channels": table})


def detection_times_recipe() -> Recipe:
    base = Scenario(market=_weekly(), plant_mode="nonlinear", name="detection")
    sc = {}
    for w in DETECTION_OMEGAS:
        atk = AttackSpec(signal=price_wave(0.1, w, math.pi / 2), rho=0.5)
        sc[f"omega-{w:.4f}"] = base.with_attack(atk, name=f"omega={w:.4f}")
    sc["attack-free"] = base
    table = lambda th: detection_sweep(base, DETECTION_OMEGAS, (0.1, 0.5, 0.8), threads=th)
    return Recipe("fig-detection-times", "CUSUM (delta=10) delay vs attack frequency, rho=0.5, A=0.1",
                  sc, {"detection_times": table})


def convergence_recipe() -> Recipe:
    sc = {f"eta-{eta}": Scenario(plant_mode="linearized", initial_offset_mw=41.0, horizon=64,
                                 controller=ControllerConfig(eta=eta), name=f"eta={eta}")
          for eta in (0.1, 0.5, 0.85)}
    return Recipe("fig-convergence", "attack-free convergence from a 41 MW offset", sc)


RECIPES: dict[str, Callable[[], Recipe]] = {
    "fig-attack-comparison": attack_comparison_recipe,
    "fig-eta-tradeoff": eta_tradeoff_recipe,
    "fig-robust-vs-nominal": robust_vs_nominal_recipe,
    "fig-robust-filter": robust_filter_recipe,
    "fig-price-vs-sensor": price_vs_sensor_recipe,
    "fig-detection-times": detection_times_recipe,
    "fig-convergence": convergence_recipe,
}


def repro_recipe(name: str) -> Recipe:
    try:
        return RECIPES[name]()
    except KeyError:
        raise KeyError(f"unknown recipe {name!r}; choose from {', '.join(RECIPES)}") from None
