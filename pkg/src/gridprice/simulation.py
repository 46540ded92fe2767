"""Closed-loop discrete-time simulation of real-time pricing under attack.

Step semantics for k = 0 .. horizon-1:

1. the observer produces d_hat_k from the report of period k-1;
2. the operator issues lambda_k from that report (plus the compensator in
   robust modes);
3. the attack alters the price seen by victims and/or the demand report;
4. the plant evaluates supply and true demand, giving e_k;
5. the report y_k = e_k - (falsified demand) is stored for step k+1 and the
   observer and detector advance.  With the meter filter enabled and
   replicated by the operator, the stored value is the report corrected
   for the filter lag on the responsive demand.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import market as mk
from .attacks import AttackSignal, AttackSpec, attacked_price, sensor_report_shift
from .control import DisturbanceObserver, PriceController, design_lowpass
from .detection import Cusum, calibrate_alpha
from .errors import ModelError, SimulationError
from .sensitivity import cutoff_frequency

CONTROLLER_MODES = ("nominal", "robust", "robust_with_filter")
PLANT_MODES = ("linearized", "nonlinear")


@dataclass(frozen=True)
class ControllerConfig:
    eta: float = 0.5
    mode: str = "nominal"
    phi: float = 0.5
    gamma_hat: Optional[float] = None
    observer_lag: int = 1

    def __post_init__(self):
        if not 0.0 < self.eta < 1.0:
            raise ValueError("eta must be in (0,1)")
        if not abs(self.phi) < 1.0:
            raise ValueError("phi must be in (-1,1)")
        if self.mode not in CONTROLLER_MODES:
            raise ValueError(f"controller mode must be one of {CONTROLLER_MODES}")
        if self.gamma_hat is not None and self.gamma_hat == 0:
            raise ValueError("gamma_hat must be non-zero")
        if self.observer_lag not in (1, 2):
            raise ValueError("observer_lag must be 1 or 2")


FILTER_PLACEMENTS = ("meters", "attack")


@dataclass(frozen=True)
class FilterConfig:
    """Meter-side low-pass used in ``robust_with_filter`` mode.

    ``placement="meters"`` filters the price received by every meter (the
    physical deployment); ``"attack"`` filters only the offset a compromised
    meter receives, i.e. the idealized case where the legitimate price is
    untouched.  ``iso_replica`` lets the operator run the same filter to
    correct the demand-response lag out of its error signal.
    """

    cutoff: Optional[float] = None  # rad/h, defaults to the robust cut-off for phi
    order: int = 4
    placement: str = "meters"
    iso_replica: bool = True
    on_reports: bool = False

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("filter order must be >= 1")
        if self.placement not in FILTER_PLACEMENTS:
            raise ValueError(f"filter placement must be one of {FILTER_PLACEMENTS}")
        if self.cutoff is not None and not self.cutoff > 0:
            raise ValueError("filter cutoff must be > 0")


@dataclass(frozen=True)
class DetectorConfig:
    delta: float = 10.0
    alpha: Optional[float] = None
    calibration_steps: int = 48
    safety_factor: float = 1.2

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be > 0")
        if self.alpha is not None and not self.alpha >= 0:
            raise ValueError("alpha must be >= 0")
        if self.calibration_steps < 10:
            raise ValueError("calibration_steps must be >= 10")
        if not self.safety_factor >= 1.0:
            raise ValueError("safety_factor must be >= 1")


@dataclass(frozen=True)
class Scenario:
    market: mk.MarketParams = field(default_factory=mk.MarketParams)
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    plant_mode: str = "linearized"
    attack: Optional[AttackSpec] = None
    horizon: int = 336
    seed: int = 0
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    filter: FilterConfig = field(default_factory=FilterConfig)
    initial_offset_mw: float = 0.0
    forecast_error: float = 0.0
    noise_mw: float = 0.0
    name: str = ""

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.plant_mode not in PLANT_MODES:
            raise ValueError(f"plant_mode must be one of {PLANT_MODES}")
        if self.noise_mw < 0:
            raise ValueError("noise_mw must be >= 0")
        if self.attack is not None:
            self.attack.signal.check_band(self.market.T)
            if self.attack.n_compromised > self.market.n_consumers:
                raise ValueError("n_compromised must be <= n_consumers")
        if self.filter.cutoff is not None and self.filter.cutoff >= math.pi / self.market.T:
            raise ValueError("filter cutoff must be below pi/T")

    def with_attack(self, attack: Optional[AttackSpec], **kw) -> "Scenario":
        return replace(self, attack=attack, **kw)

    def with_controller(self, **kw) -> "Scenario":
        return replace(self, controller=replace(self.controller, **kw))


COLUMNS = (
    "lambda", "lambda_victim", "supply_mw", "demand_mw", "e_mw", "e_obs_mw",
    "d_hat", "cusum_s", "alarm", "clamped",
)


@dataclass
class SimTrace:
    columns: dict
    lambda0: float
    g_p: float
    w_dot: float
    gamma_hat: float
    alpha: Optional[float]
    alarm_step: Optional[int]
    clamp_count: int
    scenario: Scenario

    def __len__(self):
        return len(self.columns["e_mw"])

    def __getitem__(self, name) -> np.ndarray:
        return self.columns[name]

    @property
    def e(self) -> np.ndarray:
        return self.columns["e_mw"]

    @property
    def e_obs(self) -> np.ndarray:
        return self.columns["e_obs_mw"]

    @property
    def price(self) -> np.ndarray:
        return self.columns["lambda"]

    @property
    def scaled_dhat(self) -> np.ndarray:
        return self.gamma_hat * self.columns["d_hat"]

    def max_abs_error(self, start: int = 0, observed: bool = False) -> float:
        x = self.e_obs if observed else self.e
        return float(np.max(np.abs(x[start:])))

    @property
    def detection_delay(self) -> Optional[int]:
        atk = self.scenario.attack
        if self.alarm_step is None or atk is None:
            return None
        return self.alarm_step - atk.start


def default_gamma_hat(attack: Optional[AttackSpec], plant: mk.LinearizedPlant) -> float:
    if attack is not None and attack.channel == "sensor":
        return -1.0
    return -plant.w_dot


def run(scenario: Scenario) -> SimTrace:
    m = scenario.market
    cfg = scenario.controller
    atk = scenario.attack
    T = m.T
    H = scenario.horizon
    b0 = m.baseline_at(0)
    fe = scenario.forecast_error

    lam0 = mk.clearing_price(m, b0)
    plant = mk.linearize(m, lam0)
    g_p = plant.g_p
    if scenario.plant_mode == "nonlinear":
        supply_at = lambda lam: mk.supply(m, lam)
        w_at = lambda lam: mk.responsive_demand(m, lam)
    else:
        supply_at = plant.supply
        w_at = plant.responsive_demand

    gamma_hat = cfg.gamma_hat if cfg.gamma_hat is not None else default_gamma_hat(atk, plant)
    observer = DisturbanceObserver(cfg.phi, gamma_hat, g_p, lag=cfg.observer_lag)
    lam_init = max(lam0 + scenario.initial_offset_mw / g_p, mk.LAMBDA_MIN)
    ctrl = PriceController(cfg.eta, g_p, lam_init)
    robust = cfg.mode in ("robust", "robust_with_filter")

    filtering = cfg.mode == "robust_with_filter"
    on_meters = filtering and scenario.filter.placement == "meters"
    if filtering:
        wc = scenario.filter.cutoff or cutoff_frequency(cfg.phi, T)
        base = design_lowpass(wc, T, scenario.filter.order)
        f_victim, f_other, f_iso = base.copy(), base.copy(), base.copy()
        for f in (f_other, f_iso):
            f.reset(lam_init)
        f_victim.reset(lam_init if on_meters else 0.0)
    correct_lag = on_meters and scenario.filter.iso_replica
    filter_reports = filtering and scenario.filter.on_reports
    if filter_reports:
        rep_filters = (base.copy(), base.copy())
    rng = np.random.default_rng(scenario.seed) if scenario.noise_mw > 0 else None

    price_atk = atk is not None and atk.channel == "price"
    sensor_atk = atk is not None and atk.channel == "sensor"
    rho = atk.rho if price_atk else 0.0

    det_cfg = scenario.detector
    cal = det_cfg.calibration_steps
    if det_cfg.alpha is not None:
        detector = Cusum(alpha=det_cfg.alpha, delta=det_cfg.delta)
        alpha, det_offset = det_cfg.alpha, 0
    else:
        detector, alpha, det_offset = None, None, cal - 1
        if atk is not None and atk.start < cal:
            warnings.warn("attack starts inside the detector calibration window", stacklevel=2)

    cols = {c: np.zeros(H) for c in COLUMNS}
    lam_hist = []
    y_prev = 0.0
    g_hist = []
    for k in range(H):
        try:
            clamps_before = ctrl.clamp_count
            observer.estimate(y_prev)
            g = observer.scaled
            lam = ctrl.robust_step(y_prev, g) if robust else ctrl.step(y_prev)
            lam_hist.append(lam)
            clamped = ctrl.clamp_count > clamps_before

            victim = attacked_price(atk, k, lam_hist, T) if price_atk else lam
            if on_meters:
                lam_nv = max(f_other.step(lam), mk.LAMBDA_MIN)
                lam_v = max(f_victim.step(victim), mk.LAMBDA_MIN)
                lam_iso = max(f_iso.step(lam), mk.LAMBDA_MIN) if correct_lag else lam
            elif filtering:
                lam_nv, lam_iso = lam, lam
                lam_v = max(lam + f_victim.step(victim - lam), mk.LAMBDA_MIN)
            else:
                lam_nv, lam_v, lam_iso = lam, victim, lam
            sup = supply_at(lam)
            dem = m.baseline_at(k) + (1.0 - rho) * w_at(lam_nv) + rho * w_at(lam_v)
            e = sup - dem

            y = e
            if sensor_atk:
                y -= sensor_report_shift(atk, k, T)
            if rng is not None:
                y += rng.uniform(-scenario.noise_mw, scenario.noise_mw)
            # With a replica of the meter filter the operator removes the filter's
            # own dynamics from the report, so the loop keeps its static gain and
            # only the (filtered) attack remains as a disturbance.
            y_ctrl = y + (w_at(lam_iso) - w_at(lam)) if correct_lag else y
            b_fc = b0 + (1.0 + fe) * (m.baseline_at(k) - b0)
            pred = sup - b_fc - w_at(lam)
            if filter_reports:
                y_ctrl = rep_filters[0].step(y_ctrl)
                pred = rep_filters[1].step(pred)
            u = lam - lam0
            observer.update(u, pred - g_p * u)

            if detector is None and alpha is None:
                g_hist.append(g)
                if k == cal - 1:
                    alpha = calibrate_alpha(g_hist, det_cfg.safety_factor)
                    detector = Cusum(alpha=alpha, delta=det_cfg.delta)
                    detector.step(g)
            elif detector is not None:
                detector.step(g)
        except ModelError as exc:
            raise SimulationError(k, exc) from exc

        cols["lambda"][k] = lam
        cols["lambda_victim"][k] = victim
        cols["supply_mw"][k] = sup
        cols["demand_mw"][k] = dem
        cols["e_mw"][k] = e
        cols["e_obs_mw"][k] = y
        cols["d_hat"][k] = observer.d_hat
        cols["cusum_s"][k] = detector.s if detector is not None else 0.0
        cols["alarm"][k] = 1.0 if detector is not None and detector.alarm else 0.0
        cols["clamped"][k] = 1.0 if clamped or victim <= mk.LAMBDA_MIN else 0.0
        y_prev = y_ctrl

    alarm_step = None
    if detector is not None and detector.alarmed_at is not None:
        alarm_step = det_offset + detector.alarmed_at
    return SimTrace(
        columns=cols, lambda0=lam0, g_p=g_p, w_dot=plant.w_dot, gamma_hat=gamma_hat,
        alpha=alpha, alarm_step=alarm_step, clamp_count=ctrl.clamp_count, scenario=scenario,
    )


def default_threads() -> int:
    env = os.environ.get("GRIDPRICE_THREADS")
    if env:
        return max(1, int(env))
    return 1


def run_many(scenarios: Sequence[Scenario], threads: Optional[int] = None) -> list:
    threads = threads or default_threads()
    if threads <= 1 or len(scenarios) <= 1:
        return [run(s) for s in scenarios]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run, scenarios))


def steady_amplitude(x, omega: float, T: float, start: int = 0) -> float:
    """Amplitude of the omega-component of x[start:] by least squares.

    Fits a*sin + b*cos + c; exact for a pure sampled sinusoid, including the
    Nyquist case where the sine column vanishes.
    """
    x = np.asarray(x, dtype=float)[start:]
    k = np.arange(start, start + len(x))
    A = np.column_stack([np.sin(omega * k * T), np.cos(omega * k * T), np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, x, rcond=None)
    return float(math.hypot(coef[0], coef[1]))


def synth_household_kw(seed: int = 0, days: int = 7, T: float = 0.5,
                       household_kw=(2.8, 4.6)) -> np.ndarray:
    """Per-household diurnal load (kW) with a morning and an evening peak.

    The seed only jitters per-day peak heights and times by a few percent;
    every value stays inside ``household_kw``.
    """
    if days < 1:
        raise ValueError("days must be >= 1")
    steps_per_day = int(round(24.0 / T))
    rng = np.random.default_rng(seed)
    t = np.arange(days * steps_per_day) * T
    hour = t % 24.0
    day = (t // 24.0).astype(int)
    amp_m = 0.8 * (1.0 + 0.03 * rng.standard_normal(days))
    amp_e = 1.0 * (1.0 + 0.03 * rng.standard_normal(days))
    c_m = 8.0 + 0.25 * rng.standard_normal(days)
    c_e = 19.0 + 0.25 * rng.standard_normal(days)

    def bump(h, center, kappa):
        return np.exp(kappa * (np.cos(2 * np.pi * (h - center) / 24.0) - 1.0))

    f = amp_m[day] * bump(hour, c_m[day], 6.0) + amp_e[day] * bump(hour, c_e[day], 5.0)
    f = (f - f.min()) / (f.max() - f.min())
    lo, hi = household_kw
    margin = 0.01 * (hi - lo)
    return lo + margin + (hi - lo - 2 * margin) * f


def synth_baseline(seed: int = 0, days: int = 7, T: float = 0.5, mean_mw: float = 400.0,
                   household_kw=(2.8, 4.6)) -> tuple:
    """Aggregate baseline (MW): the household profile rescaled to ``mean_mw``."""
    h = synth_household_kw(seed, days, T, household_kw)
    b = mean_mw * h / h.mean()
    return tuple(float(v) for v in b)


def price_wave(amplitude: float, omega: float, phase: float = 0.0, **kw) -> AttackSignal:
    return AttackSignal(kind="sinusoid", amplitude=amplitude, omega=omega, phase=phase, **kw)


def compare_price_vs_sensor(template: Scenario, fractions: Sequence[float], etas: Sequence[float],
                            price_amplitude: float = 0.25, sensor_amplitude_kw: float = 0.2,
                            threads: Optional[int] = None) -> list:
    """max|e| for matched price and sensor attacks over (eta, compromised fraction).

    Both waveforms are A*sin(pi*k/2).  Rows report the physical mismatch and
    the mismatch as reported to the operator (they coincide for price attacks).
    """
    T = template.market.T
    omega = math.pi / (2.0 * T)
    start = template.attack.start if template.attack is not None else 48
    n_total = template.market.n_consumers
    jobs, keys = [], []
    for eta in etas:
        base = template.with_controller(eta=eta)
        for frac in fractions:
            price = AttackSpec(channel="price", signal=price_wave(price_amplitude, omega),
                               rho=frac, start=start)
            sensor = AttackSpec(channel="sensor", signal=price_wave(sensor_amplitude_kw, omega),
                                n_compromised=int(round(frac * n_total)), start=start)
            jobs += [base.with_attack(price), base.with_attack(sensor)]
            keys.append((eta, frac))
    traces = run_many(jobs, threads)
    rows = []
    for i, (eta, frac) in enumerate(keys):
        tp, ts = traces[2 * i], traces[2 * i + 1]
        rows.append({
            "eta": eta, "fraction": frac,
            "price_max_e": tp.max_abs_error(start), "sensor_max_e": ts.max_abs_error(start),
            "price_max_e_obs": tp.max_abs_error(start, observed=True),
            "sensor_max_e_obs": ts.max_abs_error(start, observed=True),
        })
    return rows


def detection_sweep(template: Scenario, omegas: Sequence[float], etas: Sequence[float] = (),
                    amplitude: float = 0.1, rho: float = 0.5, phase: float = math.pi / 2,
                    threads: Optional[int] = None) -> list:
    """Detection delay (steps after onset) for sinusoidal price attacks."""
    etas = list(etas) or [template.controller.eta]
    start = template.attack.start if template.attack is not None else 48
    jobs, keys = [], []
    for eta in etas:
        for w in omegas:
            atk = AttackSpec(channel="price", signal=price_wave(amplitude, w, phase), rho=rho,
                             start=start)
            jobs.append(template.with_controller(eta=eta).with_attack(atk))
            keys.append((eta, w))
    traces = run_many(jobs, threads)
    return [
        {"eta": eta, "omega": w, "detection_steps": tr.detection_delay, "alpha": tr.alpha}
        for (eta, w), tr in zip(keys, traces)
    ]


def attack_comparison(template: Scenario, gamma: float = 0.95, tau: int = 8, rho: float = 0.5,
                      threads: Optional[int] = None) -> list:
    """Scaling and delay attacks against an additive attack of matched size.

    For each legacy attack the largest victim price deviation it causes is
    measured, and an additive attack at the Nyquist frequency (where the
    error sensitivity peaks for every eta) is given exactly that amplitude.
    Impact is the attack-induced mismatch max|e - e_free| after onset, so the
    baseline-tracking error shared by all runs does not blur the comparison.
    """
    start = template.attack.start if template.attack is not None else 48
    T = template.market.T
    legacy = [
        AttackSpec(channel="price", shape="scaling", gamma=gamma, rho=rho, start=start),
        AttackSpec(channel="price", shape="delay", tau=tau, rho=rho, start=start),
    ]
    free, *legacy_traces = run_many([template.with_attack(None)]
                                    + [template.with_attack(a) for a in legacy], threads)
    additive, devs = [], []
    for tr in legacy_traces:
        dev = float(np.max(np.abs(tr["lambda_victim"] - tr["lambda"])[start:]))
        devs.append(dev)
        additive.append(AttackSpec(channel="price", signal=price_wave(dev, math.pi / T, math.pi / 2),
                                   rho=rho, start=start))
    add_traces = run_many([template.with_attack(a) for a in additive], threads)
    rows = []
    for atk, tr, dev, add in zip(legacy, legacy_traces, devs, add_traces):
        rows.append({
            "attack": atk.shape,
            "max_price_deviation": dev,
            "impact": float(np.max(np.abs(tr.e - free.e)[start:])),
            "additive_impact": float(np.max(np.abs(add.e - free.e)[start:])),
            "max_e": tr.max_abs_error(start),
            "additive_max_e": add.max_abs_error(start),
        })
    return rows
