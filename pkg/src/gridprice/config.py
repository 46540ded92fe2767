"""TOML scenario files.

Layout (every key optional; omitted keys take the dataclass defaults)::

    name = "demo"
    horizon = 336
    seed = 0
    plant_mode = "nonlinear"         # or "linearized"
    initial_offset_mw = 0.0
    forecast_error = 0.0
    noise_mw = 0.0

    [market]
    p = 31.0
    q = 917.0
    D = 5000.0
    epsilon = -0.5
    T = 0.5
    n_consumers = 1000000
    baseline = 400.0                 # number, list, or use one of:
    # baseline_csv = "profile.csv"   # step,baseline_mw (relative to the file)
    # synth_days = 7                 # synthetic profile drawn with `seed`

    [controller]                     # eta, mode, phi, gamma_hat, observer_lag
    [filter]                         # cutoff, order, iso_replica, on_reports
    [detector]                       # delta, alpha, calibration_steps, safety_factor
    [attack]                         # channel, shape, signal, amplitude, omega, phase,
                                     # values, gamma, tau, rho, n_compromised, start, end

Unknown keys anywhere are rejected.
"""

from __future__ import annotations

import re
import sys
from dataclasses import fields
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib
import tomli_w

from . import io as gio
from .attacks import AttackSignal, AttackSpec
from .errors import ConfigError
from .market import MarketParams
from .simulation import ControllerConfig, DetectorConfig, FilterConfig, Scenario, synth_baseline

TOP_KEYS = {"name", "horizon", "seed", "plant_mode", "initial_offset_mw", "forecast_error",
            "noise_mw", "market", "controller", "filter", "detector", "attack"}
MARKET_KEYS = {"p", "q", "D", "epsilon", "T", "n_consumers", "baseline", "baseline_csv",
               "synth_days"}
SIGNAL_KEYS = {"signal": "kind", "amplitude": "amplitude", "omega": "omega", "phase": "phase",
               "values": "values"}
ATTACK_KEYS = set(SIGNAL_KEYS) | {"channel", "shape", "gamma", "tau", "rho", "n_compromised",
                                  "start", "end"}

_FLOAT = (int, float)
INT_KEYS = {"horizon", "seed", "n_consumers", "synth_days", "observer_lag", "order",
            "calibration_steps", "tau", "n_compromised", "start", "end"}


def _keys(cls):
    return {f.name for f in fields(cls) if f.init}


def _check_keys(table, allowed, where):
    if not isinstance(table, dict):
        raise ConfigError(f"[{where}] must be a table")
    unknown = sorted(set(table) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def _check_types(table, where):
    for key, val in table.items():
        if key in INT_KEYS and (isinstance(val, bool) or not isinstance(val, int)):
            raise ConfigError(f"{where}.{key} must be an integer, got {val!r}")
        if not isinstance(val, (bool, str, list, dict) + _FLOAT):
            raise ConfigError(f"{where}.{key}: unsupported value type {type(val).__name__}")


def _build(cls, kwargs, where):
    try:
        return cls(**kwargs)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid {where}: {exc}") from exc


def _market(table, seed, base_dir):
    _check_keys(table, MARKET_KEYS, "market")
    table = dict(table)
    sources = [k for k in ("baseline", "baseline_csv", "synth_days") if k in table]
    if len(sources) > 1:
        raise ConfigError(f"market: give only one of baseline, baseline_csv, synth_days (got {sources})")
    T = table.get("T", MarketParams.T)
    if "baseline_csv" in table:
        path = Path(table.pop("baseline_csv"))
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        table["baseline"] = gio.read_baseline_csv(path)
    elif "synth_days" in table:
        days = table.pop("synth_days")
        try:
            table["baseline"] = synth_baseline(seed, int(days), T)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"invalid market.synth_days: {exc}") from exc
    if "baseline" in table and isinstance(table["baseline"], list):
        table["baseline"] = tuple(table["baseline"])
    return _build(MarketParams, table, "market")


def _attack(table):
    _check_keys(table, ATTACK_KEYS, "attack")
    sig = {SIGNAL_KEYS[k]: v for k, v in table.items() if k in SIGNAL_KEYS}
    if "values" in sig:
        sig["values"] = tuple(sig["values"])
    rest = {k: v for k, v in table.items() if k not in SIGNAL_KEYS}
    signal = _build(AttackSignal, sig, "attack signal")
    return _build(AttackSpec, dict(rest, signal=signal), "attack")


def scenario_from_dict(data: dict, base_dir: Optional[str] = None) -> Scenario:
    _check_keys(data, TOP_KEYS, "top level")
    for section in ("market", "controller", "filter", "detector", "attack"):
        if section in data:
            if not isinstance(data[section], dict):
                raise ConfigError(f"[{section}] must be a table")
            _check_types(data[section], section)
    top = {k: v for k, v in data.items() if not isinstance(v, dict)}
    _check_types(top, "top level")
    seed = top.get("seed", 0)
    kwargs = dict(top)
    kwargs["market"] = _market(data.get("market", {}), seed, base_dir)
    sections = (("controller", ControllerConfig), ("filter", FilterConfig),
                ("detector", DetectorConfig))
    for name, cls in sections:
        table = data.get(name, {})
        _check_keys(table, _keys(cls), name)
        kwargs[name] = _build(cls, table, name)
    if "attack" in data:
        kwargs["attack"] = _attack(data["attack"])
    return _build(Scenario, kwargs, "scenario")


def parse_config(text: str, base_dir: Optional[str] = None) -> Scenario:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        line = int(m.group(1)) if m else None
        where = f"line {line}: " if line is not None else ""
        raise ConfigError(f"config syntax error at {where}{exc}", line=line) from exc
    return scenario_from_dict(data, base_dir)


def load_config(path) -> Scenario:
    """Read a scenario file; I/O failures propagate as OSError."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    return parse_config(text, base_dir=str(path.parent))


def _drop_none(d):
    return {k: v for k, v in d.items() if v is not None}


def scenario_to_dict(sc: Scenario) -> dict:
    m = sc.market
    out = {
        "name": sc.name, "horizon": sc.horizon, "seed": sc.seed, "plant_mode": sc.plant_mode,
        "initial_offset_mw": sc.initial_offset_mw, "forecast_error": sc.forecast_error,
        "noise_mw": sc.noise_mw,
        "market": {
            "p": m.p, "q": m.q, "D": m.D, "epsilon": m.epsilon, "T": m.T,
            "n_consumers": m.n_consumers,
            "baseline": m.baseline[0] if len(m.baseline) == 1 else list(m.baseline),
        },
    }
    for name in ("controller", "filter", "detector"):
        obj = getattr(sc, name)
        out[name] = _drop_none({k: getattr(obj, k) for k in _keys(type(obj))})
    a = sc.attack
    if a is not None:
        s = a.signal
        out["attack"] = _drop_none({
            "channel": a.channel, "shape": a.shape, "signal": s.kind, "amplitude": s.amplitude,
            "omega": s.omega, "phase": s.phase, "values": list(s.values), "gamma": a.gamma,
            "tau": a.tau, "rho": a.rho, "n_compromised": a.n_compromised, "start": a.start,
            "end": a.end,
        })
    return out


def serialize_config(sc: Scenario) -> str:
    return tomli_w.dumps(scenario_to_dict(sc))
