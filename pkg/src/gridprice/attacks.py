"""Integrity attacks on the price broadcast and on smart-meter reports."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .market import LAMBDA_MIN, LinearizedPlant

CHANNELS = ("price", "sensor")
SHAPES = ("additive", "scaling", "delay")
SIGNAL_KINDS = ("constant", "sinusoid", "series")


@dataclass(frozen=True)
class AttackSignal:
    """Additive waveform d_k (price, $/MWh) or n_k (per meter, kW).

    Sinusoids are evaluated at the absolute step, ``A*sin(omega*k*T + phase)``;
    series values are indexed from the start of the attack window.
    A constant uses ``amplitude`` as its level.
    """

    kind: str = "sinusoid"
    amplitude: float = 0.0
    omega: float = 0.0
    phase: float = 0.0
    values: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.kind not in SIGNAL_KINDS:
            raise ValueError(f"signal kind must be one of {SIGNAL_KINDS}, got {self.kind!r}")
        if self.kind == "sinusoid":
            if self.amplitude < 0:
                raise ValueError("sinusoid amplitude must be >= 0")
            if self.omega < 0:
                raise ValueError("sinusoid omega must be >= 0")
        if self.kind == "series" and not all(math.isfinite(v) for v in self.values):
            raise ValueError("series values must be finite")

    def check_band(self, T: float):
        """Sinusoids above omega_max = pi/T cannot be produced at sampling period T."""
        if self.kind == "sinusoid" and self.omega > math.pi / T * (1 + 1e-12):
            raise ValueError(f"omega={self.omega} exceeds pi/T={math.pi / T}")

    def value(self, k: int, T: float, start: int = 0) -> float:
        if self.kind == "constant":
            return self.amplitude
        if self.kind == "sinusoid":
            return self.amplitude * math.sin(self.omega * k * T + self.phase)
        i = k - start
        if 0 <= i < len(self.values):
            return self.values[i]
        return 0.0


@dataclass(frozen=True)
class AttackSpec:
    channel: str = "price"
    shape: str = "additive"
    signal: AttackSignal = field(default_factory=AttackSignal)
    gamma: float = 1.0
    tau: int = 1
    rho: float = 0.0
    n_compromised: int = 0
    start: int = 48
    end: Optional[int] = None

    def __post_init__(self):
        if self.channel not in CHANNELS:
            raise ValueError(f"channel must be one of {CHANNELS}, got {self.channel!r}")
        if self.shape not in SHAPES:
            raise ValueError(f"shape must be one of {SHAPES}, got {self.shape!r}")
        if self.shape != "additive" and self.channel != "price":
            raise ValueError(f"{self.shape} attacks are only defined on the price channel")
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must be in [0, 1], got {self.rho}")
        if self.n_compromised < 0:
            raise ValueError(f"n_compromised must be >= 0, got {self.n_compromised}")
        if self.shape == "scaling" and not self.gamma > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if self.shape == "delay" and self.tau < 1:
            raise ValueError(f"tau must be >= 1, got {self.tau}")
        if self.start < 0:
            raise ValueError(f"start must be >= 0, got {self.start}")
        if self.end is not None and self.end < self.start:
            raise ValueError("end must be >= start")

    def active(self, k: int) -> bool:
        return k >= self.start and (self.end is None or k <= self.end)

    def additive_value(self, k: int, T: float) -> float:
        if self.shape != "additive" or not self.active(k):
            return 0.0
        return self.signal.value(k, T, self.start)


def attacked_price(spec: AttackSpec, k: int, lambda_history: Sequence[float], T: float = 0.5) -> float:
    """Price received by compromised meters at step ``k``.

    ``lambda_history[k]`` must be the price issued at step ``k``.  A delay
    attack reaching before the first step replays ``lambda_history[0]``.
    """
    lam = lambda_history[k]
    if spec.channel != "price" or not spec.active(k):
        return lam
    if spec.shape == "scaling":
        out = spec.gamma * lam
    elif spec.shape == "delay":
        out = lambda_history[max(k - spec.tau, 0)]
    else:
        out = lam + spec.signal.value(k, T, spec.start)
    return max(out, LAMBDA_MIN)


def victim_demand_shift(plant: LinearizedPlant, spec: AttackSpec, d_k: float) -> float:
    """Linearized extra demand (MW) of the victims for an additive price offset."""
    if spec.channel != "price" or spec.shape != "additive":
        raise ValueError("victim_demand_shift needs an additive price-channel attack")
    if abs(d_k) > 0.2 * plant.lambda0:
        warnings.warn(
            f"|d_k|={abs(d_k):.4g} exceeds 0.2*lambda0; linearization is inaccurate",
            stacklevel=2,
        )
    return spec.rho * plant.w_dot * d_k


def sensor_report_shift(spec: AttackSpec, k: int, T: float = 0.5) -> float:
    """Offset (MW) added to the aggregated demand report by N compromised meters."""
    if spec.channel != "sensor":
        raise ValueError("sensor_report_shift needs a sensor-channel attack")
    if not spec.active(k):
        return 0.0
    return spec.n_compromised * spec.signal.value(k, T, spec.start) / 1000.0
